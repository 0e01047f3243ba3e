#pragma once

#include <optional>
#include <string>
#include <vector>

#include "apvar/characters.hpp"

namespace apv {

// Conjugation-closed character family F_q with conductor bookkeeping.
struct CharacterFamily {
  u64 q = 0;
  std::vector<std::string> members;  // labels, sorted
  u64 phi_F = 0;                     // Phi_q = #F_q
  double E_q = 0;                    // sum over F_q of (log q - log q_chi)
  double w = 0;                      // control value used by the selector
  double threshold = 0;              // w^{-1} log log q
  bool threshold_vacuous = false;    // threshold >= log q excludes nothing
  double g = 0;                      // pipeline g(q) when constructed there
  u64 requested_size = 0;            // pipeline formula size before clamping

  std::vector<DirichletCharacter> characters() const;
};

// (1/phi(q)) sum over all chi mod q of (log q_chi - log q)^2, two routes that
// agree bit-for-bit: per-character tallying vs. divisor grouping via the
// count of primitive characters per conductor.
double conductor_variance(u64 q);
double conductor_variance_grouped(u64 q);

// Keep characters with |log q_chi - log q| <= w^{-1} log log q, drop real
// characters, then truncate to target_size keeping conjugate pairs together
// (largest conductor first, ties by label).  nullopt target keeps everything.
CharacterFamily select_family(u64 q, double w, std::optional<u64> target_size);

// The parameter pipeline: w = 1/loglog q, size 2*floor(phi(q) g / (2 log q) *
// (1 - K/(loglog q)^2)).  Errors when the formula gives fewer than 2.
CharacterFamily pipeline_family(u64 q, double K = 1.0,
                                std::optional<double> g = std::nullopt);

// Explicit member list (cross-check and Littlewood-demo families).
CharacterFamily family_from_labels(u64 q, std::vector<std::string> labels);

std::string family_json(const CharacterFamily& fam);
CharacterFamily family_from_json(const std::string& text);

}  // namespace apv
