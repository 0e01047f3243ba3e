#pragma once

#include <string>
#include <vector>

#include "apvar/primes.hpp"

namespace apv {

struct VarianceReport {
  u64 q = 0;
  double x = 0;
  double G = 0;  // variance of theta(x;q,a) around x/phi(q)
  double V = 0;  // von Mangoldt variance around the empirical coprime mean
  double hooley_ratio = 0;  // G / (x log q)
  double parseval_residual_G = -1;  // |direct - parseval|, filled by the check
  double parseval_residual_V = -1;
  // label -> |theta(x,chi) - 1_{chi=chi0} x|^2 / phi(q); parseval route only
  std::vector<std::pair<std::string, double>> per_character_contributions;
  bool x_below_q = false;  // outside the x > q regime the bounds live in
};

VarianceReport variance_direct(const PrimeTally& tally);
VarianceReport variance_parseval(const std::vector<CharacterSum>& sums);

// Both routes from one tally; residual fields record |direct - parseval|.
VarianceReport variance_with_check(const PrimeTally& tally);

struct ScanRow {
  u64 q;
  double x, G, V, hooley_ratio;
  bool x_below_q;
};
struct ScanWindow {
  u64 Q;
  double x;
  double avg;  // (1/Q) sum_{Q<q<=2Q} G(x;q) / (x (logloglog x)^2)
};
struct HooleyScan {
  std::vector<ScanRow> rows;
  std::vector<ScanWindow> windows;
};

HooleyScan hooley_scan(u64 q_min, u64 q_max, const std::vector<double>& x_grid,
                       const SieveOptions& opts = {});

// CSV with versioned header; columns are fixed (see README).
std::string hooley_scan_csv(const HooleyScan& scan);

}  // namespace apv
