#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "apvar/arith.hpp"
#include "apvar/characters.hpp"

namespace apv {

inline constexpr u32 kSieveVersion = 1;

// Primes <= limit by a plain sieve; used for base primes and test oracles.
std::vector<u32> simple_primes(u32 limit);

// Calls f(p) for every prime in [lo, hi], ascending.  Segmented, mod-30
// wheel, segments of 2^20 odd numbers (rounded to whole wheel blocks).
void for_primes_in(u64 lo, u64 hi, const std::function<void(u64)>& f);

struct SieveOptions {
  u64 ceiling = 1000000000;  // honest-sieving limit
  int threads = 0;           // 0 = hardware concurrency
};

// theta(x;q,a) and psi(x;q,a) for every residue a mod q.  psi is stored as
// theta plus the k>=2 prime-power part so the two pieces stay separately
// testable.  n <= floor(x); integer x included.
struct PrimeTally {
  double x = 0;
  u64 q = 0;
  std::vector<double> theta;      // indexed by residue a in [0,q)
  std::vector<double> psi_power;  // sum of log p over p^k <= x, k>=2, p^k == a
  double theta_at(u64 a) const { return theta[a % q]; }
  double psi_at(u64 a) const { return theta[a % q] + psi_power[a % q]; }
  double theta_coprime_total() const;  // sum over a coprime to q
  double psi_coprime_total() const;
};

PrimeTally sieve_tally(double x, u64 q, const SieveOptions& opts = {});

// Binary tally cache, little-endian, versioned header (see README).
void save_tally(const PrimeTally& t, const std::string& path);
PrimeTally load_tally(const std::string& path);

// theta(x,chi), psi(x,chi).  psi == theta + prime_power_part by a single
// floating add; prime_power_part is accumulated over prime powers p^k <= x,
// k >= 2, in ascending (p, k) order, which tests reproduce bit-for-bit.
struct CharacterSum {
  std::string label;
  u64 q = 0;
  double x = 0;
  cpx theta{0, 0};
  cpx psi{0, 0};
  cpx prime_power_part{0, 0};
};

CharacterSum character_sum(const DirichletCharacter& chi, const PrimeTally& tally);

// All phi(q) character sums at the tally's x, in character_group order.
std::vector<CharacterSum> all_character_sums(u64 q, const PrimeTally& tally);

// psi(x,chi) from the primitive character's sum:
//   psi(x,chi) = psi(x,chi*) - sum_{p | q} sum_{p^k <= x} chi*(p^k) log p.
cpx psi_from_primitive(const DirichletCharacter& chi, const CharacterSum& star_sum);

}  // namespace apv
