#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "apvar/arith.hpp"
#include "apvar/mp.hpp"

namespace apv {

// Simultaneous approximation instance: find n <= N with ||n lambda|| <=
// tolerance for every frequency.  Frequencies are deduplicated at 1e-12
// resolution before k is counted.
struct SyncProblem {
  std::vector<mp::Real> lambdas;
  long M = 2;
  double tolerance = 0.5;  // ||n lambda|| <= tolerance
  mpz_class N = 1;

  size_t k() const { return lambdas.size(); }

  // tolerance = 1/M (the lemma's own normalization)
  static SyncProblem with_M(std::vector<mp::Real> lambdas, long M, mpz_class N);
  // tolerance = 1/(2 pi M) (the normalization the parameter pipeline uses)
  static SyncProblem with_two_pi_M(std::vector<mp::Real> lambdas, long M, mpz_class N);
};

enum class SyncMethod { bucket, brute };

struct SyncResult {
  std::vector<mpz_class> hits;  // sorted ascending, all re-verified
  double count_lower_bound = 0; // N / M^k - 1
  SyncMethod method = SyncMethod::brute;
  double max_fractional_error = 0;  // max over hits and lambdas of ||n lambda||
  bool all_verified = true;         // false if any raw candidate failed re-verification
  long raw_candidates = 0;
  bool complete = false;  // true for brute scans (every hit <= N present)
};

// Exhaustive oracle; requires N <= 1e8 / k.
SyncResult sync_brute(const SyncProblem& p);

// The pigeonhole argument, literally: walk n*v over the k-torus, bucket into
// M^k half-open cubes, emit differences against the first member of the
// fullest cube.  Table memory is capped by bits_budget (k log2 M <= budget).
SyncResult sync_bucket(const SyncProblem& p, int bits_budget = 24);

struct LowestHit {
  std::optional<mpz_class> n;
  mpz_class floor_used;
  bool guaranteed = false;  // counting argument certifies a hit above floor
  std::string note;
};

// Smallest hit >= floor (default: N^(1/3)).
LowestHit sync_lowest_in_range(const SyncProblem& p, const SyncResult& r,
                               std::optional<mpz_class> floor = std::nullopt);

// (n * delta * gamma) mod 2pi, in [0, 2pi), absolute error <= 1e-10.
// Requires gamma to carry at least digits10(n) + 15 significant digits.
double phase_reduce(const mpz_class& n, const mp::Real& gamma, const mpq_class& delta);

// ||x|| = distance from x to the nearest integer, evaluated in mpfr for an
// exact big-integer multiple: returns ||n * lambda||.
double fractional_distance(const mpz_class& n, const mp::Real& lambda);

}  // namespace apv
