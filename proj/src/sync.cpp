#include "apvar/sync.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "apvar/errors.hpp"

namespace apv {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<mp::Real> dedup(std::vector<mp::Real> lambdas) {
  std::sort(lambdas.begin(), lambdas.end());
  std::vector<mp::Real> out;
  for (auto& l : lambdas) {
    if (!out.empty() && std::abs(out.back().to_double() - l.to_double()) <= 1e-12) continue;
    out.push_back(std::move(l));
  }
  return out;
}

double count_bound(const SyncProblem& p) {
  mpz_class mk;
  mpz_ui_pow_ui(mk.get_mpz_t(), static_cast<unsigned long>(p.M),
                static_cast<unsigned long>(p.k()));
  mpq_class bound(p.N, mk);
  bound.canonicalize();
  return bound.get_d() - 1.0;
}

// ||x|| for x in [0,1)
inline double dist_to_int(double frac) { return std::min(frac, 1.0 - frac); }

struct Walker {
  std::vector<double> lam_d;   // frac(lambda)
  std::vector<double> frac;    // frac(n * lambda)
  const std::vector<mp::Real>* lam_mp;
  u64 refresh_interval = u64(1) << 25;

  explicit Walker(const std::vector<mp::Real>& lambdas) : lam_mp(&lambdas) {
    for (const auto& l : lambdas) {
      double d = l.to_double();
      lam_d.push_back(d - std::floor(d));
    }
    frac.assign(lam_d.size(), 0.0);
  }

  void step() {
    for (size_t i = 0; i < frac.size(); ++i) {
      frac[i] += lam_d[i];
      if (frac[i] >= 1.0) frac[i] -= 1.0;
    }
  }

  // Exact re-anchor to kill accumulated rounding drift.
  void refresh(u64 n) {
    for (size_t i = 0; i < frac.size(); ++i) {
      const mp::Real& l = (*lam_mp)[i];
      mpfr_prec_t prec = l.prec() + 80;
      mp::Real t(prec);
      mpfr_mul_ui(t.raw(), l.raw(), static_cast<unsigned long>(n), MPFR_RNDN);
      mp::Real f = t - mp::floor(t);
      frac[i] = f.to_double();
      if (frac[i] >= 1.0) frac[i] = 0.0;
    }
  }
};

}  // namespace

double fractional_distance(const mpz_class& n, const mp::Real& lambda) {
  mpfr_prec_t prec = lambda.prec() + static_cast<mpfr_prec_t>(mpz_sizeinbase(n.get_mpz_t(), 2)) + 32;
  mp::Real t(prec);
  mpfr_mul_z(t.raw(), lambda.raw(), n.get_mpz_t(), MPFR_RNDN);
  mp::Real f = t - mp::floor(t);
  double fd = f.to_double();
  if (fd < 0) fd += 1.0;
  if (fd >= 1.0) fd -= 1.0;
  return dist_to_int(fd);
}

SyncProblem SyncProblem::with_M(std::vector<mp::Real> lambdas, long M, mpz_class N) {
  if (M < 2) throw DomainError("sync: M must be >= 2");
  if (N < 1) throw DomainError("sync: N must be >= 1");
  SyncProblem p;
  p.lambdas = dedup(std::move(lambdas));
  if (p.lambdas.empty()) throw DomainError("sync: need at least one frequency");
  p.M = M;
  p.tolerance = 1.0 / static_cast<double>(M);
  p.N = std::move(N);
  return p;
}

SyncProblem SyncProblem::with_two_pi_M(std::vector<mp::Real> lambdas, long M, mpz_class N) {
  auto p = with_M(std::move(lambdas), M, std::move(N));
  p.tolerance = 1.0 / (2.0 * kPi * static_cast<double>(M));
  return p;
}

SyncResult sync_brute(const SyncProblem& p) {
  const size_t k = p.k();
  if (p.N > mpz_class(100000000) / static_cast<long>(k))
    throw CapacityError("sync_brute: N too large for the exhaustive oracle (N <= 1e8/k)");
  const u64 N = p.N.get_ui();

  SyncResult out;
  out.method = SyncMethod::brute;
  out.count_lower_bound = count_bound(p);

  Walker w(p.lambdas);
  const double slack = 2e-9;
  std::vector<u64> candidates;
  for (u64 n = 1; n <= N; ++n) {
    w.step();
    if ((n & (w.refresh_interval - 1)) == 0) w.refresh(n);
    double worst = 0;
    for (double f : w.frac) worst = std::max(worst, dist_to_int(f));
    if (worst <= p.tolerance + slack) candidates.push_back(n);
  }
  out.raw_candidates = static_cast<long>(candidates.size());
  for (u64 n : candidates) {
    double worst = 0;
    for (const auto& l : p.lambdas)
      worst = std::max(worst, fractional_distance(mpz_class(static_cast<unsigned long>(n)), l));
    if (worst <= p.tolerance) {
      out.hits.emplace_back(static_cast<unsigned long>(n));
      out.max_fractional_error = std::max(out.max_fractional_error, worst);
    } else if (worst > p.tolerance + slack) {
      out.all_verified = false;  // double-lane scan was wrong by more than slack
    }
  }
  out.complete = true;
  return out;
}

SyncResult sync_bucket(const SyncProblem& p, int bits_budget) {
  const size_t k = p.k();
  const double bits_needed = static_cast<double>(k) * std::log2(static_cast<double>(p.M));
  if (bits_needed > bits_budget)
    throw CapacityError(
        "sync_bucket: M^k table needs " + std::to_string(bits_needed) +
        " bits against a budget of " + std::to_string(bits_budget) +
        "; use sync_brute for small N or the existence-certificate mode of mechanism-demo");
  if (!p.N.fits_ulong_p())
    throw CapacityError("sync_bucket: N does not fit a machine word; walk infeasible — "
                        "use the existence-certificate mode");
  const u64 N = p.N.get_ui();
  const u64 M = static_cast<u64>(p.M);
  u64 cubes = 1;
  for (size_t i = 0; i < k; ++i) cubes *= M;

  SyncResult out;
  out.method = SyncMethod::bucket;
  out.count_lower_bound = count_bound(p);

  // pass 1: occupancy
  std::vector<u32> counts(cubes, 0);
  {
    Walker w(p.lambdas);
    for (u64 n = 1; n <= N; ++n) {
      w.step();
      if ((n & (w.refresh_interval - 1)) == 0) w.refresh(n);
      u64 idx = 0;
      for (double f : w.frac) {
        u64 c = static_cast<u64>(f * static_cast<double>(M));
        if (c >= M) c = M - 1;
        idx = idx * M + c;
      }
      ++counts[idx];
    }
  }
  u64 best = static_cast<u64>(std::max_element(counts.begin(), counts.end()) - counts.begin());

  // pass 2: collect the fullest cube's members
  std::vector<u64> members;
  {
    Walker w(p.lambdas);
    for (u64 n = 1; n <= N; ++n) {
      w.step();
      if ((n & (w.refresh_interval - 1)) == 0) w.refresh(n);
      u64 idx = 0;
      for (double f : w.frac) {
        u64 c = static_cast<u64>(f * static_cast<double>(M));
        if (c >= M) c = M - 1;
        idx = idx * M + c;
      }
      if (idx == best) members.push_back(n);
    }
  }
  out.raw_candidates = static_cast<long>(members.size()) - 1;
  for (size_t i = 1; i < members.size(); ++i) {
    mpz_class n(static_cast<unsigned long>(members[i] - members[0]));
    double worst = 0;
    for (const auto& l : p.lambdas)
      worst = std::max(worst, fractional_distance(n, l));
    if (worst <= p.tolerance) {
      out.hits.push_back(std::move(n));
      out.max_fractional_error = std::max(out.max_fractional_error, worst);
    } else {
      out.all_verified = false;
    }
  }
  std::sort(out.hits.begin(), out.hits.end());
  return out;
}

LowestHit sync_lowest_in_range(const SyncProblem& p, const SyncResult& r,
                               std::optional<mpz_class> floor) {
  LowestHit out;
  if (floor) {
    out.floor_used = *floor;
  } else {
    mpz_root(out.floor_used.get_mpz_t(), p.N.get_mpz_t(), 3);
  }
  // counting argument: ceil(N/M^k) - 1 hits exist; if that exceeds the floor,
  // one of them lies above it.
  mpz_class mk;
  mpz_ui_pow_ui(mk.get_mpz_t(), static_cast<unsigned long>(p.M),
                static_cast<unsigned long>(p.k()));
  mpz_class guaranteed_hits = (p.N + mk - 1) / mk - 1;
  out.guaranteed = guaranteed_hits > out.floor_used;
  for (const auto& n : r.hits) {
    if (n >= out.floor_used) {
      out.n = n;
      break;
    }
  }
  if (!out.n) {
    out.note = "no hit found at or above floor " + out.floor_used.get_str() +
               " within N = " + p.N.get_str() + " (realized hits: " +
               std::to_string(r.hits.size()) + ", guarantee " +
               (out.guaranteed ? "held but search incomplete" : "was marginal") + ")";
  }
  return out;
}

double phase_reduce(const mpz_class& n, const mp::Real& gamma, const mpq_class& delta) {
  if (n < 0) throw DomainError("phase_reduce: n must be nonnegative");
  const int n_digits = static_cast<int>(mpz_sizeinbase(n.get_mpz_t(), 10));
  const int gamma_digits = static_cast<int>(static_cast<double>(gamma.prec()) / 3.3219280948873623);
  const int required = n_digits + 15;
  if (gamma_digits < required)
    throw PrecisionError("phase_reduce: gamma carries ~" + std::to_string(gamma_digits) +
                             " digits but n has " + std::to_string(n_digits) +
                             " digits; recompute the zero to at least " +
                             std::to_string(required) + " digits",
                         required);
  const mpfr_prec_t prec =
      gamma.prec() + static_cast<mpfr_prec_t>(mpz_sizeinbase(n.get_mpz_t(), 2)) + 64;

  mpz_class num = n * delta.get_num();
  mp::Real t(prec);
  mpfr_mul_z(t.raw(), gamma.raw(), num.get_mpz_t(), MPFR_RNDN);
  mp::Real den(prec);
  mpfr_set_z(den.raw(), delta.get_den().get_mpz_t(), MPFR_RNDN);
  t /= den;

  mp::Real two_pi = mp::mul_2exp(mp::Real::pi(prec), 1);
  mp::Real u = t / two_pi;
  mp::Real f = u - mp::floor(u);
  double out = (f * two_pi).to_double();
  if (out >= 2 * kPi) out = 0.0;
  if (out < 0) out = 0.0;
  return out;
}

}  // namespace apv
