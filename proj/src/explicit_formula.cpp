#include "apvar/explicit_formula.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "apvar/errors.hpp"

namespace apv {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCentralThreshold = 1e-8;

const ZeroSet& set_for(const ZeroSetMap& sets, const DirichletCharacter& star,
                       double T, bool allow_unverified) {
  auto it = sets.find({star.modulus(), star.label()});
  if (it == sets.end())
    throw DomainError("explicit formula: missing zero set for conductor " +
                      std::to_string(star.modulus()) + " label " + star.label());
  const ZeroSet& s = it->second;
  if (s.height + 1e-9 < T)
    throw DomainError("explicit formula: zero set for conductor " +
                      std::to_string(star.modulus()) + " covers height " +
                      std::to_string(s.height) + " < required T = " + std::to_string(T));
  if (s.status != ZeroSetStatus::verified && !allow_unverified)
    throw DomainError(
        "explicit formula: zero set for conductor " + std::to_string(star.modulus()) +
        " label " + star.label() +
        (s.status == ZeroSetStatus::ingested
             ? " is ingested-only; re-verify it or pass allow_unverified"
             : " is unverified; refine the grid or pass allow_unverified"));
  return s;
}

}  // namespace

std::vector<ZeroTerm> flatten_family_zeros(const EFParams& params, const ZeroSetMap& sets,
                                           bool allow_unverified, bool* central_flag) {
  std::vector<ZeroTerm> out;
  bool central = false;
  for (const auto& chi : params.family.characters()) {
    auto star = primitive_inducing(chi);
    const ZeroSet& s = set_for(sets, star, params.T, allow_unverified);
    for (const auto& z : s.zeros) {
      double g = z.gamma_d();
      if (g > params.T) break;
      if (g < kCentralThreshold) {
        central = true;
        out.push_back({g, 0.5});
      } else {
        out.push_back({g, 1.0});
      }
    }
  }
  if (central_flag) *central_flag = central;
  return out;
}

std::vector<mp::Real> flatten_family_gammas_mp(const EFParams& params,
                                               const ZeroSetMap& sets,
                                               bool allow_unverified) {
  std::vector<mp::Real> out;
  for (const auto& chi : params.family.characters()) {
    auto star = primitive_inducing(chi);
    const ZeroSet& s = set_for(sets, star, params.T, allow_unverified);
    for (const auto& z : s.zeros) {
      if (z.gamma_d() > params.T) break;
      out.push_back(z.gamma);
    }
  }
  return out;
}

BudgetItems budget_items(const EFParams& params, std::optional<double> y) {
  const double q = static_cast<double>(params.family.q);
  const double d = params.delta_d();
  const double T = params.T;
  const double phi_F = static_cast<double>(params.family.phi_F);
  BudgetItems b;
  b.truncation = std::log(q * T) / (d * T);
  b.conductor = (params.family.E_q / phi_F + 1.0) * std::abs(std::log(T * d));
  if (y && *y < 1400.0) b.secondary = *y * std::log(q) / std::exp(0.5 * *y);
  b.phase = std::log(q * T) * std::log(T) / params.M;
  b.delta_term = std::sqrt(d) * std::log(q * T);
  b.multiplicity = std::log(q) / std::log(std::log(q));
  return b;
}

namespace {

struct TermWeights {
  // term(theta) = Re[V e^{i theta}] with V = (cos(d g) + 2 i sin(d g)/d) * e^{i d g} / rho^2
  cpx V;
  double weight;
};

std::vector<TermWeights> make_term_weights(const std::vector<ZeroTerm>& zeros, double d) {
  std::vector<TermWeights> out;
  out.reserve(zeros.size());
  for (const auto& z : zeros) {
    double g = z.gamma;
    cpx rho2(0.25 - g * g, g);  // (1/2 + i g)^2
    cpx c1c2(std::cos(d * g), 2.0 * std::sin(d * g) / d);
    cpx V = c1c2 * std::exp(cpx(0, d * g)) / rho2;
    out.push_back({V, z.weight});
  }
  return out;
}

EFValue r_from_phases(const EFParams& params, const std::vector<ZeroTerm>& zeros,
                      const std::vector<double>& phases, bool central) {
  const double d = params.delta_d();
  double R = 0;
  for (size_t i = 0; i < zeros.size(); ++i) {
    double g = zeros[i].gamma;
    cpx rho2(0.25 - g * g, g);
    cpx z = std::exp(cpx(0, phases[i])) / rho2;
    double term = std::cos(d * g) * z.real() - (2.0 * std::sin(d * g) / d) * z.imag();
    R -= zeros[i].weight * term;
  }
  EFValue v;
  v.R_normalized = R;
  v.R_lower = R;
  v.R_upper = R;
  v.central_zero_flag = central;
  const double q = static_cast<double>(params.family.q);
  v.main_term_prediction =
      -0.5 * static_cast<double>(params.family.phi_F) * std::log(q * q / d);
  return v;
}

}  // namespace

EFValue r_delta(const EFParams& params, double y, const ZeroSetMap& sets,
                bool allow_unverified) {
  bool central = false;
  auto zeros = flatten_family_zeros(params, sets, allow_unverified, &central);
  std::vector<double> phases(zeros.size());
  for (size_t i = 0; i < zeros.size(); ++i) phases[i] = y * zeros[i].gamma;
  EFValue v = r_from_phases(params, zeros, phases, central);
  v.y = y;
  v.y_repr = std::to_string(y);
  v.budget = budget_items(params, y);
  return v;
}

EFValue r_delta_big(const EFParams& params, const mpz_class& n, const ZeroSetMap& sets,
                    const std::vector<mp::Real>& gammas_mp, bool allow_unverified) {
  bool central = false;
  auto zeros = flatten_family_zeros(params, sets, allow_unverified, &central);
  if (gammas_mp.size() != zeros.size())
    throw DomainError("r_delta_big: gamma list does not match the flattened zero list");
  mpz_class n1 = n + 1;
  std::vector<double> phases(zeros.size());
  for (size_t i = 0; i < zeros.size(); ++i)
    phases[i] = phase_reduce(n1, gammas_mp[i], params.delta);
  EFValue v = r_from_phases(params, zeros, phases, central);
  v.y_repr = "(" + n.get_str() + "+1) * " + params.delta.get_num().get_str() + "/" +
             params.delta.get_den().get_str();
  v.budget = budget_items(params, std::nullopt);
  return v;
}

EFValue r_delta_certified(const EFParams& params, double phase_halfwidth,
                          const ZeroSetMap& sets, bool allow_unverified) {
  bool central = false;
  auto zeros = flatten_family_zeros(params, sets, allow_unverified, &central);
  auto weights = make_term_weights(zeros, params.delta_d());
  double r_up = 0, r_down = 0, r_center = 0;
  for (const auto& tw : weights) {
    double A = std::abs(tw.V);
    double phi0 = std::arg(tw.V);
    double lo_angle = std::max(0.0, std::abs(phi0) - phase_halfwidth);
    double hi_angle = std::min(kPi, std::abs(phi0) + phase_halfwidth);
    double term_max = A * std::cos(lo_angle);
    double term_min = A * std::cos(hi_angle);
    r_up -= tw.weight * term_min;    // least-aligned phases
    r_down -= tw.weight * term_max;  // most-aligned phases
    r_center -= tw.weight * A * std::cos(phi0);
  }
  EFValue v;
  v.R_normalized = r_center;  // exact alignment (theta = 0 for every zero)
  v.R_lower = r_down;
  v.R_upper = r_up;
  v.central_zero_flag = central;
  const double q = static_cast<double>(params.family.q);
  v.main_term_prediction =
      -0.5 * static_cast<double>(params.family.phi_F) * std::log(q * q / params.delta_d());
  v.budget = budget_items(params, std::nullopt);
  v.y_repr = "certified interval over all synchronized y";
  return v;
}

EFValue s_delta_prime_side(const EFParams& params, double y, const SieveOptions& sieve) {
  const double d = params.delta_d();
  const u64 q = params.family.q;
  const double x_lo = std::exp(y - d);
  const double x_hi = std::exp(y + d);
  if (x_hi > static_cast<double>(sieve.ceiling))
    throw CapacityError("s_delta_prime_side: e^{y+delta} = " + std::to_string(x_hi) +
                        " exceeds the sieve ceiling; use the zero-side mode for large y");

  auto chars = params.family.characters();
  bool has_principal = false;
  for (const auto& c : chars) has_principal |= c.is_principal();

  // starting values at x_lo (empty sums below 2)
  cpx theta0(0, 0), psi0(0, 0);
  if (x_lo >= 2.0) {
    auto tally = sieve_tally(x_lo, q, sieve);
    for (const auto& c : chars) {
      auto cs = character_sum(c, tally);
      theta0 += cs.theta;
      psi0 += cs.psi;
    }
  }

  // jump events in (x_lo, x_hi]: primes for theta, prime powers for psi
  struct Jump {
    double t;
    cpx dtheta, dpsi;
  };
  std::vector<Jump> jumps;
  u64 lo_int = static_cast<u64>(std::floor(x_lo)) + 1;
  u64 hi_int = static_cast<u64>(std::floor(x_hi));
  for_primes_in(lo_int, hi_int, [&](u64 p) {
    double lp = std::log(static_cast<double>(p));
    cpx v(0, 0);
    for (const auto& c : chars) v += c(static_cast<i64>(p % q));
    jumps.push_back({lp, v * lp, v * lp});
  });
  // prime powers p^k, k >= 2
  u64 root = static_cast<u64>(std::sqrt(x_hi)) + 2;
  for (u32 p : simple_primes(static_cast<u32>(root))) {
    u64 pk = static_cast<u64>(p) * p;
    while (pk <= hi_int) {
      if (pk >= lo_int) {
        double lp = std::log(static_cast<double>(p));
        cpx v(0, 0);
        for (const auto& c : chars) v += c(static_cast<i64>(pk % q));
        jumps.push_back({std::log(static_cast<double>(pk)), cpx(0, 0), v * lp});
      }
      if (pk > hi_int / p) break;
      pk *= p;
    }
  }
  std::sort(jumps.begin(), jumps.end(),
            [](const Jump& a, const Jump& b) { return a.t < b.t; });

  // closed-form piecewise integration over t in [y-d, y+d]
  cpx int_theta(0, 0), int_psi(0, 0);
  double t_prev = y - d;
  cpx cur_theta = theta0, cur_psi = psi0;
  for (const auto& j : jumps) {
    double t = std::min(j.t, y + d);
    if (t > t_prev) {
      int_theta += cur_theta * (t - t_prev);
      int_psi += cur_psi * (t - t_prev);
      t_prev = t;
    }
    cur_theta += j.dtheta;
    cur_psi += j.dpsi;
  }
  int_theta += cur_theta * (y + d - t_prev);
  int_psi += cur_psi * (y + d - t_prev);
  if (has_principal) {
    double exp_part = std::exp(y + d) - std::exp(y - d);
    int_theta -= cpx(exp_part, 0);
    int_psi -= cpx(exp_part, 0);
  }

  const double scale = 1.0 / (2.0 * d * std::exp(0.5 * y));
  EFValue v;
  v.y = y;
  v.y_repr = std::to_string(y);
  v.S_normalized = int_theta.real() * scale;
  v.R_prime_side = int_psi.real() * scale;
  v.imag_residue = std::max(std::abs(int_theta.imag()), std::abs(int_psi.imag())) * scale;
  const double qd = static_cast<double>(q);
  v.main_term_prediction =
      -0.5 * static_cast<double>(params.family.phi_F) * std::log(qd * qd / d);
  v.budget = budget_items(params, y);
  return v;
}

ExplicitPsi truncated_explicit_psi(const DirichletCharacter& chi, double x, double T,
                                   const ZeroSetMap& sets, bool allow_unverified,
                                   bool with_sieve, const SieveOptions& sieve) {
  auto star = primitive_inducing(chi);
  auto star_bar = star.conjugate();
  const ZeroSet& zs = set_for(sets, star, T, allow_unverified);
  const ZeroSet& zs_bar = set_for(sets, star_bar, T, allow_unverified);

  // dodge jump discontinuities: x exactly at a prime power moves to x - 1/2
  double xe = x;
  {
    u64 xi = static_cast<u64>(std::llround(x));
    if (std::abs(x - static_cast<double>(xi)) < 1e-9 && xi >= 2) {
      u64 m = xi;
      u64 p = 2;
      while (p * p <= m) {
        if (m % p == 0) {
          while (m % p == 0) m /= p;
          break;
        }
        ++p;
      }
      bool prime_power = (m == 1) || (m == xi);  // xi = p^k or xi prime
      if (prime_power) xe = x - 0.5;
    }
  }

  const double sx = std::sqrt(xe);
  const double lx = std::log(xe);
  cpx sum(0, 0);
  for (const auto& z : zs.zeros) {
    double g = z.gamma_d();
    if (g > T) break;
    double w = g < kCentralThreshold ? 0.5 : 1.0;
    cpx rho(0.5, g);
    sum += w * std::exp(cpx(0, g * lx)) / rho;
  }
  for (const auto& z : zs_bar.zeros) {
    double g = z.gamma_d();
    if (g > T) break;
    double w = g < kCentralThreshold ? 0.5 : 1.0;
    cpx rho(0.5, -g);
    sum += w * std::exp(cpx(0, -g * lx)) / rho;
  }
  cpx zero_sum = -sx * sum;

  // imprimitivity correction: psi(x,chi) = psi(x,chi*) - sum_{p|q} chi*(p^k) log p
  const u64 limit = static_cast<u64>(std::floor(xe));
  for (auto [p, e] : chi.context().factorization()) {
    if (p > limit) continue;
    double lp = std::log(static_cast<double>(p));
    u64 pk = p;
    while (pk <= limit) {
      zero_sum -= star(static_cast<i64>(pk % star.modulus())) * lp;
      if (pk > limit / p) break;
      pk *= p;
    }
  }

  ExplicitPsi out;
  out.zero_sum = zero_sum;
  const double qd = static_cast<double>(chi.modulus());
  out.budget = xe * std::pow(std::log(qd * xe * T), 2) / T + std::log(qd * xe);
  if (with_sieve) {
    auto tally = sieve_tally(xe, chi.modulus(), sieve);
    out.sieved = character_sum(chi, tally).psi;
  }
  return out;
}

ZeroSumMainTerm zero_sum_main_term(const EFParams& params, const ZeroSetMap& sets,
                                   bool allow_unverified) {
  const double d = params.delta_d();
  if (!(d > 0) || d > std::exp(-1.0))
    throw DomainError("zero_sum_main_term: requires 0 < delta <= 1/e");
  if (params.T * d < std::exp(1.0) - 1e-12)
    throw DomainError("zero_sum_main_term: requires T >= e/delta");
  auto zeros = flatten_family_zeros(params, sets, allow_unverified, nullptr);
  double lhs = 0;
  for (const auto& z : zeros) {
    double g = z.gamma;
    if (g < 1e-30) continue;  // the integrand vanishes at gamma = 0
    double rho4 = (0.25 + g * g) * (0.25 + g * g);
    double s = std::sin(d * g) / (d * g);
    lhs += z.weight * 2.0 * g * g * g * g / rho4 * s * s;
  }
  lhs *= d;
  ZeroSumMainTerm out;
  out.lhs = lhs;
  const double q = static_cast<double>(params.family.q);
  out.prediction = 0.5 * static_cast<double>(params.family.phi_F) * std::log(q / d);
  out.ratio = lhs / out.prediction;
  out.items = budget_items(params, std::nullopt);
  return out;
}

FinalRPrediction final_r_prediction(const EFParams& params, std::optional<double> y) {
  FinalRPrediction out;
  const double q = static_cast<double>(params.family.q);
  out.prediction =
      -0.5 * static_cast<double>(params.family.phi_F) * std::log(q * q / params.delta_d());
  out.items = budget_items(params, y);
  return out;
}

double s_minus_r_budget(const EFParams& params, double y) {
  const double q = static_cast<double>(params.family.q);
  const double d = params.delta_d();
  const double phi_F = static_cast<double>(params.family.phi_F);
  // psi-theta gap: (1/2delta) int e^{t/2} dt / e^{y/2} = (2/delta) sinh(delta/2),
  // with the Rosser-Schoenfeld constant 1.4262 for psi - theta < 1.4262 sqrt(x).
  double psi_theta = 1.4262 * (2.0 / d) * std::sinh(0.5 * d);
  double tail = 5.0 * std::log(q * params.T) / (d * params.T);
  double finite_y = 2.0 * (1.0 + y * std::log(q)) / std::exp(0.5 * y);
  double delta_expansion = 2.0 * d * std::log(q);
  return phi_F * (psi_theta + tail + finite_y + delta_expansion);
}

}  // namespace apv
