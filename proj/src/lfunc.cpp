#include "apvar/lfunc.hpp"

#include <cmath>
#include <numbers>

#include "apvar/errors.hpp"

namespace apv {

namespace {

constexpr double kPi = std::numbers::pi;

struct EMParams {
  long N;
  int J;
};

// Euler-Maclaurin cutoffs from the rigorous remainder bound
//   |R_J| <= 4 |(s)_{2J+1}| / ((2pi)^{2J+1} (sigma+2J) (N+alpha)^{sigma+2J}),
// plus a decay condition keeping the Bernoulli terms geometrically small.
EMParams choose_em(cpx s, double alpha, double eps_abs) {
  const double sigma = s.real(), t = std::abs(s.imag());
  const double log_eps = std::log(std::max(eps_abs, 1e-300));
  EMParams best{-1, -1};
  double best_cost = 1e300;
  for (int J : {4, 6, 8, 10, 12, 16, 20, 24, 28, 32, 40, 48, 64, 80, 96, 128}) {
    double m = sigma + 2.0 * J;
    if (m <= 0.5) continue;
    double logP = 0;
    for (int i = 0; i <= 2 * J; ++i)
      logP += 0.5 * std::log((sigma + i) * (sigma + i) + t * t);
    double rhs =
        (std::log(4.0) + logP - (2 * J + 1) * std::log(2 * kPi) - std::log(m) - log_eps) / m;
    if (rhs > 45.0) continue;
    double n_bound = std::exp(rhs) - alpha;
    double n_decay = (std::hypot(sigma, t) + 2.0 * J) / (2 * kPi) * 1.25 + 2 - alpha;
    long N = static_cast<long>(std::ceil(std::max({n_bound, n_decay, 1.0})));
    double cost = static_cast<double>(N) + 3.0 * J;
    if (cost < best_cost) {
      best_cost = cost;
      best = {N, J};
    }
  }
  if (best.N < 0) best = {4000, 128};
  return best;
}

// B_{2j} / (2j)! as doubles.
double bernoulli_factorial_coeff(int j) {
  static std::mutex mu;
  static std::vector<double> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (j >= static_cast<int>(cache.size())) {
    const auto& bern = mp::bernoulli_even(j + 8);
    cache.clear();
    mpz_class f = 1;  // (2i)!
    for (int i = 0; i <= j + 8; ++i) {
      if (i > 0)
        for (int k = 2 * i - 1; k <= 2 * i; ++k) f *= k;
      mpq_class v = bern[static_cast<size_t>(i)] / mpq_class(f);
      v.canonicalize();
      cache.push_back(v.get_d());
    }
  }
  return cache[static_cast<size_t>(j)];
}

}  // namespace

cpx hurwitz_d(cpx s, double alpha, double eps_abs) {
  if (s == cpx(1.0, 0.0)) throw DomainError("hurwitz_d: pole at s = 1");
  auto [N, J] = choose_em(s, alpha, eps_abs);
  cpx sum(0, 0);
  for (long k = 0; k < N; ++k) {
    double lk = std::log(static_cast<double>(k) + alpha);
    sum += std::exp(-s * lk);
  }
  const double w = static_cast<double>(N) + alpha;
  const cpx wms = std::exp(-s * std::log(w));
  sum += wms * w / (s - cpx(1.0, 0.0));
  sum += wms * 0.5;
  const double w2 = w * w;
  cpx term = s * (wms / w);  // (s)_1 * w^(-s-1)
  for (int j = 1; j <= J; ++j) {
    sum += bernoulli_factorial_coeff(j) * term;
    term *= (s + cpx(2.0 * j - 1.0, 0)) * (s + cpx(2.0 * j, 0)) / w2;
  }
  return sum;
}

cpx lgamma_d(cpx z) {
  // Stirling after shifting to |w| >= 12, Re w >= 3.
  cpx shift_log(0, 0);
  int m = 0;
  while (std::abs(z + cpx(m, 0)) < 12.0 || (z.real() + m) < 3.0) {
    shift_log += std::log(z + cpx(m, 0));
    ++m;
    if (m > 64) break;
  }
  cpx w = z + cpx(m, 0);
  cpx lw = std::log(w);
  cpx out = (w - cpx(0.5, 0)) * lw - w + 0.5 * std::log(2 * kPi);
  cpx winv = 1.0 / w;
  cpx winv2 = winv * winv;
  cpx pw = winv;
  const auto& bern = mp::bernoulli_even(14);
  for (int j = 1; j <= 12; ++j) {
    double c = bern[static_cast<size_t>(j)].get_d() / ((2.0 * j) * (2.0 * j - 1.0));
    out += c * pw;
    pw *= winv2;
  }
  return out - shift_log;
}

// ---------------------------------------------------------------------------
// mpfr lane
// ---------------------------------------------------------------------------

namespace {

// Cache of log(n) at a given precision; shared across evaluators.
class IntLogCache {
 public:
  mp::Real get(u64 n, mpfr_prec_t prec) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(prec, n);
    auto it = map_.find(key);
    if (it != map_.end()) return it->second;
    if (map_.size() > 400000) map_.clear();
    mp::Real v(prec);
    mpfr_set_ui(v.raw(), static_cast<unsigned long>(n), MPFR_RNDN);
    mpfr_log(v.raw(), v.raw(), MPFR_RNDN);
    auto [pos, _] = map_.emplace(key, v);
    return pos->second;
  }

 private:
  std::mutex mu_;
  std::map<std::pair<mpfr_prec_t, u64>, mp::Real> map_;
};

IntLogCache& int_log_cache() {
  static IntLogCache c;
  return c;
}

// B_{2j}/(2j)! at precision `prec`.
mp::Real bernoulli_coeff_mp(int j, mpfr_prec_t prec) {
  const auto& bern = mp::bernoulli_even(j + 1);
  mpz_class f = 1;
  for (int i = 2; i <= 2 * j; ++i) f *= i;
  mpq_class v = bern[static_cast<size_t>(j)] / mpq_class(f);
  v.canonicalize();
  return mp::Real::of_mpq(v, prec);
}

// zeta(s, a/q) in mpfr; s away from 1.
mp::Complex hurwitz_mp(const mp::Complex& s, u64 a, u64 q, int digits) {
  const mpfr_prec_t prec = mp::bits_for_digits(digits) + 40;
  const cpx sd(s.real_d(), s.imag_d());
  const double alpha = static_cast<double>(a) / static_cast<double>(q);
  const double eps =
      std::pow(10.0, -(digits + 8)) * std::max(1.0, std::pow(static_cast<double>(q), sd.real()));
  auto [N, J] = choose_em(sd, alpha, eps);

  auto& logs = int_log_cache();
  const mp::Real log_q = logs.get(q, prec);

  mp::Complex sum(prec);
  mp::Complex ms = neg(s);
  for (long k = 0; k < N; ++k) {
    // (k + a/q)^(-s) = exp(-s (log(kq+a) - log q))
    mp::Real lk = logs.get(static_cast<u64>(k) * q + a, prec) - log_q;
    sum = sum + mp::cexp(ms * lk);
  }
  mp::Real lw = logs.get(static_cast<u64>(N) * q + a, prec) - log_q;
  mp::Real w = mp::Real::of_mpq(
      mpq_class(static_cast<unsigned long>(static_cast<u64>(N) * q + a),
                static_cast<unsigned long>(q)),
      prec);
  mp::Complex wms = mp::cexp(ms * lw);
  mp::Complex one(prec);
  mpfr_set_ui(one.re.raw(), 1, MPFR_RNDN);
  sum = sum + (wms * w) / (s - one);
  sum = sum + wms * mp::Real::of(0.5, prec);

  mp::Real w2 = w * w;
  mp::Complex term = (s * wms) / w;
  for (int j = 1; j <= J; ++j) {
    sum = sum + term * bernoulli_coeff_mp(j, prec);
    mp::Complex f1 = s;
    mpfr_add_ui(f1.re.raw(), f1.re.raw(), static_cast<unsigned long>(2 * j - 1), MPFR_RNDN);
    mp::Complex f2 = s;
    mpfr_add_ui(f2.re.raw(), f2.re.raw(), static_cast<unsigned long>(2 * j), MPFR_RNDN);
    term = (term * (f1 * f2)) / w2;
  }
  return sum;
}

// log Gamma(z) in mpfr (value exact modulo 2 pi i).
mp::Complex lgamma_mp(const mp::Complex& z, int digits) {
  const mpfr_prec_t prec = mp::bits_for_digits(digits) + 40;
  const double need = std::max(14.0, 0.55 * digits);
  mp::Complex shift(prec);
  mp::Complex w = z;
  int m = 0;
  while (std::hypot(w.real_d(), w.imag_d()) < need || w.real_d() < 3.0) {
    shift = shift + mp::clog(w);
    mpfr_add_ui(w.re.raw(), w.re.raw(), 1, MPFR_RNDN);
    if (++m > 400) break;
  }
  mp::Complex lw = mp::clog(w);
  mp::Complex half(prec);
  mpfr_set_d(half.re.raw(), 0.5, MPFR_RNDN);
  mp::Complex out = (w - half) * lw - w;
  mp::Real two_pi = mp::mul_2exp(mp::Real::pi(prec), 1);
  out.re += mp::mul_2exp(mp::log(two_pi), -1);

  mp::Complex winv2(prec);
  {
    mp::Complex one(prec);
    mpfr_set_ui(one.re.raw(), 1, MPFR_RNDN);
    winv2 = one / (w * w);
  }
  mp::Complex pw = winv2 * w;  // 1/w
  const double eps = std::pow(10.0, -(digits + 6));
  for (int j = 1; j <= 120; ++j) {
    const auto& bern = mp::bernoulli_even(j + 1);
    mpq_class c = bern[static_cast<size_t>(j)] / mpq_class(2 * j * (2 * j - 1));
    c.canonicalize();
    mp::Complex term = pw * mp::Real::of_mpq(c, prec);
    out = out + term;
    double mag = std::hypot(term.real_d(), term.imag_d());
    if (mag < eps && j >= 4) break;
    pw = pw * winv2;
  }
  return out - shift;
}

}  // namespace

LEvaluator::LEvaluator(const DirichletCharacter& chi_primitive, LfuncLimits limits)
    : chi_(chi_primitive), limits_(limits), q_(chi_primitive.modulus()) {
  if (!chi_.is_primitive())
    throw DomainError("LEvaluator: character must be primitive; pass primitive_inducing(chi)");
  parity_ = chi_.parity();
  chi_vals_.resize(q_);
  chi_exps_.assign(q_, -1);
  for (u64 a = 0; a < q_; ++a) {
    chi_vals_[a] = chi_(static_cast<i64>(a));
    auto t = chi_.value_exponent(static_cast<i64>(a));
    if (t) chi_exps_[a] = static_cast<long long>(*t);
  }
  if (q_ == 1) {
    eps_d_ = cpx(1, 0);
  } else {
    cpx tau = gauss_sum(chi_);
    cpx ia = (parity_ == 0) ? cpx(1, 0) : cpx(0, 1);
    eps_d_ = tau / (ia * std::sqrt(static_cast<double>(q_)));
  }
  sqrt_eps_inv_d_ = std::exp(cpx(0, -0.5 * std::arg(eps_d_)));
}

cpx LEvaluator::L_d(cpx s) const {
  if (std::abs(s.imag()) > limits_.height_ceiling)
    throw CapacityError("L_d: |Im s| exceeds the configured height ceiling");
  const double eps = 1e-17 * std::max(1.0, std::pow(static_cast<double>(q_), s.real())) /
                     static_cast<double>(q_);
  if (q_ == 1) return hurwitz_d(s, 1.0, eps);
  cpx sum(0, 0);
  for (u64 a = 1; a <= q_; ++a) {
    if (chi_exps_[a % q_] < 0) continue;
    sum += chi_vals_[a % q_] * hurwitz_d(s, static_cast<double>(a) / q_, eps);
  }
  return sum * std::exp(-s * std::log(static_cast<double>(q_)));
}

cpx LEvaluator::L_conj_d(cpx s) const {
  if (q_ == 1) return L_d(s);
  const double eps = 1e-17 * std::max(1.0, std::pow(static_cast<double>(q_), s.real())) /
                     static_cast<double>(q_);
  cpx sum(0, 0);
  for (u64 a = 1; a <= q_; ++a) {
    if (chi_exps_[a % q_] < 0) continue;
    sum += std::conj(chi_vals_[a % q_]) * hurwitz_d(s, static_cast<double>(a) / q_, eps);
  }
  return sum * std::exp(-s * std::log(static_cast<double>(q_)));
}

double LEvaluator::Z_d(double t) const {
  cpx s(0.5, t);
  cpx z = (s + cpx(parity_, 0)) / 2.0;
  double phase = 0.5 * t * std::log(static_cast<double>(q_) / kPi) + lgamma_d(z).imag();
  cpx val = sqrt_eps_inv_d_ * std::exp(cpx(0, phase)) * L_d(s);
  return val.real();
}

cpx LEvaluator::contour_value_d(cpx s) const {
  if (s.real() >= 0.5) {
    cpx z = (s + cpx(parity_, 0)) / 2.0;
    double phase =
        0.5 * s.imag() * std::log(static_cast<double>(q_) / kPi) + lgamma_d(z).imag();
    return std::exp(cpx(0, phase)) * L_d(s);
  }
  // Lambda(s, chi) = eps(chi) * Lambda(1-s, conj chi); evaluate the right side.
  cpx s1 = cpx(1, 0) - s;
  cpx z = (s1 + cpx(parity_, 0)) / 2.0;
  double phase =
      0.5 * s1.imag() * std::log(static_cast<double>(q_) / kPi) + lgamma_d(z).imag();
  return eps_d_ * std::exp(cpx(0, phase)) * L_conj_d(s1);
}

mp::Complex LEvaluator::L_mp(const mp::Complex& s, int digits) const {
  if (digits > limits_.max_digits)
    throw PrecisionError("L_mp: requested digits exceed the configured cap of " +
                             std::to_string(limits_.max_digits),
                         limits_.max_digits);
  if (std::abs(s.imag_d()) > limits_.height_ceiling)
    throw CapacityError("L_mp: |Im s| exceeds the configured height ceiling");
  const mpfr_prec_t prec = mp::bits_for_digits(digits) + 40;
  if (q_ == 1) return hurwitz_mp(s, 1, 1, digits);
  mp::Complex sum(prec);
  mp::Real two_pi = mp::mul_2exp(mp::Real::pi(prec), 1);
  const u64 L = chi_.context().exponent();
  for (u64 a = 1; a <= q_; ++a) {
    if (chi_exps_[a % q_] < 0) continue;
    mp::Complex h = hurwitz_mp(s, a, q_, digits);
    // chi(a) = e(t/L) exactly
    mpq_class frac(static_cast<unsigned long>(chi_exps_[a % q_]),
                   static_cast<unsigned long>(L));
    frac.canonicalize();
    mp::Real ang = mp::Real::of_mpq(frac, prec) * two_pi;
    mp::Real cs(prec), sn(prec);
    mp::sin_cos(sn, cs, ang);
    sum = sum + mp::Complex(cs, sn) * h;
  }
  // q^(-s)
  mp::Real lq = mp::log_ui(static_cast<unsigned long>(q_), prec);
  return sum * mp::cexp(neg(s) * lq);
}

mp::Complex LEvaluator::root_phase_mp(int digits) const {
  std::lock_guard<std::mutex> lock(mp_mu_);
  auto it = sqrt_eps_inv_mp_.find(digits);
  if (it != sqrt_eps_inv_mp_.end()) return *it->second;
  const mpfr_prec_t prec = mp::bits_for_digits(digits) + 40;
  mp::Complex out(prec);
  if (q_ == 1) {
    mpfr_set_ui(out.re.raw(), 1, MPFR_RNDN);
  } else {
    mp::Real two_pi = mp::mul_2exp(mp::Real::pi(prec), 1);
    const u64 L = chi_.context().exponent();
    mp::Real tre(prec), tim(prec);
    mpfr_set_zero(tre.raw(), 1);
    mpfr_set_zero(tim.raw(), 1);
    for (u64 a = 1; a < q_; ++a) {
      if (chi_exps_[a] < 0) continue;
      mpq_class frac(static_cast<unsigned long>(chi_exps_[a]), static_cast<unsigned long>(L));
      frac += mpq_class(static_cast<unsigned long>(a), static_cast<unsigned long>(q_));
      frac.canonicalize();
      mp::Real ang = mp::Real::of_mpq(frac, prec) * two_pi;
      mp::Real cs(prec), sn(prec);
      mp::sin_cos(sn, cs, ang);
      tre += cs;
      tim += sn;
    }
    // arg eps = arg tau - parity * pi/2; we need e^(-i arg(eps)/2)
    mp::Real arg_tau = mp::atan2(tim, tre);
    if (parity_ == 1) arg_tau -= mp::mul_2exp(mp::Real::pi(prec), -1);
    mp::Real half_arg = mp::mul_2exp(arg_tau, -1);
    mp::Real cs(prec), sn(prec);
    mp::sin_cos(sn, cs, half_arg);
    out = mp::Complex(cs, -sn);
  }
  auto shared = std::make_shared<const mp::Complex>(out);
  sqrt_eps_inv_mp_.emplace(digits, shared);
  return *shared;
}

mp::Real LEvaluator::Z_mp(const mp::Real& t, int digits) const {
  const mpfr_prec_t prec = mp::bits_for_digits(digits) + 40;
  mp::Complex s(prec);
  mpfr_set_d(s.re.raw(), 0.5, MPFR_RNDN);
  mpfr_set(s.im.raw(), t.raw(), MPFR_RNDN);
  mp::Complex L = L_mp(s, digits);
  mp::Complex z(prec);
  mpfr_set_d(z.re.raw(), 0.5 * (0.5 + parity_), MPFR_RNDN);
  mpfr_div_ui(z.im.raw(), t.raw(), 2, MPFR_RNDN);
  mp::Complex lg = lgamma_mp(z, digits);
  // phase = (t/2) log(q/pi) + Im lgamma
  mp::Real lqpi = mp::log_ui(static_cast<unsigned long>(q_), prec) - mp::log(mp::Real::pi(prec));
  mp::Real phase = mp::mul_2exp(t, -1) * lqpi + lg.im;
  mp::Real cs(prec), sn(prec);
  mp::sin_cos(sn, cs, phase);
  mp::Complex val = root_phase_mp(digits) * mp::Complex(cs, sn) * L;
  return val.re;
}

mp::Complex evaluate_L(const DirichletCharacter& chi_primitive, const mp::Complex& s,
                       int digits) {
  LEvaluator ev(chi_primitive);
  return ev.L_mp(s, digits);
}

// ---------------------------------------------------------------------------
// argument-principle rectangle count
// ---------------------------------------------------------------------------

namespace {

struct WindState {
  double total = 0;
  bool ok = true;
  long evals = 0;
};

void wind_step(const LEvaluator& ev, cpx s1, cpx w1, cpx s2, cpx w2, int depth,
               WindState& st) {
  if (!st.ok) return;
  if (std::abs(w1) < 1e-280 || std::abs(w2) < 1e-280) {
    st.ok = false;
    return;
  }
  double d = std::arg(w2 / w1);
  if (std::abs(d) <= 1.8) {
    st.total += d;
    return;
  }
  if (depth >= 46) {
    st.ok = false;
    return;
  }
  cpx sm = 0.5 * (s1 + s2);
  cpx wm = ev.contour_value_d(sm);
  ++st.evals;
  wind_step(ev, s1, w1, sm, wm, depth + 1, st);
  wind_step(ev, sm, wm, s2, w2, depth + 1, st);
}

}  // namespace

long rectangle_zero_count(const LEvaluator& ev, double T) {
  const cpx corners[4] = {cpx(2, -T), cpx(2, T), cpx(-1, T), cpx(-1, -T)};
  WindState st;
  for (int e = 0; e < 4 && st.ok; ++e) {
    cpx a = corners[e], b = corners[(e + 1) % 4];
    double len = std::abs(b - a);
    double step = (e % 2 == 0) ? 0.2 : 0.25;  // vertical edges first/third
    int n = std::max(2, static_cast<int>(std::ceil(len / step)));
    cpx prev_s = a;
    cpx prev_w = ev.contour_value_d(a);
    for (int i = 1; i <= n && st.ok; ++i) {
      cpx s = a + (b - a) * (static_cast<double>(i) / n);
      cpx w = ev.contour_value_d(s);
      wind_step(ev, prev_s, prev_w, s, w, 0, st);
      prev_s = s;
      prev_w = w;
    }
  }
  if (!st.ok) return -1;
  double turns = st.total / (2 * kPi);
  long rounded = std::lround(turns);
  if (std::abs(turns - static_cast<double>(rounded)) > 0.05) return -1;
  return rounded + (ev.conductor() == 1 ? 2 : 0);
}

long rectangle_zero_count_nudged(const LEvaluator& ev, double* T, int max_nudges) {
  double t = *T;
  for (int i = 0; i <= max_nudges; ++i) {
    long n = rectangle_zero_count(ev, t);
    if (n >= 0) {
      *T = t;
      return n;
    }
    t += 0.0037 * (i + 1);
  }
  throw CapacityError("rectangle_zero_count: contour could not be resolved near T = " +
                      std::to_string(*T));
}

}  // namespace apv
