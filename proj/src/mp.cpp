#include "apvar/mp.hpp"

#include <mutex>

namespace apv::mp {

std::string Real::str(int digits) const {
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*RNg", digits, v_);
  std::string out(buf);
  mpfr_free_str(buf);
  return out;
}

namespace {
using UnOp = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t);
Real un(UnOp op, const Real& a) {
  Real r(a.prec());
  op(r.raw(), a.raw(), MPFR_RNDN);
  return r;
}
}  // namespace

Real abs(const Real& a) { return un(mpfr_abs, a); }
Real sqrt(const Real& a) { return un(mpfr_sqrt, a); }
Real exp(const Real& a) { return un(mpfr_exp, a); }
Real log(const Real& a) { return un(mpfr_log, a); }
Real sin(const Real& a) { return un(mpfr_sin, a); }
Real cos(const Real& a) { return un(mpfr_cos, a); }

Real log_ui(unsigned long n, mpfr_prec_t prec) {
  Real r(prec);
  mpfr_set_ui(r.raw(), n, MPFR_RNDN);
  mpfr_log(r.raw(), r.raw(), MPFR_RNDN);
  return r;
}

void sin_cos(Real& s, Real& c, const Real& a) {
  mpfr_sin_cos(s.raw(), c.raw(), a.raw(), MPFR_RNDN);
}

Real atan2(const Real& y, const Real& x) {
  Real r(std::max(y.prec(), x.prec()));
  mpfr_atan2(r.raw(), y.raw(), x.raw(), MPFR_RNDN);
  return r;
}

Real floor(const Real& a) {
  Real r(a.prec());
  mpfr_floor(r.raw(), a.raw());
  return r;
}

Real pow_si(const Real& a, long e) {
  Real r(a.prec());
  mpfr_pow_si(r.raw(), a.raw(), e, MPFR_RNDN);
  return r;
}

Real mul_2exp(const Real& a, long e) {
  Real r(a.prec());
  mpfr_mul_2si(r.raw(), a.raw(), e, MPFR_RNDN);
  return r;
}

Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }

Complex operator*(const Complex& a, const Complex& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

Complex operator*(const Complex& a, const Real& b) { return {a.re * b, a.im * b}; }

Complex operator/(const Complex& a, const Complex& b) {
  Real d = norm(b);
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}

Complex operator/(const Complex& a, const Real& b) { return {a.re / b, a.im / b}; }

Complex neg(const Complex& a) { return {-a.re, -a.im}; }
Complex conj(const Complex& a) { return {a.re, -a.im}; }
Real norm(const Complex& a) { return a.re * a.re + a.im * a.im; }
Real abs(const Complex& a) { return sqrt(norm(a)); }

Complex cexp(const Complex& a) {
  Real m = exp(a.re);
  Real s(a.prec()), c(a.prec());
  sin_cos(s, c, a.im);
  return {m * c, m * s};
}

Complex clog(const Complex& a) {
  Real m(a.prec());
  mpfr_hypot(m.raw(), a.re.raw(), a.im.raw(), MPFR_RNDN);
  return {log(m), atan2(a.im, a.re)};
}

const std::vector<mpq_class>& bernoulli_even(int n_max) {
  static std::mutex mu;
  static std::vector<mpq_class> all;  // B_0, B_1, B_2, ... (all indices)
  static std::vector<mpq_class> even;
  std::lock_guard<std::mutex> lock(mu);
  int need = 2 * n_max + 1;
  if (static_cast<int>(all.size()) < need + 1) {
    if (all.empty()) all.push_back(1);  // B_0
    for (int n = static_cast<int>(all.size()); n <= need; ++n) {
      // B_n = -1/(n+1) * sum_{k=0}^{n-1} C(n+1, k) B_k
      mpq_class s = 0;
      for (int k = 0; k < n; ++k) {
        mpz_class binom;
        mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(n + 1),
                     static_cast<unsigned long>(k));
        s += mpq_class(binom) * all[static_cast<size_t>(k)];
      }
      mpq_class b = -s / (n + 1);
      b.canonicalize();
      all.push_back(b);
    }
    even.clear();
    for (size_t i = 0; i < all.size(); i += 2) even.push_back(all[i]);
  }
  return even;
}

}  // namespace apv::mp
