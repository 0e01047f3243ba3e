#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <string>
#include <utility>
#include <vector>

namespace apv::mp {

inline mpfr_prec_t bits_for_digits(int digits) {
  return static_cast<mpfr_prec_t>(digits * 3.3219280948873623 + 16);
}

// Thin RAII wrapper over mpfr_t.  Binary operations return a value carrying
// the larger of the operand precisions; rounding is always to nearest.
class Real {
 public:
  explicit Real(mpfr_prec_t prec = 64) { mpfr_init2(v_, prec); }
  Real(const Real& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Real(Real&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }
  Real& operator=(const Real& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }
  mpfr_prec_t prec() const { return mpfr_get_prec(v_); }

  static Real of(double x, mpfr_prec_t prec) {
    Real r(prec);
    mpfr_set_d(r.v_, x, MPFR_RNDN);
    return r;
  }
  static Real of_int(long x, mpfr_prec_t prec) {
    Real r(prec);
    mpfr_set_si(r.v_, x, MPFR_RNDN);
    return r;
  }
  static Real of_mpz(const mpz_class& z, mpfr_prec_t prec) {
    Real r(prec);
    mpfr_set_z(r.v_, z.get_mpz_t(), MPFR_RNDN);
    return r;
  }
  static Real of_mpq(const mpq_class& q, mpfr_prec_t prec) {
    Real r(prec);
    mpfr_set_q(r.v_, q.get_mpq_t(), MPFR_RNDN);
    return r;
  }
  static Real parse(const std::string& s, mpfr_prec_t prec) {
    Real r(prec);
    mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN);
    return r;
  }
  static Real pi(mpfr_prec_t prec) {
    Real r(prec);
    mpfr_const_pi(r.v_, MPFR_RNDN);
    return r;
  }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  std::string str(int digits) const;

  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  friend Real operator+(const Real& a, const Real& b) { return bin(mpfr_add, a, b); }
  friend Real operator-(const Real& a, const Real& b) { return bin(mpfr_sub, a, b); }
  friend Real operator*(const Real& a, const Real& b) { return bin(mpfr_mul, a, b); }
  friend Real operator/(const Real& a, const Real& b) { return bin(mpfr_div, a, b); }
  Real operator-() const {
    Real r(prec());
    mpfr_neg(r.v_, v_, MPFR_RNDN);
    return r;
  }
  Real& operator+=(const Real& o) {
    mpfr_add(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }
  Real& operator-=(const Real& o) {
    mpfr_sub(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }
  Real& operator*=(const Real& o) {
    mpfr_mul(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }
  Real& operator/=(const Real& o) {
    mpfr_div(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }

  friend bool operator<(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) < 0; }
  friend bool operator>(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) > 0; }
  friend bool operator<=(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) <= 0; }
  friend bool operator>=(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) >= 0; }

 private:
  using BinOp = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t);
  static Real bin(BinOp op, const Real& a, const Real& b) {
    Real r(std::max(a.prec(), b.prec()));
    op(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  mpfr_t v_;
};

Real abs(const Real& a);
Real sqrt(const Real& a);
Real exp(const Real& a);
Real log(const Real& a);
Real log_ui(unsigned long n, mpfr_prec_t prec);
Real sin(const Real& a);
Real cos(const Real& a);
void sin_cos(Real& s, Real& c, const Real& a);
Real atan2(const Real& y, const Real& x);
Real floor(const Real& a);
Real pow_si(const Real& a, long e);
Real mul_2exp(const Real& a, long e);

struct Complex {
  Real re, im;
  explicit Complex(mpfr_prec_t prec = 64) : re(prec), im(prec) {
    mpfr_set_zero(re.raw(), 1);
    mpfr_set_zero(im.raw(), 1);
  }
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
  mpfr_prec_t prec() const { return std::max(re.prec(), im.prec()); }
  double real_d() const { return re.to_double(); }
  double imag_d() const { return im.to_double(); }
};

Complex operator+(const Complex& a, const Complex& b);
Complex operator-(const Complex& a, const Complex& b);
Complex operator*(const Complex& a, const Complex& b);
Complex operator*(const Complex& a, const Real& b);
Complex operator/(const Complex& a, const Complex& b);
Complex operator/(const Complex& a, const Real& b);
Complex neg(const Complex& a);
Complex conj(const Complex& a);
Real norm(const Complex& a);  // re^2 + im^2
Real abs(const Complex& a);
Complex cexp(const Complex& a);
Complex clog(const Complex& a);  // principal branch

// Exact Bernoulli numbers B_0, B_2, B_4, ..., B_{2n} (even index view).
const std::vector<mpq_class>& bernoulli_even(int n_max);

}  // namespace apv::mp
