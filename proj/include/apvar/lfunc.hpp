#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>

#include "apvar/characters.hpp"
#include "apvar/mp.hpp"

namespace apv {

struct LfuncLimits {
  int max_digits = 120;
  double height_ceiling = 400.0;
};

// Complex log-gamma, principal-ish branch (exact modulo 2*pi*i, which is all
// the completed-L machinery consumes).  Double lane.
cpx lgamma_d(cpx z);

// Hurwitz zeta by Euler-Maclaurin with a rigorous tail bound; double lane.
// alpha in (0, 1], s != 1.  eps_abs is the absolute truncation target.
cpx hurwitz_d(cpx s, double alpha, double eps_abs);

// Evaluation engine for one primitive Dirichlet character.  Holds per-
// character caches (values, root number) for both precision lanes.
class LEvaluator {
 public:
  explicit LEvaluator(const DirichletCharacter& chi_primitive,
                      LfuncLimits limits = {});

  const DirichletCharacter& chi() const { return chi_; }
  u64 conductor() const { return q_; }
  int parity() const { return parity_; }

  // ----- double lane -----
  cpx L_d(cpx s) const;             // L(s, chi)
  cpx L_conj_d(cpx s) const;        // L(s, conj chi)
  double Z_d(double t) const;       // Hardy Z: real, |Z| = |L(1/2+it)|
  cpx root_number_d() const { return eps_d_; }
  // Unit-magnitude rotation of the completed L on an arbitrary contour
  // point; winding-safe on both sides of the critical line.
  cpx contour_value_d(cpx s) const;

  // ----- mpfr lane -----
  mp::Complex L_mp(const mp::Complex& s, int digits) const;
  mp::Real Z_mp(const mp::Real& t, int digits) const;

 private:
  mp::Complex root_phase_mp(int digits) const;  // eps(chi)^(-1/2)

  DirichletCharacter chi_;
  LfuncLimits limits_;
  u64 q_;
  int parity_;
  std::vector<cpx> chi_vals_;             // chi(a), a = 0..q-1
  std::vector<long long> chi_exps_;       // exact exponent of e(t/L), -1 if 0
  cpx eps_d_, sqrt_eps_inv_d_;            // root number and eps^(-1/2)
  mutable std::mutex mp_mu_;
  mutable std::map<int, std::shared_ptr<const mp::Complex>> sqrt_eps_inv_mp_;
};

// One-shot L(s, chi) to `digits` significant digits, chi primitive.  Builds
// a throwaway evaluator; use LEvaluator directly for repeated evaluation.
mp::Complex evaluate_L(const DirichletCharacter& chi_primitive, const mp::Complex& s,
                       int digits);

// Zeros of L(s,chi) inside the rectangle [-1,2] x [-T,T] by the argument
// principle (winding of the completed L).  Returns -1 if the contour could
// not be resolved (zero too close to the boundary); caller nudges T.
long rectangle_zero_count(const LEvaluator& ev, double T);

// Robust wrapper: nudges T upward by tiny steps when the contour fails.
long rectangle_zero_count_nudged(const LEvaluator& ev, double* T,
                                 int max_nudges = 6);

}  // namespace apv
