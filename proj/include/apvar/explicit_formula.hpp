#pragma once

#include <optional>
#include <string>
#include <vector>

#include "apvar/family.hpp"
#include "apvar/primes.hpp"
#include "apvar/sync.hpp"
#include "apvar/zeros.hpp"

namespace apv {

// Parameters of the short-interval averages R_delta / S_delta.
struct EFParams {
  CharacterFamily family;
  mpq_class delta;  // exact rational, 0 < delta < 1
  double T = 0;     // zero-sum truncation height
  double M = 1;     // phase tolerance parameter
  double C = 0;     // pipeline constant when the T = C/delta, M = C log T rule applied
  double epsilon = 0.1;

  double delta_d() const { return delta.get_d(); }
};

// One zero flattened out of a ZeroSet, ready for the sums.
struct ZeroTerm {
  double gamma;
  double weight;  // 0.5 for a |gamma| < 1e-8 zero (grouped-pair double count)
};

// Zeros of every family member (taken from the primitive inducing character),
// truncated at T.  Throws unless all sets are verified, or allow_unverified.
std::vector<ZeroTerm> flatten_family_zeros(const EFParams& params, const ZeroSetMap& sets,
                                           bool allow_unverified = false,
                                           bool* central_flag = nullptr);

// Same traversal order as flatten_family_zeros, full-precision ordinates;
// feed these to r_delta_big.
std::vector<mp::Real> flatten_family_gammas_mp(const EFParams& params,
                                               const ZeroSetMap& sets,
                                               bool allow_unverified = false);

// Itemized error budget of the final R expression; constants are 1 and the
// items are reported, never asserted.
struct BudgetItems {
  double truncation = 0;    // log(qT) / (delta T)
  double conductor = 0;     // (E_q/Phi_q + 1) |log(T delta)|
  double secondary = 0;     // y log q / e^{y/2}
  double phase = 0;         // log(qT) log T / M
  double delta_term = 0;    // sqrt(delta) log(qT)
  double multiplicity = 0;  // log q / loglog q
  double total() const {
    return truncation + conductor + secondary + phase + delta_term + multiplicity;
  }
};

BudgetItems budget_items(const EFParams& params, std::optional<double> y);

struct EFValue {
  std::string y_repr;
  double y = 0;  // meaningful only when y is machine-representable
  double R_normalized = 0;
  double R_lower = 0, R_upper = 0;  // certified range when phases are boxed
  std::optional<double> S_normalized;
  std::optional<double> R_prime_side;  // psi-weighted prime-side average
  double main_term_prediction = 0;     // -Phi_q log(q^2/delta) / 2
  BudgetItems budget;
  double imag_residue = 0;
  bool central_zero_flag = false;
};

// Zero side at a real evaluation point y (phases y*gamma in doubles).
EFValue r_delta(const EFParams& params, double y, const ZeroSetMap& sets,
                bool allow_unverified = false);

// Zero side at y = (n+1) delta for a big integer n; phases via phase_reduce,
// which enforces the zero-precision contract.
EFValue r_delta_big(const EFParams& params, const mpz_class& n, const ZeroSetMap& sets,
                    const std::vector<mp::Real>& gammas_mp, bool allow_unverified = false);

// Certified interval of R over every y whose phases lie within
// phase_halfwidth of the aligned position delta*gamma.
EFValue r_delta_certified(const EFParams& params, double phase_halfwidth,
                          const ZeroSetMap& sets, bool allow_unverified = false);

// Prime side: closed-form segment integration of theta(e^t, chi) over
// [y-delta, y+delta]; also fills the psi-weighted version (R_prime_side).
EFValue s_delta_prime_side(const EFParams& params, double y, const SieveOptions& sieve = {});

// |psi(x,chi) - truncated zero sum| machinery.
struct ExplicitPsi {
  cpx zero_sum;        // -sum_{|gamma|<=T} x^rho/rho + imprimitivity correction
  cpx sieved;          // psi(x, chi) from the sieve (when requested)
  double budget;       // x log^2(qxT)/T + log(qx), constants 1
};

ExplicitPsi truncated_explicit_psi(const DirichletCharacter& chi, double x, double T,
                                   const ZeroSetMap& sets, bool allow_unverified = false,
                                   bool with_sieve = true, const SieveOptions& sieve = {});

// Lemma "sum over zeros": LHS, prediction Phi_q/2 log(q/delta), error items.
struct ZeroSumMainTerm {
  double lhs = 0;
  double prediction = 0;
  double ratio = 0;
  BudgetItems items;
};

ZeroSumMainTerm zero_sum_main_term(const EFParams& params, const ZeroSetMap& sets,
                                   bool allow_unverified = false);

struct FinalRPrediction {
  double prediction = 0;  // -Phi_q log(q^2/delta) / 2
  BudgetItems items;      // evaluated at y -> infinity unless y given
};

FinalRPrediction final_r_prediction(const EFParams& params, std::optional<double> y = {});

// Numeric budget for the |S - R| cross-check (documented in README):
// psi-theta term + zero-sum tail + finite-y remainder + delta-expansion slack.
double s_minus_r_budget(const EFParams& params, double y);

}  // namespace apv
