#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "apvar/arith.hpp"

namespace apv {

using cpx = std::complex<double>;

// One cyclic factor of (Z/qZ)^*.  Odd prime powers contribute one factor;
// 2^e with e >= 3 contributes two (the {-1, 5} decomposition).
struct UnitGroupComponent {
  u64 prime;        // underlying prime
  u64 prime_power;  // p^e the factor lives in
  u64 generator;    // generator lifted to a residue mod q (== 1 on other factors)
  u64 order;        // order of this cyclic factor
};

// Multiplicative structure of (Z/qZ)^*: factorization, CRT generators, and
// per-residue discrete logarithms.  Characters mod q hold a shared pointer to
// one of these; everything here is immutable after construction.
class ModulusContext {
 public:
  explicit ModulusContext(u64 q);

  u64 q() const { return q_; }
  u64 phi() const { return phi_; }
  u64 exponent() const { return exponent_; }  // lcm of component orders
  const std::vector<std::pair<u64, u32>>& factorization() const { return fac_; }
  const std::vector<UnitGroupComponent>& components() const { return comps_; }

  bool is_unit(u64 a) const;

  // Exponent vector of a unit a on the generators; a must be coprime to q.
  std::vector<u32> dlog(u64 a) const;

  // Exact value exponent: chi(a) = e(t / exponent()) where t is returned,
  // for a character with the given exponent vector.  nullopt when gcd(a,q)>1.
  std::optional<u64> value_exponent(const std::vector<u32>& chi_exps, u64 a) const;

  // e(t / exponent()) from the shared per-modulus root-of-unity table.
  cpx root_of_unity(u64 t) const { return roots_[t]; }

  static std::shared_ptr<const ModulusContext> get(u64 q);  // memoized

 private:
  u64 q_, phi_, exponent_;
  std::vector<std::pair<u64, u32>> fac_;
  std::vector<UnitGroupComponent> comps_;
  // dlog_[i][r % prime_power] = exponent of residue r on component i
  std::vector<std::vector<u32>> dlogs_;
  std::vector<cpx> roots_;
};

class DirichletCharacter {
 public:
  DirichletCharacter(std::shared_ptr<const ModulusContext> ctx,
                     std::vector<u32> exponents);

  u64 modulus() const { return ctx_->q(); }
  const ModulusContext& context() const { return *ctx_; }
  const std::vector<u32>& exponents() const { return exponents_; }

  u64 conductor() const { return conductor_; }
  int parity() const { return parity_; }  // chi(-1) = (-1)^parity
  u64 order() const { return order_; }
  bool is_principal() const { return order_ == 1; }
  bool is_real() const { return order_ <= 2; }
  bool is_primitive() const { return conductor_ == modulus(); }

  cpx operator()(i64 n) const;
  // Exact exponent t with chi(n) = e(t / context().exponent()); nullopt if
  // gcd(n, q) > 1.
  std::optional<u64> value_exponent(i64 n) const;

  DirichletCharacter conjugate() const;

  // Exponent components joined by '.', e.g. "3" or "1.2"; stable label used
  // in every external file and report.
  std::string label() const;

  bool operator==(const DirichletCharacter& other) const {
    return modulus() == other.modulus() && exponents_ == other.exponents_;
  }

 private:
  std::shared_ptr<const ModulusContext> ctx_;
  std::vector<u32> exponents_;
  u64 conductor_;
  u64 order_;
  int parity_;
};

// All phi(q) characters mod q, in lexicographic exponent-vector order.
std::vector<DirichletCharacter> character_group(u64 q);

// The character mod q with the given label (exponent vector as in label()).
DirichletCharacter character_from_label(u64 q, const std::string& label);

// chi* mod q_chi, primitive, agreeing with chi on units.
DirichletCharacter primitive_inducing(const DirichletCharacter& chi);

// tau(chi) = sum_a chi(a) e(a/q); chi must be primitive.
cpx gauss_sum(const DirichletCharacter& chi);

}  // namespace apv
