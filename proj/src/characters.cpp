#include "apvar/characters.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

#include "apvar/errors.hpp"

namespace apv {

namespace {

// CRT lift: residue ~ r mod m, ~ 1 mod q/m (m || q).
u64 crt_lift(u64 r, u64 m, u64 q) {
  u64 rest = q / m;
  if (rest == 1) return r % q;
  // x = r + m*t with x == 1 mod rest  ->  t = (1-r) * m^-1 mod rest
  u64 minv = pow_mod(m % rest, euler_phi(rest) - 1, rest);
  u64 diff = ((1 + rest - r % rest) % rest);
  u64 t = mul_mod(diff, minv, rest);
  return (r + m * t) % q;
}

}  // namespace

ModulusContext::ModulusContext(u64 q) : q_(q) {
  if (q == 0) throw DomainError("modulus must be positive");
  fac_ = (q == 1) ? std::vector<std::pair<u64, u32>>{} : factorize(q);
  phi_ = euler_phi(q);

  for (auto [p, e] : fac_) {
    u64 pe = 1;
    for (u32 i = 0; i < e; ++i) pe *= p;
    if (p == 2) {
      if (e == 1) continue;  // trivial factor
      if (e == 2) {
        comps_.push_back({2, 4, crt_lift(3, 4, q), 2});
        dlogs_.emplace_back();
      } else {
        // {-1, 5}: the -1 factor first, then the cyclic 5-factor.
        comps_.push_back({2, pe, crt_lift(pe - 1, pe, q), 2});
        dlogs_.emplace_back();
        comps_.push_back({2, pe, crt_lift(5, pe, q), pe / 4});
        dlogs_.emplace_back();
      }
    } else {
      u64 g = primitive_root_odd_prime_power(p, e);
      comps_.push_back({p, pe, crt_lift(g, pe, q), pe / p * (p - 1)});
      dlogs_.emplace_back();
    }
  }

  // Discrete-log tables per component, indexed by residue mod prime_power.
  for (size_t i = 0; i < comps_.size(); ++i) {
    const auto& c = comps_[i];
    u64 pe = c.prime_power;
    if (c.prime == 2 && pe >= 8) continue;  // handled jointly below
    auto& tbl = dlogs_[i];
    tbl.assign(pe, UINT32_MAX);
    u64 g_local = c.generator % pe;
    u64 v = 1;
    for (u64 t = 0; t < c.order; ++t) {
      tbl[v] = static_cast<u32>(t);
      v = mul_mod(v, g_local, pe);
    }
  }
  // Joint tables for 2^e, e >= 3: r = (-1)^s * 5^t mod 2^e.
  for (size_t i = 0; i < comps_.size(); ++i) {
    const auto& c = comps_[i];
    if (c.prime != 2 || c.prime_power < 8) continue;
    u64 pe = c.prime_power;
    auto& sign_tbl = dlogs_[i];      // component i: the -1 factor
    auto& five_tbl = dlogs_[i + 1];  // component i+1: the 5 factor
    sign_tbl.assign(pe, UINT32_MAX);
    five_tbl.assign(pe, UINT32_MAX);
    u64 v = 1;
    for (u64 t = 0; t < pe / 4; ++t) {
      sign_tbl[v] = 0;
      five_tbl[v] = static_cast<u32>(t);
      u64 w = pe - v;
      sign_tbl[w] = 1;
      five_tbl[w] = static_cast<u32>(t);
      v = mul_mod(v, 5, pe);
    }
    ++i;  // skip the paired component
  }

  exponent_ = 1;
  for (const auto& c : comps_) exponent_ = std::lcm(exponent_, c.order);

  roots_.resize(exponent_);
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  for (u64 t = 0; t < exponent_; ++t) {
    long double ang = two_pi * static_cast<long double>(t) / exponent_;
    roots_[t] = cpx(static_cast<double>(std::cos(ang)),
                    static_cast<double>(std::sin(ang)));
  }
}

bool ModulusContext::is_unit(u64 a) const {
  return std::gcd(a % q_, q_) == 1 || q_ == 1;
}

std::vector<u32> ModulusContext::dlog(u64 a) const {
  a %= q_;
  std::vector<u32> out(comps_.size());
  for (size_t i = 0; i < comps_.size(); ++i) {
    u32 t = dlogs_[i][a % comps_[i].prime_power];
    if (t == UINT32_MAX) throw DomainError("dlog: residue not a unit");
    out[i] = t;
  }
  return out;
}

std::optional<u64> ModulusContext::value_exponent(const std::vector<u32>& chi_exps,
                                                  u64 a) const {
  a %= q_;
  if (q_ > 1 && std::gcd(a, q_) != 1) return std::nullopt;
  u64 t = 0;
  for (size_t i = 0; i < comps_.size(); ++i) {
    u64 ord = comps_[i].order;
    u32 dl = dlogs_[i][a % comps_[i].prime_power];
    u64 stride = exponent_ / ord;
    u64 term = mul_mod(chi_exps[i] % ord, dl, ord) * stride;
    t = (t + term) % exponent_;
  }
  return t;
}

std::shared_ptr<const ModulusContext> ModulusContext::get(u64 q) {
  static std::mutex mu;
  static std::map<u64, std::shared_ptr<const ModulusContext>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(q);
  if (it != cache.end()) return it->second;
  auto ctx = std::make_shared<const ModulusContext>(q);
  if (q <= 1000000) cache.emplace(q, ctx);
  return ctx;
}

namespace {

// Conductor contribution of the components belonging to one prime p^e | q.
u64 conductor_at_prime(const ModulusContext& ctx, u64 p, u32 e,
                       const std::vector<u32>& exps) {
  const auto& comps = ctx.components();
  if (p == 2) {
    if (e == 1) return 1;
    // locate the components for this prime
    u32 eps = 0, beta = 0;
    u64 beta_order = 1;
    for (size_t i = 0; i < comps.size(); ++i) {
      if (comps[i].prime != 2) continue;
      if (e == 2) {
        eps = exps[i] % comps[i].order;
        break;
      }
      eps = exps[i] % comps[i].order;
      beta = exps[i + 1] % comps[i + 1].order;
      beta_order = comps[i + 1].order;
      break;
    }
    if (e == 2) return eps ? 4 : 1;
    if (beta == 0) return eps ? 4 : 1;
    u64 d = beta_order / std::gcd<u64>(beta, beta_order);  // order 2^m of 5-part
    return 4 * d;  // conductor 2^(m+2)
  }
  for (const auto& c : comps) {
    if (c.prime != p) continue;
    size_t idx = static_cast<size_t>(&c - comps.data());
    u32 ee = exps[idx] % c.order;
    if (ee == 0) return 1;
    u64 d = c.order / std::gcd<u64>(ee, c.order);  // order of the component char
    // smallest p^f with d | phi(p^f)
    u64 pf = p, phi_pf = p - 1;
    while (phi_pf % d != 0) {
      pf *= p;
      phi_pf *= p;
    }
    return pf;
  }
  return 1;
}

}  // namespace

DirichletCharacter::DirichletCharacter(std::shared_ptr<const ModulusContext> ctx,
                                       std::vector<u32> exponents)
    : ctx_(std::move(ctx)), exponents_(std::move(exponents)) {
  const auto& comps = ctx_->components();
  if (exponents_.size() != comps.size())
    throw DomainError("character: exponent vector has wrong length");
  for (size_t i = 0; i < comps.size(); ++i) exponents_[i] %= comps[i].order;

  order_ = 1;
  for (size_t i = 0; i < comps.size(); ++i) {
    if (exponents_[i] == 0) continue;
    order_ = std::lcm(order_, comps[i].order / std::gcd<u64>(exponents_[i], comps[i].order));
  }

  conductor_ = 1;
  for (auto [p, e] : ctx_->factorization())
    conductor_ *= conductor_at_prime(*ctx_, p, e, exponents_);

  if (ctx_->q() <= 2) {
    parity_ = 0;
  } else {
    auto t = ctx_->value_exponent(exponents_, ctx_->q() - 1);
    parity_ = (*t == 0) ? 0 : 1;  // chi(-1) is always +-1
  }
}

cpx DirichletCharacter::operator()(i64 n) const {
  u64 q = ctx_->q();
  u64 a = static_cast<u64>(((n % static_cast<i64>(q)) + static_cast<i64>(q)) % static_cast<i64>(q));
  auto t = ctx_->value_exponent(exponents_, a);
  if (!t) return cpx(0.0, 0.0);
  return ctx_->root_of_unity(*t);
}

std::optional<u64> DirichletCharacter::value_exponent(i64 n) const {
  u64 q = ctx_->q();
  u64 a = static_cast<u64>(((n % static_cast<i64>(q)) + static_cast<i64>(q)) % static_cast<i64>(q));
  return ctx_->value_exponent(exponents_, a);
}

DirichletCharacter DirichletCharacter::conjugate() const {
  std::vector<u32> e(exponents_.size());
  const auto& comps = ctx_->components();
  for (size_t i = 0; i < e.size(); ++i)
    e[i] = static_cast<u32>((comps[i].order - exponents_[i]) % comps[i].order);
  return DirichletCharacter(ctx_, std::move(e));
}

std::string DirichletCharacter::label() const {
  if (exponents_.empty()) return "0";
  std::ostringstream os;
  for (size_t i = 0; i < exponents_.size(); ++i) {
    if (i) os << '.';
    os << exponents_[i];
  }
  return os.str();
}

std::vector<DirichletCharacter> character_group(u64 q) {
  if (q == 0) throw DomainError("character_group: q must be positive");
  auto ctx = ModulusContext::get(q);
  const auto& comps = ctx->components();
  std::vector<DirichletCharacter> out;
  out.reserve(ctx->phi());
  std::vector<u32> exps(comps.size(), 0);
  while (true) {
    out.emplace_back(ctx, exps);
    // odometer, last component fastest
    size_t i = comps.size();
    while (i > 0) {
      --i;
      if (++exps[i] < comps[i].order) break;
      exps[i] = 0;
      if (i == 0) return out;
    }
    if (comps.empty()) return out;
  }
}

DirichletCharacter character_from_label(u64 q, const std::string& label) {
  auto ctx = ModulusContext::get(q);
  std::vector<u32> exps;
  if (!ctx->components().empty()) {
    std::istringstream is(label);
    std::string piece;
    while (std::getline(is, piece, '.')) exps.push_back(static_cast<u32>(std::stoul(piece)));
  }
  if (exps.size() != ctx->components().size())
    throw DomainError("character_from_label: label '" + label + "' does not match modulus " +
                      std::to_string(q));
  return DirichletCharacter(ctx, std::move(exps));
}

DirichletCharacter primitive_inducing(const DirichletCharacter& chi) {
  u64 qc = chi.conductor();
  auto ctx_star = ModulusContext::get(qc);
  const auto& comps_star = ctx_star->components();
  u64 q = chi.modulus();
  u64 L = chi.context().exponent();

  std::vector<u32> exps(comps_star.size());
  for (size_t i = 0; i < comps_star.size(); ++i) {
    // Representative of the generator coprime to q; exists since the
    // generator is ==1 on all other CRT factors of qc and qc | q.
    u64 g = comps_star[i].generator;
    u64 a = g;
    while (std::gcd(a, q) != 1) a += qc;
    auto t = chi.value_exponent(static_cast<i64>(a));
    // chi*(g) = e(t/L) must be an ord-th root of unity.
    u64 ord = comps_star[i].order;
    u64 num = *t * ord;
    if (num % L != 0)
      throw DomainError("primitive_inducing: inconsistent character data");
    exps[i] = static_cast<u32>((num / L) % ord);
  }
  return DirichletCharacter(ctx_star, std::move(exps));
}

cpx gauss_sum(const DirichletCharacter& chi) {
  if (!chi.is_primitive())
    throw DomainError("gauss_sum: character must be primitive (conductor " +
                      std::to_string(chi.conductor()) + " != modulus " +
                      std::to_string(chi.modulus()) + ")");
  u64 q = chi.modulus();
  if (q == 1) return cpx(1.0, 0.0);
  u64 L = chi.context().exponent();
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  long double re = 0, im = 0;
  for (u64 a = 1; a < q; ++a) {
    auto t = chi.value_exponent(static_cast<i64>(a));
    if (!t) continue;
    // exact rational phase t/L + a/q
    long double ang = two_pi * (static_cast<long double>(*t) / L +
                                static_cast<long double>(a) / q);
    re += std::cos(ang);
    im += std::sin(ang);
  }
  return cpx(static_cast<double>(re), static_cast<double>(im));
}

}  // namespace apv
