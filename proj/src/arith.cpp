#include "apvar/arith.hpp"

#include <numeric>

#include "apvar/errors.hpp"

namespace apv {

u64 mul_mod(u64 a, u64 b, u64 m) {
  return static_cast<u64>((static_cast<unsigned __int128>(a) * b) % m);
}

u64 pow_mod(u64 a, u64 e, u64 m) {
  if (m == 1) return 0;
  u64 r = 1;
  a %= m;
  while (e) {
    if (e & 1) r = mul_mod(r, a, m);
    a = mul_mod(a, a, m);
    e >>= 1;
  }
  return r;
}

std::vector<std::pair<u64, u32>> factorize(u64 n) {
  std::vector<std::pair<u64, u32>> out;
  if (n == 0) throw DomainError("factorize: n must be positive");
  for (u64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    if (n % p == 0) {
      u32 e = 0;
      while (n % p == 0) {
        n /= p;
        ++e;
      }
      out.emplace_back(p, e);
    }
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

u64 euler_phi(u64 n) {
  u64 phi = 1;
  for (auto [p, e] : factorize(n)) {
    u64 pe = 1;
    for (u32 i = 1; i < e; ++i) pe *= p;
    phi *= pe * (p - 1);
  }
  return phi;
}

u64 carmichael_lambda(u64 n) {
  u64 lam = 1;
  for (auto [p, e] : factorize(n)) {
    u64 pe = 1;
    for (u32 i = 0; i < e; ++i) pe *= p;
    u64 comp;
    if (p == 2) {
      comp = (e <= 2) ? (e == 2 ? 2 : 1) : pe / 4;
    } else {
      comp = pe / p * (p - 1);
    }
    lam = std::lcm(lam, comp);
  }
  return lam;
}

u64 multiplicative_order(u64 a, u64 m, u64 group_order) {
  u64 ord = group_order;
  for (auto [p, e] : factorize(group_order)) {
    for (u32 i = 0; i < e; ++i) {
      if (pow_mod(a, ord / p, m) == 1)
        ord /= p;
      else
        break;
    }
  }
  return ord;
}

u64 primitive_root_odd_prime_power(u64 p, u32 e) {
  u64 phi_p = p - 1;
  auto fac = factorize(phi_p);
  u64 g = 0;
  for (u64 cand = 2; cand < p; ++cand) {
    bool ok = true;
    for (auto [q, _] : fac) {
      if (pow_mod(cand, phi_p / q, p) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) {
      g = cand;
      break;
    }
  }
  if (g == 0) throw DomainError("primitive_root: no root found (p not prime?)");
  if (e == 1) return g;
  // g generates mod p^e unless g^(p-1) == 1 mod p^2, in which case g+p does.
  u64 p2 = p * p;
  if (pow_mod(g, p - 1, p2) == 1) g += p;
  return g;
}

u64 primitive_character_count(u64 d) {
  // Multiplicative: p^1 -> p-2, p^e -> p^(e-2)(p-1)^2 for e>=2 (odd p);
  // 2 -> 0, 4 -> 1, 2^e -> 2^(e-2) for e>=3.  d=1 -> 1 (trivial character).
  u64 count = 1;
  for (auto [p, e] : factorize(d)) {
    u64 comp;
    if (p == 2) {
      if (e == 1)
        comp = 0;
      else if (e == 2)
        comp = 1;
      else {
        comp = 1;
        for (u32 i = 0; i < e - 2; ++i) comp *= 2;
      }
    } else {
      if (e == 1) {
        comp = p - 2;
      } else {
        comp = (p - 1) * (p - 1);
        for (u32 i = 0; i < e - 2; ++i) comp *= p;
      }
    }
    count *= comp;
  }
  return count;
}

}  // namespace apv
