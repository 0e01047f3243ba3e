#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace apv {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

u64 mul_mod(u64 a, u64 b, u64 m);
u64 pow_mod(u64 a, u64 e, u64 m);

// Trial division; adequate for the moduli this project handles (<= ~10^12).
std::vector<std::pair<u64, u32>> factorize(u64 n);

u64 euler_phi(u64 n);
u64 carmichael_lambda(u64 n);

// Multiplicative order of a mod m, given phi(m) (or any multiple of the order
// that divides lambda(m) works as `group_order`).  a must be a unit.
u64 multiplicative_order(u64 a, u64 m, u64 group_order);

// Smallest primitive root mod p^e (p odd prime).  For e >= 2 the root is
// lifted so it generates the full cyclic group mod p^e.
u64 primitive_root_odd_prime_power(u64 p, u32 e);

// Number of primitive Dirichlet characters of conductor d.
u64 primitive_character_count(u64 d);

}  // namespace apv
