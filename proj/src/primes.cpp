#include "apvar/primes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <future>
#include <numeric>
#include <thread>

#include "apvar/errors.hpp"

namespace apv {

namespace {

constexpr std::array<u32, 8> kWheel = {1, 7, 11, 13, 17, 19, 23, 29};
constexpr std::array<u32, 8> kWheelGap = {6, 4, 2, 4, 2, 4, 6, 2};

constexpr std::array<int, 30> make_widx() {
  std::array<int, 30> t{};
  for (auto& v : t) v = -1;
  for (int i = 0; i < 8; ++i) t[kWheel[i]] = i;
  return t;
}
constexpr std::array<int, 30> kWidx = make_widx();

constexpr std::array<u32, 30> make_next_wheel_delta() {
  std::array<u32, 30> t{};
  for (u32 r = 0; r < 30; ++r) {
    u32 d = 0;
    while (kWidx[(r + d) % 30] < 0) ++d;
    t[r] = d;
  }
  return t;
}
constexpr std::array<u32, 30> kNextWheel = make_next_wheel_delta();

// Segment spans 2^20 odd numbers, rounded down to whole 30-blocks.
constexpr u64 kSegmentSpan = (u64(1) << 21) / 30 * 30;

inline void kahan_add(double& sum, double& comp, double term) {
  double y = term - comp;
  double t = sum + y;
  comp = (t - sum) - y;
  sum = t;
}

}  // namespace

std::vector<u32> simple_primes(u32 limit) {
  std::vector<u32> out;
  if (limit < 2) return out;
  std::vector<bool> composite(limit + 1, false);
  for (u32 p = 2; static_cast<u64>(p) * p <= limit; ++p)
    if (!composite[p])
      for (u64 m = static_cast<u64>(p) * p; m <= limit; m += p) composite[m] = true;
  for (u32 n = 2; n <= limit; ++n)
    if (!composite[n]) out.push_back(n);
  return out;
}

namespace {

// Marks composites in the wheel bitmap for [seg_lo, seg_end); bit index
// ((n-seg_lo)/30)*8 + widx(n%30).
void sieve_segment(u64 seg_lo, u64 seg_end, const std::vector<u32>& base,
                   std::vector<u64>& bits) {
  const u64 nbits = (seg_end - seg_lo) / 30 * 8;
  bits.assign((nbits + 63) / 64, 0);
  for (u32 p : base) {
    if (p < 7) continue;
    if (static_cast<u64>(p) * p >= seg_end) break;
    u64 m = (seg_lo + p - 1) / p;
    if (m < p) m = p;
    m += kNextWheel[m % 30];
    u64 idx = static_cast<u64>(kWidx[m % 30]);
    u64 n = p * m;
    while (n < seg_end) {
      u64 bit = (n - seg_lo) / 30 * 8 + static_cast<u64>(kWidx[n % 30]);
      bits[bit >> 6] |= u64(1) << (bit & 63);
      m += kWheelGap[idx];
      idx = (idx + 1) & 7;
      n = p * m;
    }
  }
}

template <class F>
void emit_segment(u64 seg_lo, u64 seg_end, u64 lo, u64 hi,
                  const std::vector<u64>& bits, F&& f) {
  const u64 nblocks = (seg_end - seg_lo) / 30;
  for (u64 b = 0; b < nblocks; ++b) {
    u64 base = seg_lo + b * 30;
    for (int i = 0; i < 8; ++i) {
      u64 n = base + kWheel[i];
      if (n < 7 || n < lo) continue;
      if (n > hi) return;
      u64 bit = b * 8 + static_cast<u64>(i);
      if (!(bits[bit >> 6] & (u64(1) << (bit & 63)))) f(n);
    }
  }
}

}  // namespace

void for_primes_in(u64 lo, u64 hi, const std::function<void(u64)>& f) {
  if (hi < 2 || hi < lo) return;
  for (u64 p : {u64(2), u64(3), u64(5)})
    if (p >= lo && p <= hi) f(p);
  u64 root = static_cast<u64>(std::sqrt(static_cast<double>(hi))) + 2;
  auto base = simple_primes(static_cast<u32>(std::min<u64>(root, 0xFFFFFFFFull)));
  std::vector<u64> bits;
  u64 seg_lo = lo / 30 * 30;
  while (seg_lo <= hi) {
    u64 seg_end = std::min(seg_lo + kSegmentSpan, hi / 30 * 30 + 30);
    sieve_segment(seg_lo, seg_end, base, bits);
    emit_segment(seg_lo, seg_end, lo, hi, bits, f);
    seg_lo = seg_end;
  }
}

double PrimeTally::theta_coprime_total() const {
  double s = 0, c = 0;
  for (u64 a = 0; a < q; ++a)
    if (std::gcd(a, q) == 1 || q == 1) kahan_add(s, c, theta[a]);
  return s;
}

double PrimeTally::psi_coprime_total() const {
  double s = 0, c = 0;
  for (u64 a = 0; a < q; ++a)
    if (std::gcd(a, q) == 1 || q == 1) {
      kahan_add(s, c, theta[a]);
      kahan_add(s, c, psi_power[a]);
    }
  return s;
}

namespace {

struct ChunkTally {
  std::vector<double> sum, comp;
};

// One chunk = a fixed number of sieve segments; chunk boundaries do not
// depend on the thread count, so the merged result is bit-stable.
constexpr u64 kSegmentsPerChunk = 8;

ChunkTally tally_chunk(u64 chunk_lo, u64 chunk_hi, u64 limit, u64 q,
                       const std::vector<u32>& base) {
  ChunkTally out;
  out.sum.assign(q, 0.0);
  out.comp.assign(q, 0.0);
  std::vector<u64> bits;
  u64 emit_hi = std::min(chunk_hi - 1, limit);
  u64 seg_lo = chunk_lo;
  while (seg_lo < chunk_hi) {
    u64 seg_end = std::min(seg_lo + kSegmentSpan, chunk_hi);
    sieve_segment(seg_lo, seg_end, base, bits);
    emit_segment(seg_lo, seg_end, std::max<u64>(chunk_lo, 2), emit_hi, bits,
                 [&](u64 p) { kahan_add(out.sum[p % q], out.comp[p % q], std::log(static_cast<double>(p))); });
    seg_lo = seg_end;
  }
  return out;
}

}  // namespace

PrimeTally sieve_tally(double x, u64 q, const SieveOptions& opts) {
  if (q == 0) throw DomainError("sieve_tally: q must be positive");
  if (!(x >= 2.0)) throw DomainError("sieve_tally: x must be >= 2");
  if (x > static_cast<double>(opts.ceiling))
    throw CapacityError("sieve_tally: x = " + std::to_string(x) +
                        " exceeds the sieve ceiling " + std::to_string(opts.ceiling) +
                        "; raise --sieve-ceiling or use zero-side evaluation");
  const u64 limit = static_cast<u64>(std::floor(x));

  PrimeTally t;
  t.x = x;
  t.q = q;
  t.theta.assign(q, 0.0);
  t.psi_power.assign(q, 0.0);
  std::vector<double> comp(q, 0.0);

  // 2, 3, 5 are off the wheel; account for them directly.
  for (u64 p : {u64(2), u64(3), u64(5)})
    if (p <= limit) kahan_add(t.theta[p % q], comp[p % q], std::log(static_cast<double>(p)));

  u64 root = static_cast<u64>(std::sqrt(static_cast<double>(limit))) + 2;
  auto base = simple_primes(static_cast<u32>(root));

  // Fixed chunk grid; workers fill chunks, merge happens in chunk order.
  const u64 chunk_span = kSegmentsPerChunk * kSegmentSpan;
  std::vector<std::pair<u64, u64>> chunks;
  for (u64 lo = 0; lo <= limit; lo += chunk_span)
    chunks.emplace_back(lo, std::min(lo + chunk_span, limit / 30 * 30 + 30));

  int threads = opts.threads > 0 ? opts.threads
                                 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto merge = [&](const ChunkTally& ct) {
    for (u64 a = 0; a < q; ++a) {
      kahan_add(t.theta[a], comp[a], ct.sum[a]);
      kahan_add(t.theta[a], comp[a], -ct.comp[a]);
    }
  };
  if (chunks.size() == 1 || threads == 1) {
    for (auto [lo, hi] : chunks) merge(tally_chunk(lo, hi, limit, q, base));
  } else {
    const size_t window = static_cast<size_t>(threads) + 1;
    std::vector<std::future<ChunkTally>> inflight;
    size_t next_launch = 0, next_merge = 0;
    while (next_merge < chunks.size()) {
      while (next_launch < chunks.size() && inflight.size() < window) {
        auto [lo, hi] = chunks[next_launch++];
        inflight.push_back(std::async(std::launch::async, tally_chunk, lo, hi,
                                      limit, q, std::cref(base)));
      }
      merge(inflight.front().get());
      inflight.erase(inflight.begin());
      ++next_merge;
    }
  }

  // Prime powers p^k <= x, k >= 2, ascending (p, k).
  for (u32 p : base) {
    u64 pk = static_cast<u64>(p) * p;
    if (pk > limit) break;
    double lp = std::log(static_cast<double>(p));
    while (pk <= limit) {
      t.psi_power[pk % q] += lp;
      if (pk > limit / p) break;
      pk *= p;
    }
  }
  return t;
}

namespace {
constexpr char kTallyMagic[4] = {'A', 'P', 'V', 'T'};
}

void save_tally(const PrimeTally& t, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CapacityError("save_tally: cannot open " + path);
  os.write(kTallyMagic, 4);
  u32 version = kSieveVersion;
  os.write(reinterpret_cast<const char*>(&version), 4);
  os.write(reinterpret_cast<const char*>(&t.q), 8);
  os.write(reinterpret_cast<const char*>(&t.x), 8);
  os.write(reinterpret_cast<const char*>(t.theta.data()),
           static_cast<std::streamsize>(8 * t.q));
  os.write(reinterpret_cast<const char*>(t.psi_power.data()),
           static_cast<std::streamsize>(8 * t.q));
}

PrimeTally load_tally(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SchemaError("load_tally: cannot open " + path, 0);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kTallyMagic, 4) != 0)
    throw SchemaError("load_tally: bad magic in " + path, 0);
  u32 version = 0;
  is.read(reinterpret_cast<char*>(&version), 4);
  if (version != kSieveVersion)
    throw SchemaError("load_tally: sieve version mismatch in " + path, 0);
  PrimeTally t;
  is.read(reinterpret_cast<char*>(&t.q), 8);
  is.read(reinterpret_cast<char*>(&t.x), 8);
  if (!is || t.q == 0 || t.q > (u64(1) << 32))
    throw SchemaError("load_tally: corrupt header in " + path, 0);
  t.theta.resize(t.q);
  t.psi_power.resize(t.q);
  is.read(reinterpret_cast<char*>(t.theta.data()), static_cast<std::streamsize>(8 * t.q));
  is.read(reinterpret_cast<char*>(t.psi_power.data()), static_cast<std::streamsize>(8 * t.q));
  if (!is) throw SchemaError("load_tally: truncated file " + path, 0);
  return t;
}

CharacterSum character_sum(const DirichletCharacter& chi, const PrimeTally& tally) {
  if (chi.modulus() != tally.q)
    throw DomainError("character_sum: modulus mismatch (chi mod " +
                      std::to_string(chi.modulus()) + ", tally mod " +
                      std::to_string(tally.q) + ")");
  CharacterSum cs;
  cs.label = chi.label();
  cs.q = tally.q;
  cs.x = tally.x;

  double re = 0, im = 0;
  for (u64 a = 0; a < tally.q; ++a) {
    double w = tally.theta[a];
    if (w == 0.0) continue;
    cpx v = chi(static_cast<i64>(a));
    re += v.real() * w;
    im += v.imag() * w;
  }
  cs.theta = cpx(re, im);

  // k >= 2 prime powers in ascending (p, k); this exact order is part of the
  // contract (tests re-enumerate it independently and compare bitwise).
  const u64 limit = static_cast<u64>(std::floor(tally.x));
  u32 root = static_cast<u32>(std::sqrt(static_cast<double>(limit))) + 2;
  double pre = 0, pim = 0;
  for (u32 p : simple_primes(root)) {
    u64 pk = static_cast<u64>(p) * p;
    if (pk > limit) break;
    double lp = std::log(static_cast<double>(p));
    while (pk <= limit) {
      cpx v = chi(static_cast<i64>(pk % tally.q));
      pre += v.real() * lp;
      pim += v.imag() * lp;
      if (pk > limit / p) break;
      pk *= p;
    }
  }
  cs.prime_power_part = cpx(pre, pim);
  cs.psi = cs.theta + cs.prime_power_part;
  return cs;
}

std::vector<CharacterSum> all_character_sums(u64 q, const PrimeTally& tally) {
  std::vector<CharacterSum> out;
  for (const auto& chi : character_group(q)) out.push_back(character_sum(chi, tally));
  return out;
}

cpx psi_from_primitive(const DirichletCharacter& chi, const CharacterSum& star_sum) {
  auto star = primitive_inducing(chi);
  if (star_sum.q != star.modulus() || star_sum.label != star.label())
    throw DomainError("psi_from_primitive: star_sum is not the sum of the inducing character");
  const u64 limit = static_cast<u64>(std::floor(star_sum.x));
  cpx corr(0, 0);
  for (auto [p, e] : chi.context().factorization()) {
    if (p > limit) continue;
    double lp = std::log(static_cast<double>(p));
    u64 pk = p;
    while (pk <= limit) {
      corr += star(static_cast<i64>(pk % star.modulus())) * lp;
      if (pk > limit / p) break;
      pk *= p;
    }
  }
  return star_sum.psi - corr;
}

}  // namespace apv
