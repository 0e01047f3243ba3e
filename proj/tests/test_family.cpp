#include <doctest.h>

#include <cmath>
#include <set>

#include "apvar/errors.hpp"
#include "apvar/family.hpp"

using namespace apv;

TEST_CASE("conductor variance: q prime") {
  for (u64 q : {5ull, 11ull, 101ull}) {
    double lq = std::log(static_cast<double>(q));
    double expect = lq * lq / static_cast<double>(euler_phi(q));
    CHECK(conductor_variance(q) == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("conductor variance: q = 4") {
  double l4 = std::log(4.0);
  CHECK(conductor_variance(4) == doctest::Approx(0.5 * l4 * l4).epsilon(1e-14));
}

TEST_CASE("conductor variance: two routes agree exactly, q <= 200") {
  for (u64 q = 3; q <= 200; ++q) {
    CHECK(conductor_variance(q) == conductor_variance_grouped(q));
  }
}

TEST_CASE("conductor variance at q=360 against the loglog bound, recorded") {
  double v = conductor_variance(360);
  double l2 = std::log(std::log(360.0));
  CHECK(v <= 25.0 * l2 * l2);
  MESSAGE("conductor_variance(360) = " << v << ", 25 (loglog 360)^2 = " << 25 * l2 * l2);
}

TEST_CASE("select_family q=11 max: the 8 complex characters") {
  auto fam = select_family(11, 1.0, std::nullopt);
  CHECK(fam.phi_F == 8);
  CHECK(fam.E_q == 0.0);  // all survivors primitive mod 11
  // conjugation closure
  std::set<std::string> labels(fam.members.begin(), fam.members.end());
  for (const auto& chi : fam.characters()) {
    CHECK(labels.count(chi.conjugate().label()) == 1);
    CHECK_FALSE(chi.is_real());
  }
}

TEST_CASE("select_family target 2: one conjugate pair, E_q relation") {
  auto fam = select_family(15, 1.0, 2);
  REQUIRE(fam.phi_F == 2);
  auto chi = character_from_label(15, fam.members[0]);
  double expect = 2.0 * (std::log(15.0) - std::log(static_cast<double>(chi.conductor())));
  CHECK(fam.E_q == doctest::Approx(expect).epsilon(1e-12));
  // largest-conductor pairs kept first: survivors mod 15 include conductor-15
  // pairs, so the kept pair must be primitive
  CHECK(chi.conductor() == 15);
}

TEST_CASE("select_family q=9 w=0.5: mod-3-induced characters survive the threshold") {
  // log 9 - log 3 = 1.0986 vs threshold 2 loglog 9 = 1.575: not excluded.
  auto fam = select_family(9, 0.5, std::nullopt);
  CHECK(fam.phi_F == 4);  // all complex characters mod 9 (orders 3 and 6)
  bool has_induced = false;
  for (const auto& chi : fam.characters())
    if (chi.conductor() == 9 && chi.order() == 3) has_induced = true;
  CHECK(has_induced);
}

TEST_CASE("select_family error contracts") {
  CHECK_THROWS_AS(select_family(11, 1.0, 3), DomainError);    // odd target
  CHECK_THROWS_AS(select_family(11, 1.0, 100), DomainError);  // more than survivors
  CHECK_THROWS_AS(select_family(2, 1.0, std::nullopt), DomainError);
}

TEST_CASE("E_q bounds") {
  for (u64 q : {12ull, 36ull, 60ull, 100ull}) {
    for (double w : {0.5, 1.0}) {
      auto fam = select_family(q, w, std::nullopt);
      CHECK(fam.E_q >= 0.0);
      CHECK(fam.E_q <= static_cast<double>(fam.phi_F) * fam.threshold + 1e-12);
    }
  }
}

TEST_CASE("pipeline_family") {
  // q=101: phi=100, g=log q, K=1
  auto fam = pipeline_family(101);
  double llq = std::log(std::log(101.0));
  u64 expect = 2 * static_cast<u64>(std::floor(50.0 * (1.0 - 1.0 / (llq * llq))));
  CHECK(fam.requested_size == expect);
  CHECK(fam.phi_F <= euler_phi(101));
  CHECK(fam.phi_F >= 2);
  CHECK(fam.phi_F % 2 == 0);
  // tiny q: the formula floor collapses to zero
  CHECK_THROWS_AS(pipeline_family(5), DomainError);
}

TEST_CASE("family_from_labels enforces conjugation closure") {
  auto chars = character_group(5);
  std::string complex_label;
  for (const auto& c : chars)
    if (!c.is_real()) complex_label = c.label();
  CHECK_THROWS_AS(family_from_labels(5, {complex_label}), DomainError);
  auto chi = character_from_label(5, complex_label);
  auto fam = family_from_labels(5, {complex_label, chi.conjugate().label()});
  CHECK(fam.phi_F == 2);
}

TEST_CASE("family json round trip") {
  auto fam = select_family(11, 1.0, 4);
  auto text = family_json(fam);
  auto back = family_from_json(text);
  CHECK(back.q == fam.q);
  CHECK(back.members == fam.members);
  CHECK(back.phi_F == fam.phi_F);
  CHECK(back.E_q == doctest::Approx(fam.E_q));
  CHECK(back.w == fam.w);
}
