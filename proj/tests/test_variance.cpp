#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <numeric>

#include "apvar/errors.hpp"
#include "apvar/variance.hpp"

using namespace apv;

TEST_CASE("G at x=10, q=3 by hand enumeration") {
  // primes <= 10: 2,3,5,7; 3 excluded; theta(;3,1)=log 7, theta(;3,2)=log 10
  auto rep = variance_direct(sieve_tally(10, 3));
  double expect = std::pow(std::log(7.0) - 5.0, 2) + std::pow(std::log(10.0) - 5.0, 2);
  CHECK(rep.G == doctest::Approx(expect).epsilon(1e-12));
  CHECK(rep.G == doctest::Approx(16.6037).epsilon(1e-4));
}

TEST_CASE("G at x=2, q=3: single prime") {
  auto rep = variance_direct(sieve_tally(2, 3));
  double expect = std::pow(0.0 - 1.0, 2) + std::pow(std::log(2.0) - 1.0, 2);
  CHECK(rep.G == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("q < 3 rejected") {
  CHECK_THROWS_AS(variance_direct(sieve_tally(100, 2)), DomainError);
}

TEST_CASE("parseval two-character form at q=4, x=10") {
  auto tally = sieve_tally(10, 4);
  auto sums = all_character_sums(4, tally);
  auto rep = variance_parseval(sums);
  double g = 0;
  for (const auto& s : sums) {
    cpx d = s.theta - (s.label == "0" ? cpx(10, 0) : cpx(0, 0));
    g += std::norm(d) / 2.0;
  }
  CHECK(rep.G == doctest::Approx(g).epsilon(1e-14));
}

TEST_CASE("parseval matches direct at q=3, x=10") {
  auto tally = sieve_tally(10, 3);
  auto rep = variance_with_check(tally);
  CHECK(rep.parseval_residual_G / rep.G < 1e-10);
  CHECK(rep.parseval_residual_V / (rep.V + 1e-300) < 1e-10);
}

TEST_CASE("no primes: x < 2 handled through the x >= 2 precondition") {
  // The sieve requires x >= 2; at exactly x=2 with q=5 the only prime is 2.
  auto rep = variance_direct(sieve_tally(2, 5));
  // G = sum over 4 residues of |theta_a - 1/2|^2 with theta_2 = log 2
  double expect = 3 * 0.25 + std::pow(std::log(2.0) - 0.5, 2);
  CHECK(rep.G == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("parseval identity across q <= 50 at x = 1e3, 1e4") {
  for (double x : {1e3, 1e4}) {
    for (u64 q = 3; q <= 50; ++q) {
      auto tally = sieve_tally(x, q);
      auto direct = variance_direct(tally);
      auto pars = variance_parseval(all_character_sums(q, tally));
      CHECK(std::abs(direct.G - pars.G) / direct.G <= 1e-9);
      CHECK(std::abs(direct.V - pars.V) / direct.V <= 1e-9);
    }
  }
}

TEST_CASE("per-character contributions partition G") {
  auto tally = sieve_tally(1e4, 12);
  auto rep = variance_parseval(all_character_sums(12, tally));
  double sum = 0;
  for (const auto& [label, c] : rep.per_character_contributions) sum += c;
  CHECK(sum == doctest::Approx(rep.G).epsilon(1e-12));
}

TEST_CASE("G is continuous between primes and jumps at them") {
  // crossing the prime 101: a jump of order log(101)^2-ish
  const double eps = 1e-6;
  auto below = variance_direct(sieve_tally(101.0 - eps, 7));
  auto at = variance_direct(sieve_tally(101.0, 7));
  auto above = variance_direct(sieve_tally(101.0 + eps, 7));
  CHECK(std::abs(at.G - below.G) > 1.0);        // discontinuity at the prime
  CHECK(std::abs(above.G - at.G) < 1e-3);       // continuous just past it
  // mid-gap: only the x/phi drift moves G
  auto gap_a = variance_direct(sieve_tally(101.5, 7));
  auto gap_b = variance_direct(sieve_tally(101.5 + eps, 7));
  CHECK(std::abs(gap_b.G - gap_a.G) < 1e-3);
}

TEST_CASE("hooley ratio positive and recorded at q=101, x=1e6") {
  auto rep = variance_direct(sieve_tally(1e6, 101));
  CHECK(rep.G > 0);
  CHECK(rep.hooley_ratio > 0);
  CHECK(rep.hooley_ratio == doctest::Approx(rep.G / (1e6 * std::log(101.0))));
}

TEST_CASE("hooley_scan shapes and consistency") {
  auto empty = hooley_scan(5, 4, {1e3});
  CHECK(empty.rows.empty());

  auto single = hooley_scan(4, 4, {10});
  REQUIRE(single.rows.size() == 1);
  auto direct = variance_direct(sieve_tally(10, 4));
  CHECK(single.rows[0].G == direct.G);

  auto scan = hooley_scan(3, 6, {1e4});
  REQUIRE(scan.rows.size() == 4);
  // window Q=3 covers q in (3,6]
  REQUIRE(scan.windows.size() == 1);
  double sum = scan.rows[1].G + scan.rows[2].G + scan.rows[3].G;
  double l3 = std::log(std::log(std::log(1e4)));
  CHECK(scan.windows[0].avg == doctest::Approx(sum / 3.0 / (1e4 * l3 * l3)));

  auto csv = hooley_scan_csv(scan);
  CHECK(csv.find("# apvar hooley-scan v1") == 0);
  CHECK(csv.find("window,3,") != std::string::npos);
}

TEST_CASE("parseval rejects incomplete or disordered character lists") {
  auto tally = sieve_tally(100, 5);
  auto sums = all_character_sums(5, tally);
  auto partial = sums;
  partial.pop_back();
  CHECK_THROWS_AS(variance_parseval(partial), DomainError);
  auto swapped = sums;
  std::swap(swapped[0], swapped[1]);
  CHECK_THROWS_AS(variance_parseval(swapped), DomainError);
}

TEST_CASE("x below q flagged") {
  auto rep = variance_direct(sieve_tally(10, 23));
  CHECK(rep.x_below_q);
}
