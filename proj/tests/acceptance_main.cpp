// Acceptance suite: one line per criterion, every threshold pinned from the
// build contract.  Exit code is the number of failed criteria.
//
// Two clauses (4a, 6a) compare desk-scale runs against asymptotic main terms
// whose O-constants are not small at the pinned parameters; they are run
// faithfully and reported with the measured shortfall (see README, section
// "Desk-scale asymptotics", and the per-line diagnostics below).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <vector>

#include "apvar/pipeline.hpp"

using namespace apv;

namespace {

struct Outcome {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

std::vector<Outcome> g_outcomes;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void record(json& log, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
  g_outcomes.push_back({name, pass, detail, seconds});
  log["criteria"].push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
  std::printf("%-4s criterion %s  [%.1fs]\n      %s\n", pass ? "PASS" : "FAIL",
              name.c_str(), seconds, detail.c_str());
  std::fflush(stdout);
}

// Per-criterion store directories keep the cached heights stable, so the
// determinism pass sees identical data whether sets were computed or loaded.
std::string store_dir(const std::string& which) {
  return (std::filesystem::current_path() / "acceptance-artifacts" / ("zero-store-" + which))
      .string();
}

// ---------------------------------------------------------------------------

void criterion_1_parseval(json& log) {
  Timer t;
  double worst_g = 0, worst_v = 0;
  u64 worst_q = 0;
  for (double x : {1e3, 1e4, 1e5, 1e6}) {
    for (u64 q = 3; q <= 50; ++q) {
      auto tally = sieve_tally(x, q);
      auto direct = variance_direct(tally);
      auto pars = variance_parseval(all_character_sums(q, tally));
      double rg = std::abs(direct.G - pars.G) / direct.G;
      double rv = std::abs(direct.V - pars.V) / direct.V;
      if (rg > worst_g) {
        worst_g = rg;
        worst_q = q;
      }
      worst_v = std::max(worst_v, rv);
    }
  }
  bool pass = worst_g <= 1e-9 && worst_v <= 1e-9;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "1 [Parseval identity, q in [3,50], x up to 1e6]: max rel diff G %.3e "
                "(q=%llu), V %.3e, tolerance 1e-9",
                worst_g, static_cast<unsigned long long>(worst_q), worst_v);
  log["parseval"] = {{"worst_rel_G", worst_g}, {"worst_rel_V", worst_v}};
  record(log, "1", pass, buf, t.seconds());
}

void criterion_2_zero_verification(json& log) {
  Timer t;
  ZeroStore store(store_dir("c2"));
  FindZeroOptions opts;
  opts.height_ceiling = 320;
  bool all_verified = true, all_rvm = true;
  int characters = 0;
  std::string failure;
  for (u64 cond = 1; cond <= 12; ++cond) {
    for (const auto& chi : character_group(cond)) {
      if (!chi.is_primitive()) continue;
      if (cond > 1 && chi.is_principal()) continue;
      const ZeroSet& set = store.ensure(chi, 100.0, 25, opts);
      ++characters;
      log["zero_sets"][std::to_string(cond) + ":" + chi.label()] = {
          {"count_one_sided", set.zeros.size()},
          {"count_both_signs", set.verified_count},
          {"height", set.height},
          {"verified", set.status == ZeroSetStatus::verified}};
      if (set.status != ZeroSetStatus::verified) {
        all_verified = false;
        failure = "conductor " + std::to_string(cond) + " label " + chi.label() + ": " +
                  set.diagnostic;
      }
      double main = rvm_main_term(cond, set.height);
      double bound = 5.0 * std::log(static_cast<double>(cond) * (set.height + 2.0));
      if (std::abs(static_cast<double>(set.verified_count) - main) > bound) {
        all_rvm = false;
        failure = "RvM bound fails at conductor " + std::to_string(cond);
      }
    }
  }
  bool pass = all_verified && all_rvm && characters > 0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "2 [zero verification, conductor <= 12, T=100]: %d primitive characters, "
                "sign-change count == argument-principle count %s, RvM bound %s%s%s",
                characters, all_verified ? "everywhere" : "FAILED",
                all_rvm ? "holds" : "FAILED", failure.empty() ? "" : " — ",
                failure.c_str());
  record(log, "2", pass, buf, t.seconds());
}

void criterion_3_explicit_formula(json& log) {
  Timer t;
  ZeroStore store(store_dir("c3"));
  FindZeroOptions opts;
  opts.height_ceiling = 320;
  const double T = 150.0;
  ZeroSetMap sets;
  for (u64 q : {3ull, 4ull, 5ull}) {
    for (const auto& chi : character_group(q)) {
      if (chi.is_principal()) continue;
      auto star = primitive_inducing(chi);
      for (const auto& c : {star, star.conjugate()}) {
        auto key = std::make_pair(c.modulus(), c.label());
        if (!sets.count(key)) sets.emplace(key, store.ensure(c, T, 25, opts));
      }
    }
  }
  bool pass = true;
  double worst_margin = 1e300;
  std::string worst_cell;
  for (u64 q : {3ull, 4ull, 5ull}) {
    for (int i = 0; i < 20; ++i) {
      double x = std::pow(10.0, 3.0 + 3.0 * i / 19.0);
      auto tally = sieve_tally(x, q);
      for (const auto& chi : character_group(q)) {
        if (chi.is_principal()) continue;
        auto ep = truncated_explicit_psi(chi, x, T, sets, false, false);
        cpx sieved = character_sum(chi, tally).psi;
        double err = std::abs(ep.zero_sum - sieved);
        double budget = 3.0 * std::sqrt(x) +
                        x * std::pow(std::log(static_cast<double>(q) * x * T), 2) / T;
        double margin = budget - err;
        if (margin < worst_margin) {
          worst_margin = margin;
          char cell[128];
          std::snprintf(cell, sizeof cell, "q=%llu chi=%s x=%.3g err=%.3g budget=%.3g",
                        static_cast<unsigned long long>(q), chi.label().c_str(), x, err,
                        budget);
          worst_cell = cell;
        }
        if (err > budget) pass = false;
      }
    }
  }
  char buf[300];
  std::snprintf(buf, sizeof buf,
                "3 [explicit-formula cross-check, q in {3,4,5}, 20 points, T=150]: "
                "tightest cell %s",
                worst_cell.c_str());
  log["explicit_formula"] = {{"worst_margin", worst_margin}, {"worst_cell", worst_cell}};
  record(log, "3", pass, buf, t.seconds());
}

void criterion_4_zero_sum(json& log) {
  Timer t;
  ZeroStore store(store_dir("c46"));
  FindZeroOptions opts;
  opts.height_ceiling = 320;
  auto fam = select_family(5, 1.0, std::nullopt);
  ZeroSetMap sets;
  for (const auto& chi : fam.characters()) {
    auto key = std::make_pair(chi.modulus(), chi.label());
    sets.emplace(key, store.ensure(chi, 300.0, 25, opts));
  }
  EFParams p1;
  p1.family = fam;
  p1.delta = mpq_class(1, 50);
  p1.T = std::exp(1.0) * 50;
  p1.M = 100;
  auto z1 = zero_sum_main_term(p1, sets);
  EFParams p2 = p1;
  p2.delta = mpq_class(1, 100);
  p2.T = std::exp(1.0) * 100;
  auto z2 = zero_sum_main_term(p2, sets);

  const double corr = 0.5 * (std::log(2 * std::numbers::pi * std::exp(1.0)) - 1.0 +
                             0.5772156649015329 + std::log(2.0));
  auto corrected = [&](const ZeroSumMainTerm& z, double delta) {
    double main = 0.5 * static_cast<double>(fam.phi_F) * std::log(5.0 / delta) -
                  static_cast<double>(fam.phi_F) * corr;
    return z.lhs / main;
  };

  bool clause_a = z1.ratio >= 0.7 && z1.ratio <= 1.3;
  bool clause_b = std::abs(z2.ratio - 1.0) <= std::abs(z1.ratio - 1.0);
  log["zero_sum_main_term"] = {{"ratio_delta_0.02", z1.ratio},
                               {"ratio_delta_0.01", z2.ratio},
                               {"lhs_0.02", z1.lhs},
                               {"prediction_0.02", z1.prediction},
                               {"corrected_ratio_0.02", corrected(z1, 0.02)},
                               {"corrected_ratio_0.01", corrected(z2, 0.01)}};
  char buf[420];
  std::snprintf(buf, sizeof buf,
                "4 [zero-sum main term, q=5]: ratio(delta=0.02) = %.4f vs pinned [0.7,1.3] "
                "%s; ratio(0.01) = %.4f moves toward 1: %s. The shortfall is the lemma's "
                "O((E+Phi)log(T delta)) constant: against the RvM-integrated main term "
                "(2-pi-e corrected) the ratios are %.4f and %.4f.",
                z1.ratio, clause_a ? "PASS" : "FAIL", z2.ratio, clause_b ? "PASS" : "FAIL",
                corrected(z1, 0.02), corrected(z2, 0.01));
  record(log, "4", clause_a && clause_b, buf, t.seconds());
}

void criterion_5_diophantine(json& log) {
  Timer t;
  std::mt19937_64 rng(987654321);
  auto uniform = [&] {
    return static_cast<double>(rng() >> 11) / static_cast<double>(1ull << 53);
  };
  int count_ok = 0, sound = 0, subset_ok = 0, total = 200;
  for (int inst = 0; inst < total; ++inst) {
    int k = 1 + static_cast<int>(rng() % 3);
    long M = 2 + static_cast<long>(rng() % 7);
    mpz_class N = 50;
    for (int i = 0; i < k; ++i) N *= M;
    std::vector<mp::Real> lambdas;
    for (int i = 0; i < k; ++i)
      lambdas.push_back(mp::Real::of(uniform(), mp::bits_for_digits(30)));
    auto p = SyncProblem::with_M(lambdas, M, N);
    auto brute = sync_brute(p);
    auto bucket = sync_bucket(p);
    // the lemma: at least ceil(N/M^k) - 1 = 49 hits
    if (static_cast<long>(brute.hits.size()) >= 49) ++count_ok;
    bool all_sound = true;
    for (const auto& n : brute.hits) {
      double worst = 0;
      for (const auto& l : p.lambdas) worst = std::max(worst, fractional_distance(n, l));
      if (worst > p.tolerance) all_sound = false;
    }
    for (const auto& n : bucket.hits) {
      double worst = 0;
      for (const auto& l : p.lambdas) worst = std::max(worst, fractional_distance(n, l));
      if (worst > p.tolerance) all_sound = false;
    }
    if (all_sound) ++sound;
    bool subset = true;
    for (const auto& n : bucket.hits)
      if (!std::binary_search(brute.hits.begin(), brute.hits.end(), n)) subset = false;
    if (subset) ++subset_ok;
  }
  bool pass = count_ok == total && sound == total && subset_ok == total;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "5 [Diophantine lemma, 200 instances, k<=3, M<=8, N=50 M^k]: count bound "
                "%d/200, soundness %d/200, bucket subset of brute %d/200",
                count_ok, sound, subset_ok);
  log["diophantine"] = {{"count_ok", count_ok}, {"sound", sound}, {"subset", subset_ok}};
  record(log, "5", pass, buf, t.seconds());
}

void criterion_6_mechanism(json& log) {
  Timer t;
  ExperimentConfig cfg;
  cfg.q = 5;
  cfg.delta = mpq_class(1, 10);
  cfg.C = 30;
  cfg.zero_store_dir = store_dir("c46");
  auto cert = mechanism_demo(cfg);
  log["mechanism_certified"] = cert;

  double L = std::log(25.0 * 10.0);
  double threshold = -0.4 * 2 * L;
  double r_upper = cert["R_interval"][1].get<double>();
  bool clause_a = r_upper <= threshold;
  bool cert_ok = false, neg_ok = false;
  for (const auto& v : cert["verdicts"]) {
    if (v["name"] == "sync_certificate_count_exceeds_floor") cert_ok = v["pass"].get<bool>();
    if (v["name"] == "synchronized_R_negative") neg_ok = v["pass"].get<bool>();
  }

  Timer t2;
  ExperimentConfig ecfg = cfg;
  ecfg.sync_mode = "explicit";
  ecfg.C = 15;
  ecfg.y_max = 18.0;
  auto expl = mechanism_demo(ecfg);
  log["mechanism_explicit"] = expl;
  double diff = std::abs(expl["S_normalized"].get<double>() -
                         expl["R_normalized"].get<double>());
  double sbudget = expl["s_minus_r_budget"].get<double>();
  bool clause_b = diff <= sbudget && expl["y"].get<double>() <= 18.0;

  bool pass = clause_a && clause_b && cert_ok && neg_ok;
  char buf[560];
  std::snprintf(
      buf, sizeof buf,
      "6 [mechanism demo, q=5, delta=0.1, C=30]: certified R over all synchronized y "
      "(pigeonhole count certificate: %s) is [%.4f, %.4f]; pinned threshold "
      "-0.4*Phi*log(q^2/delta) = %.4f: %s. The synchronized value is negative (%s) and "
      "sits %.2f per character above the asymptotic prediction %.4f — the lemma's O(Phi) "
      "constants at delta=0.1. Prime-side variant (y=%.2f <= 18): |S-R| = %.3f <= budget "
      "%.3f: %s.",
      cert_ok ? "nonempty above N^(1/3)" : "FAILED", cert["R_interval"][0].get<double>(),
      r_upper, threshold, clause_a ? "PASS" : "FAIL", neg_ok ? "yes" : "NO",
      cert["deficit_per_character"].get<double>(),
      cert["main_term_prediction"].get<double>(), expl["y"].get<double>(), diff, sbudget,
      clause_b ? "PASS" : "FAIL");
  record(log, "6", pass, buf, t.seconds());
}

void criterion_7_littlewood(json& log) {
  Timer t;
  auto csv = (std::filesystem::current_path() / "acceptance-artifacts" /
              "littlewood_q4.csv").string();
  auto rep = littlewood_demo(4, "1", 1e7, csv);
  double min_psi = rep["min_re_psi_over_sqrt"]["value"].get<double>();
  double at_x = rep["min_re_psi_over_sqrt"]["x"].get<double>();
  bool pass = min_psi <= -1.0;
  log["littlewood"] = rep;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "7 [Littlewood demo]: min over x <= 1e7 of psi(x,chi_-4)/sqrt(x) = %.4f at "
                "x = %.0f (threshold <= -1)",
                min_psi, at_x);
  record(log, "7", pass, buf, t.seconds());
}

void criterion_8_phase_reduce(json& log) {
  Timer t;
  std::mt19937_64 rng(555555);
  int ok = 0;
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    // n uniform with up to 30 digits
    mpz_class n = 1;
    int nd = 5 + static_cast<int>(rng() % 26);
    for (int d = 0; d < nd; ++d) n = n * 10 + static_cast<unsigned long>(rng() % 10);
    mpz_class cap;
    mpz_ui_pow_ui(cap.get_mpz_t(), 10, 30);
    n = n % cap + 1;
    // gamma at 80 digits, truncated to 50 for the first run
    mp::Real g80(mp::bits_for_digits(80));
    mpfr_set_d(g80.raw(), 1.0 + 99.0 * static_cast<double>(rng() % 100000) / 100000.0,
               MPFR_RNDN);
    mp::Real jitter(mp::bits_for_digits(80));
    mpfr_set_d(jitter.raw(), static_cast<double>(rng() % 100000), MPFR_RNDN);
    mpfr_mul_2si(jitter.raw(), jitter.raw(), -70, MPFR_RNDN);
    g80 += jitter;
    mp::Real g50(mp::bits_for_digits(50));
    mpfr_set(g50.raw(), g80.raw(), MPFR_RNDN);
    mpq_class delta(1, 10);
    double a = phase_reduce(n, g50, delta);
    double b = phase_reduce(n, g80, delta);
    double diff = std::abs(a - b);
    diff = std::min(diff, 2 * std::numbers::pi - diff);
    worst = std::max(worst, diff);
    if (diff <= 1e-10) ++ok;
  }
  bool pass = ok == 50;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "8 [phase_reduce precision, 50 pairs, n <= 1e30]: 50-digit vs 80-digit "
                "reductions agree in %d/50 cases, worst drift %.3e (tolerance 1e-10)",
                ok, worst);
  log["phase_reduce"] = {{"ok", ok}, {"worst", worst}};
  record(log, "8", pass, buf, t.seconds());
}

json run_criteria_1_to_8() {
  json log;
  log["criteria"] = json::array();
  criterion_1_parseval(log);
  criterion_2_zero_verification(log);
  criterion_3_explicit_formula(log);
  criterion_4_zero_sum(log);
  criterion_5_diophantine(log);
  criterion_6_mechanism(log);
  criterion_7_littlewood(log);
  criterion_8_phase_reduce(log);
  return log;
}

}  // namespace

int main() {
  std::filesystem::create_directories("acceptance-artifacts");
  std::printf("apvar acceptance suite\n======================\n");
  json first = run_criteria_1_to_8();

  // criterion 9: re-run everything with the same seeds and compare bytes
  {
    Timer t;
    std::vector<Outcome> saved = std::move(g_outcomes);
    g_outcomes.clear();
    std::printf("--- criterion 9: repeating criteria 1-8 for byte-identical reports ---\n");
    json second = run_criteria_1_to_8();
    g_outcomes = std::move(saved);
    bool pass = first.dump(2) == second.dump(2);
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "9 [determinism]: repeated run of criteria 1-8 is %s (report bytes %zu)",
                  pass ? "byte-identical" : "DIFFERENT", first.dump(2).size());
    record(first, "9", pass, buf, t.seconds());
  }

  std::ofstream out("acceptance-artifacts/acceptance_report.json");
  out << first.dump(2) << "\n";
  out.close();

  int failures = 0;
  for (const auto& o : g_outcomes)
    if (!o.pass) ++failures;
  std::printf("======================\nACCEPTANCE SUMMARY: %zu criteria, %d failed\n",
              g_outcomes.size(), failures);
  for (const auto& o : g_outcomes)
    if (!o.pass) std::printf("  failed: criterion %s\n", o.name.c_str());
  return failures;
}
