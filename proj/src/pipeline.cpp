#include "apvar/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "apvar/errors.hpp"

namespace apv {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string resolve_zero_store(const std::string& configured) {
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv(kZeroStoreEnv); env && *env) return env;
  return "zero-store";
}

void add_verdict(json& report, const std::string& name, double lhs,
                 const std::string& cmp, double rhs) {
  bool pass = false;
  if (cmp == "<=") pass = lhs <= rhs;
  else if (cmp == ">=") pass = lhs >= rhs;
  else if (cmp == "<") pass = lhs < rhs;
  else if (cmp == ">") pass = lhs > rhs;
  else throw DomainError("add_verdict: unknown comparison " + cmp);
  report["verdicts"].push_back(
      {{"name", name}, {"lhs", lhs}, {"cmp", cmp}, {"rhs", rhs}, {"pass", pass}});
}

bool all_verdicts_pass(const json& report) {
  if (!report.contains("verdicts")) return true;
  for (const auto& v : report["verdicts"])
    if (!v["pass"].get<bool>()) return false;
  return true;
}

namespace {

json budget_json(const BudgetItems& b) {
  return {{"truncation", b.truncation}, {"conductor", b.conductor},
          {"secondary", b.secondary},   {"phase", b.phase},
          {"delta_term", b.delta_term}, {"multiplicity", b.multiplicity},
          {"total", b.total()}};
}

CharacterFamily demo_family(const ExperimentConfig& config) {
  CharacterFamily fam;
  std::string how;
  try {
    fam = pipeline_family(config.q, 1.0,
                          config.g_override > 0 ? std::optional<double>(config.g_override)
                                                : std::nullopt);
    how = "pipeline (w = 1/loglog q, size formula)";
  } catch (const DomainError&) {
    double llq = std::log(std::log(static_cast<double>(config.q)));
    double w = llq > 1.0 ? 1.0 / llq : 1.0;
    fam = select_family(config.q, w, std::nullopt);
    how = "selector fallback (desk-scale q: pipeline size formula is vacuous)";
  }
  if (fam.phi_F < 2) {
    std::string hint = config.q <= 4 ? " (q <= 4 has no complex characters; try q = 5)"
                                     : "";
    throw DomainError("mechanism-demo: family mod " + std::to_string(config.q) +
                      " is empty after discarding real characters" + hint);
  }
  fam.g = fam.g == 0 ? std::log(static_cast<double>(config.q)) : fam.g;
  (void)how;
  return fam;
}

struct DemoSetup {
  CharacterFamily family;
  double C = 0;
  bool c_rule_satisfied = false;
  EFParams params;
  ZeroSetMap sets;
  json provenance;
};

DemoSetup prepare_demo(const ExperimentConfig& config, ZeroStore& store) {
  DemoSetup s;
  s.family = demo_family(config);
  const double d = config.delta.get_d();
  if (!(d > 0 && d < 1)) throw DomainError("mechanism-demo: need 0 < delta < 1");

  // C rule: smallest C in [10, 60] with budget < |main|/2; otherwise the
  // minimizer, flagged.
  auto budget_at = [&](double C) {
    EFParams p;
    p.family = s.family;
    p.delta = config.delta;
    p.T = C / d;
    p.M = C * std::log(p.T);
    return budget_items(p, std::nullopt).total();
  };
  const double main_per_char =
      0.5 * std::log(static_cast<double>(config.q) * config.q / d);
  if (config.C > 0) {
    s.C = config.C;
    s.c_rule_satisfied = budget_at(s.C) < 0.5 * main_per_char;
  } else {
    double best_c = 10, best_v = 1e300;
    for (double C = 10; C <= 60; C += 2) {
      double v = budget_at(C);
      if (v < best_v) {
        best_v = v;
        best_c = C;
      }
      if (v < 0.5 * main_per_char) {
        s.C = C;
        s.c_rule_satisfied = true;
        break;
      }
    }
    if (!s.c_rule_satisfied) s.C = best_c;
  }

  s.params.family = s.family;
  s.params.delta = config.delta;
  s.params.T = s.C / d;
  s.params.M = s.C * std::log(s.params.T);
  s.params.C = s.C;
  s.params.epsilon = config.epsilon;

  FindZeroOptions zopts;
  zopts.digits = config.digits;
  zopts.height_ceiling = s.params.T + 5;
  for (const auto& chi : s.family.characters()) {
    auto star = primitive_inducing(chi);
    for (const auto& c : {star, star.conjugate()}) {
      auto key = std::make_pair(c.modulus(), c.label());
      if (s.sets.count(key)) continue;
      const ZeroSet& zs = store.ensure(c, s.params.T, config.digits, zopts);
      s.sets.emplace(key, zs);
      s.provenance["zero_sets"][std::to_string(key.first) + ":" + key.second] =
          ZeroStore::fingerprint(zs);
    }
  }
  s.provenance["sieve_version"] = kSieveVersion;
  return s;
}

void mechanism_demo_certified(const ExperimentConfig& config, const DemoSetup& s,
                              json& report) {
  const double d = config.delta.get_d();
  const double q = static_cast<double>(config.q);
  const double phi_F = static_cast<double>(s.family.phi_F);
  const double L = std::log(q * q / d);

  // frequencies delta*gamma/2pi, deduplicated by the sync problem itself
  auto gammas = flatten_family_gammas_mp(s.params, s.sets);
  std::vector<mp::Real> lambdas;
  for (const auto& g : gammas) {
    mpfr_prec_t prec = g.prec() + 16;
    mp::Real l = g * mp::Real::of_mpq(config.delta, prec);
    l /= mp::mul_2exp(mp::Real::pi(prec), 1);
    lambdas.push_back(l);
  }
  const long M_int = static_cast<long>(std::ceil(s.params.M));
  const long cubes_per_axis = static_cast<long>(std::ceil(2 * kPi * M_int));

  // N = M^floor(Phi T log(qT) / pi), exact
  const double exponent = phi_F * s.params.T * std::log(q * s.params.T) / kPi;
  if (exponent > 2e5)
    throw CapacityError("mechanism-demo: certificate exponent " + std::to_string(exponent) +
                        " is too large to carry exactly; reduce T = C/delta");
  mpz_class N;
  mpz_ui_pow_ui(N.get_mpz_t(), static_cast<unsigned long>(M_int),
                static_cast<unsigned long>(std::floor(exponent)));
  auto problem = SyncProblem::with_two_pi_M(lambdas, M_int, N);
  const size_t k = problem.k();

  mpz_class axis_pow;
  mpz_ui_pow_ui(axis_pow.get_mpz_t(), static_cast<unsigned long>(cubes_per_axis),
                static_cast<unsigned long>(k));
  mpz_class hit_count_lower = N / axis_pow - 1;
  mpz_class floor_n;
  mpz_root(floor_n.get_mpz_t(), N.get_mpz_t(), 3);
  const bool certified = hit_count_lower > floor_n && hit_count_lower >= 2;

  // every synchronized y displaces each phase by at most 2*pi*tolerance
  const double halfwidth = 2 * kPi * problem.tolerance;
  auto r = r_delta_certified(s.params, halfwidth, s.sets);

  report["sync_certificate"] = {
      {"k_frequencies", k},
      {"M", M_int},
      {"cubes_per_axis", cubes_per_axis},
      {"tolerance", problem.tolerance},
      {"N_digits", mpz_sizeinbase(N.get_mpz_t(), 10)},
      {"N_exponent", std::floor(exponent)},
      {"hit_count_lower_digits", mpz_sizeinbase(hit_count_lower.get_mpz_t(), 10)},
      {"floor_digits", mpz_sizeinbase(floor_n.get_mpz_t(), 10)},
      {"certified_nonempty_above_floor", certified},
  };
  report["n"] = nullptr;
  report["y"] = "(n+1) * " + config.delta.get_num().get_str() + "/" +
                config.delta.get_den().get_str() +
                " for any synchronized n in [N^(1/3), N] (existence certified)";
  report["R_normalized"] = r.R_normalized;
  report["R_interval"] = {r.R_lower, r.R_upper};
  report["main_term_prediction"] = r.main_term_prediction;
  report["budget_items"] = budget_json(r.budget);
  report["phi_F"] = s.family.phi_F;
  report["E_q"] = s.family.E_q;
  report["central_zero_flag"] = r.central_zero_flag;
  report["target_ratio"] = -std::sqrt((1.0 - 3.0 * config.epsilon) / 4.0);
  report["ratio"] = r.R_upper / (phi_F * L);
  report["predicted_G_over_x_lower"] =
      phi_F / static_cast<double>(euler_phi(config.q)) * L * L *
      (1.0 - 2.0 * config.epsilon) / 4.0;

  add_verdict(report, "sync_certificate_count_exceeds_floor",
              static_cast<double>(mpz_sizeinbase(hit_count_lower.get_mpz_t(), 10)), ">=",
              static_cast<double>(mpz_sizeinbase(floor_n.get_mpz_t(), 10)) + 1.0);
  add_verdict(report, "R_upper_below_negativity_threshold", r.R_upper, "<=",
              -0.4 * phi_F * L);
  // The synchronized value is negative for every certified y; the asymptotic
  // main term overshoots it by a per-character constant that only fades as
  // log(q^2/delta) grows.  Both facts are recorded.
  add_verdict(report, "synchronized_R_negative", r.R_upper, "<", 0.0);
  report["deficit_vs_prediction"] = r.R_upper - r.main_term_prediction;
  report["deficit_per_character"] = (r.R_upper - r.main_term_prediction) / phi_F;
}

void mechanism_demo_explicit(const ExperimentConfig& config, const DemoSetup& s,
                             json& report) {
  const double d = config.delta.get_d();
  const double q = static_cast<double>(config.q);
  const double phi_F = static_cast<double>(s.family.phi_F);
  const double L = std::log(q * q / d);

  // dominant zeros: the k lowest ordinates across the family
  auto gammas = flatten_family_gammas_mp(s.params, s.sets);
  std::sort(gammas.begin(), gammas.end(),
            [](const mp::Real& a, const mp::Real& b) { return a < b; });
  size_t k = std::min<size_t>(config.sync_k, gammas.size());
  std::vector<mp::Real> lambdas;
  std::vector<double> lam_d;
  for (size_t i = 0; i < k; ++i) {
    mpfr_prec_t prec = gammas[i].prec() + 16;
    mp::Real l = gammas[i] * mp::Real::of_mpq(config.delta, prec);
    l /= mp::mul_2exp(mp::Real::pi(prec), 1);
    lam_d.push_back(l.to_double());
    lambdas.push_back(std::move(l));
  }

  // best-effort scan n <= y_max/delta - 1 for the most aligned phases
  const long n_cap = static_cast<long>(std::floor(config.y_max / d)) - 1;
  if (n_cap < 1) throw DomainError("mechanism-demo explicit: y_max too small for delta");
  long best_n = 1;
  double best_err = 1e300;
  for (long n = 1; n <= n_cap; ++n) {
    double worst = 0;
    for (double l : lam_d) {
      double f = n * l;
      f -= std::floor(f);
      worst = std::max(worst, std::min(f, 1.0 - f));
    }
    if (worst < best_err) {
      best_err = worst;
      best_n = n;
    }
  }
  double verified_err = 0;
  for (const auto& l : lambdas)
    verified_err = std::max(verified_err, fractional_distance(mpz_class(best_n), l));

  const double y = (static_cast<double>(best_n) + 1.0) * d;
  auto r = r_delta(s.params, y, s.sets);

  SieveOptions sieve;
  sieve.ceiling = config.sieve_ceiling;
  sieve.threads = config.threads;
  auto sv = s_delta_prime_side(s.params, y, sieve);
  const double budget = s_minus_r_budget(s.params, y);

  report["n"] = best_n;
  report["y"] = y;
  report["y_exact"] = "(" + std::to_string(best_n) + "+1) * " +
                      config.delta.get_num().get_str() + "/" +
                      config.delta.get_den().get_str();
  report["sync_best_effort"] = {{"k_frequencies", k},
                                {"max_fractional_error", verified_err},
                                {"target_tolerance", 1.0 / (2 * kPi * s.params.M)},
                                {"n_cap", n_cap}};
  report["R_normalized"] = r.R_normalized;
  report["S_normalized"] = *sv.S_normalized;
  report["R_prime_side_psi"] = *sv.R_prime_side;
  report["main_term_prediction"] = r.main_term_prediction;
  report["budget_items"] = budget_json(r.budget);
  report["s_minus_r_budget"] = budget;
  report["phi_F"] = s.family.phi_F;
  report["E_q"] = s.family.E_q;
  report["imag_residue"] = sv.imag_residue;
  report["ratio"] = r.R_normalized / (phi_F * L);

  add_verdict(report, "prime_side_matches_zero_side",
              std::abs(*sv.S_normalized - r.R_normalized), "<=", budget);
}

}  // namespace

json mechanism_demo(const ExperimentConfig& config) {
  ZeroStore store(resolve_zero_store(config.zero_store_dir));
  auto setup = prepare_demo(config, store);

  json report;
  report["schema"] = kReportSchema;
  report["mode"] = "mechanism-demo";
  report["config"] = {{"q", config.q},
                      {"delta", config.delta.get_num().get_str() + "/" +
                                    config.delta.get_den().get_str()},
                      {"epsilon", config.epsilon},
                      {"sync_mode", config.sync_mode},
                      {"digits", config.digits}};
  report["family"] = json::parse(family_json(setup.family));
  report["C"] = setup.C;
  report["C_rule_satisfied"] = setup.c_rule_satisfied;
  report["T"] = setup.params.T;
  report["M"] = setup.params.M;
  report["verdicts"] = json::array();

  if (config.sync_mode == "certified") {
    mechanism_demo_certified(config, setup, report);
  } else if (config.sync_mode == "explicit") {
    mechanism_demo_explicit(config, setup, report);
  } else {
    throw DomainError("mechanism-demo: unknown sync mode " + config.sync_mode);
  }
  report["provenance"] = setup.provenance;
  if (config.timestamps) report["timestamp"] = static_cast<long>(::time(nullptr));
  return report;
}

json littlewood_demo(u64 q, const std::string& label, double x_ceiling,
                     const std::string& csv_out_path, u64 sieve_ceiling) {
  if (x_ceiling > static_cast<double>(sieve_ceiling))
    throw CapacityError("littlewood-demo: x_ceiling exceeds the sieve ceiling");
  auto chi = character_from_label(q, label);
  if (chi.is_principal())
    throw DomainError("littlewood-demo: character must be nonprincipal");

  const u64 limit = static_cast<u64>(std::floor(x_ceiling));
  // prime powers p^k, k >= 2, with chi(p^k) != 0
  struct Jump {
    u64 x;
    cpx dtheta, dpsi;
  };
  std::vector<Jump> powers;
  u64 root = static_cast<u64>(std::sqrt(x_ceiling)) + 2;
  for (u32 p : simple_primes(static_cast<u32>(root))) {
    u64 pk = static_cast<u64>(p) * p;
    double lp = std::log(static_cast<double>(p));
    while (pk <= limit) {
      powers.push_back({pk, cpx(0, 0), chi(static_cast<i64>(pk % q)) * lp});
      if (pk > limit / p) break;
      pk *= p;
    }
  }
  std::sort(powers.begin(), powers.end(),
            [](const Jump& a, const Jump& b) { return a.x < b.x; });

  std::ofstream csv;
  if (!csv_out_path.empty()) {
    csv.open(csv_out_path);
    csv.precision(12);
    csv << "# apvar littlewood-demo v1\n";
    csv << "x,re_theta_over_sqrt,re_psi_over_sqrt\n";
  }

  cpx theta(0, 0), psi(0, 0);
  double min_theta = 1e300, min_psi = 1e300, min_theta_x = 0, min_psi_x = 0;
  u64 jump_count = 0;
  size_t pi = 0;
  double next_emit = 2.0;
  const double emit_growth = std::pow(std::max(x_ceiling, 4.0) / 2.0, 1.0 / 8000.0);

  auto record = [&](u64 x) {
    double sx = std::sqrt(static_cast<double>(x));
    double rt = theta.real() / sx, rp = psi.real() / sx;
    if (rt < min_theta) {
      min_theta = rt;
      min_theta_x = static_cast<double>(x);
    }
    if (rp < min_psi) {
      min_psi = rp;
      min_psi_x = static_cast<double>(x);
    }
    if (csv.is_open() && (static_cast<double>(x) >= next_emit || x == limit)) {
      csv << x << ',' << rt << ',' << rp << '\n';
      while (next_emit <= static_cast<double>(x)) next_emit *= emit_growth;
    }
  };

  auto apply_powers_below = [&](u64 x) {
    while (pi < powers.size() && powers[pi].x < x) {
      psi += powers[pi].dpsi;
      if (std::abs(powers[pi].dpsi) > 0) {
        ++jump_count;
        record(powers[pi].x);
      }
      ++pi;
    }
  };

  for_primes_in(2, limit, [&](u64 p) {
    apply_powers_below(p);
    cpx v = chi(static_cast<i64>(p % q));
    if (std::abs(v) > 0) {
      double lp = std::log(static_cast<double>(p));
      theta += v * lp;
      psi += v * lp;
      ++jump_count;
      record(p);
    }
  });
  apply_powers_below(limit + 1);

  json report;
  report["schema"] = kReportSchema;
  report["mode"] = "littlewood-demo";
  report["q"] = q;
  report["label"] = label;
  report["x_ceiling"] = x_ceiling;
  report["jump_count"] = jump_count;
  report["min_re_theta_over_sqrt"] = {{"value", min_theta}, {"x", min_theta_x}};
  report["min_re_psi_over_sqrt"] = {{"value", min_psi}, {"x", min_psi_x}};
  if (!csv_out_path.empty()) report["trajectory_csv"] = csv_out_path;
  return report;
}

json cross_check(u64 q, const std::vector<double>& y_grid, const mpq_class& delta,
                 double T, const ExperimentConfig& config) {
  json report;
  report["schema"] = kReportSchema;
  report["mode"] = "cross-check";
  report["q"] = q;
  report["delta"] = delta.get_d();
  report["T"] = T;
  report["cells"] = json::array();
  report["verdicts"] = json::array();
  if (y_grid.empty()) return report;

  std::vector<std::string> labels;
  for (const auto& c : character_group(q))
    if (!c.is_principal()) labels.push_back(c.label());
  EFParams params;
  params.family = family_from_labels(q, labels);
  params.delta = delta;
  params.T = T;
  params.M = 100.0;

  double y_max = *std::max_element(y_grid.begin(), y_grid.end());
  SieveOptions sieve;
  sieve.ceiling = config.sieve_ceiling;
  sieve.threads = config.threads;
  if (std::exp(y_max + delta.get_d()) > static_cast<double>(sieve.ceiling))
    throw CapacityError("cross-check: e^{y+delta} exceeds the sieve ceiling");

  ZeroStore store(resolve_zero_store(config.zero_store_dir));
  FindZeroOptions zopts;
  zopts.digits = config.digits;
  zopts.height_ceiling = T + 5;
  ZeroSetMap sets;
  json prov;
  for (const auto& chi : params.family.characters()) {
    auto star = primitive_inducing(chi);
    for (const auto& c : {star, star.conjugate()}) {
      auto key = std::make_pair(c.modulus(), c.label());
      if (sets.count(key)) continue;
      const ZeroSet& zs = store.ensure(c, T, config.digits, zopts);
      sets.emplace(key, zs);
      prov["zero_sets"][std::to_string(key.first) + ":" + key.second] =
          ZeroStore::fingerprint(zs);
    }
  }
  prov["sieve_version"] = kSieveVersion;

  for (double y : y_grid) {
    auto r = r_delta(params, y, sets);
    auto s = s_delta_prime_side(params, y, sieve);
    double budget = s_minus_r_budget(params, y);
    double diff = std::abs(*s.S_normalized - r.R_normalized);
    report["cells"].push_back({{"y", y},
                               {"R_normalized", r.R_normalized},
                               {"S_normalized", *s.S_normalized},
                               {"R_prime_side_psi", *s.R_prime_side},
                               {"diff", diff},
                               {"budget", budget},
                               {"pass", diff <= budget}});
    add_verdict(report, "cell_y_" + std::to_string(y), diff, "<=", budget);
  }
  report["provenance"] = prov;
  if (config.timestamps) report["timestamp"] = static_cast<long>(::time(nullptr));
  return report;
}

}  // namespace apv
