// apvar: prime-progression variances, Dirichlet L zeros, explicit-formula
// averages, and Diophantine synchronization experiments.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "apvar/errors.hpp"
#include "apvar/pipeline.hpp"

using namespace apv;

namespace {

mpq_class parse_rational(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) {
    // decimal like 0.1 -> exact rational
    auto dot = s.find('.');
    if (dot == std::string::npos) return mpq_class(std::stol(s));
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    long den = 1;
    for (size_t i = 0; i < s.size() - dot - 1; ++i) den *= 10;
    mpq_class r(std::stol(digits), den);
    r.canonicalize();
    return r;
  }
  mpq_class r(s);
  r.canonicalize();
  return r;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  std::istringstream is(s);
  std::string piece;
  while (std::getline(is, piece, ',')) out.push_back(std::stod(piece));
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os) throw CapacityError("cannot open output file " + path);
  os << text;
}

json variance_json(const VarianceReport& r) {
  json j;
  j["schema"] = kReportSchema;
  j["mode"] = "variance";
  j["q"] = r.q;
  j["x"] = r.x;
  j["G"] = r.G;
  j["V"] = r.V;
  j["hooley_ratio"] = r.hooley_ratio;
  if (r.parseval_residual_G >= 0) {
    j["parseval_residual_G"] = r.parseval_residual_G;
    j["parseval_residual_V"] = r.parseval_residual_V;
  }
  if (!r.per_character_contributions.empty()) {
    json c;
    for (const auto& [label, v] : r.per_character_contributions) c[label] = v;
    j["per_character_contributions"] = c;
  }
  if (r.x_below_q) j["flags"] = json::array({"x_below_q"});
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arithmetic-progression variance laboratory"};
  app.require_subcommand(1);

  std::string zero_store, config_path;
  u64 sieve_ceiling = 1000000000;
  int threads = 0;
  app.add_option("--zero-store", zero_store,
                 "zero set cache directory (default $APVAR_ZERO_STORE or ./zero-store)");
  app.add_option("--sieve-ceiling", sieve_ceiling, "honest-sieving limit");
  app.add_option("--threads", threads, "sieve worker threads (0 = hardware)");
  app.add_option("--config", config_path, "JSON config file; flags override");

  // variance
  auto* sc_var = app.add_subcommand("variance", "G(x;q), V(x;q) for one (q, x)");
  u64 var_q = 3;
  double var_x = 1e4;
  bool parseval_check = false;
  std::string var_out, var_save_tally, var_load_tally;
  sc_var->add_option("--q", var_q)->required();
  sc_var->add_option("--x", var_x)->required();
  sc_var->add_flag("--parseval-check", parseval_check);
  sc_var->add_option("--out", var_out, "JSON output path (default stdout)");
  sc_var->add_option("--save-tally", var_save_tally, "write the binary tally cache here");
  sc_var->add_option("--load-tally", var_load_tally, "reuse a binary tally cache");

  // hooley-scan
  auto* sc_scan = app.add_subcommand("hooley-scan", "variance table over a (q, x) grid");
  u64 scan_qmin = 3, scan_qmax = 10;
  std::string scan_grid = "1e4", scan_out;
  sc_scan->add_option("--q-min", scan_qmin)->required();
  sc_scan->add_option("--q-max", scan_qmax)->required();
  sc_scan->add_option("--x-grid", scan_grid, "comma-separated x values")->required();
  sc_scan->add_option("--out", scan_out, "CSV output path")->required();

  // zeros
  auto* sc_zeros = app.add_subcommand("zeros", "critical-line zeros of primitive characters");
  u64 zq = 4;
  double zT = 50;
  int zdigits = 25;
  bool zverify = false;
  std::string zout, zin, zlabel;
  sc_zeros->add_option("--q", zq, "conductor")->required();
  sc_zeros->add_option("--height", zT);
  sc_zeros->add_option("--digits", zdigits);
  sc_zeros->add_flag("--verify", zverify, "verify an ingested table against recomputation");
  sc_zeros->add_option("--label", zlabel, "restrict to one character label");
  sc_zeros->add_option("--in", zin, "ingest an existing zero CSV instead of computing");
  sc_zeros->add_option("--out", zout, "CSV output path (default stdout)");

  // family
  auto* sc_fam = app.add_subcommand("family", "conductor-controlled character family");
  u64 fq = 11;
  double fw = 1.0;
  std::string fsize = "max", fout;
  sc_fam->add_option("--q", fq)->required();
  sc_fam->add_option("--w", fw);
  sc_fam->add_option("--size", fsize, "even integer or 'max'");
  sc_fam->add_option("--out", fout, "JSON output path (default stdout)");

  // explicit-formula
  auto* sc_ef = app.add_subcommand("explicit-formula", "R_delta / S_delta at one y");
  u64 eq = 5;
  std::string edelta = "1/10", efam_path, eout;
  double eT = 150, ey = 6.0, eM = 100;
  bool eprime = false;
  int edigits = 25;
  sc_ef->add_option("--q", eq)->required();
  sc_ef->add_option("--delta", edelta)->required();
  sc_ef->add_option("--height", eT);
  sc_ef->add_option("--y", ey)->required();
  sc_ef->add_option("--M", eM);
  sc_ef->add_option("--digits", edigits);
  sc_ef->add_flag("--prime-side", eprime, "also integrate the sieved prime side");
  sc_ef->add_option("--family", efam_path, "family JSON (default: all nonprincipal)");
  sc_ef->add_option("--out", eout);

  // synchronize
  auto* sc_sync = app.add_subcommand("synchronize", "simultaneous Diophantine alignment");
  std::string sfreq, sout, stol = "1/M", smethod = "bucket", sN = "1000", sfloor;
  long sM = 6;
  sc_sync->add_option("--frequencies", sfreq, "CSV with header lambda,digits")->required();
  sc_sync->add_option("--M", sM)->required();
  sc_sync->add_option("--N", sN)->required();
  sc_sync->add_option("--tolerance", stol, "'1/M' or '1/2piM'");
  sc_sync->add_option("--method", smethod, "bucket | brute");
  sc_sync->add_option("--floor", sfloor, "lowest-hit floor (default N^(1/3))");
  sc_sync->add_option("--out", sout);

  // mechanism-demo
  auto* sc_mech = app.add_subcommand("mechanism-demo", "conductor/zero/sync pipeline");
  ExperimentConfig mech;
  std::string mech_delta = "1/10", mech_out;
  sc_mech->add_option("--q", mech.q);
  sc_mech->add_option("--delta", mech_delta);
  sc_mech->add_option("--epsilon", mech.epsilon);
  sc_mech->add_option("--C", mech.C, "0 searches upward from 10");
  sc_mech->add_option("--sync", mech.sync_mode, "certified | explicit");
  sc_mech->add_option("--digits", mech.digits);
  sc_mech->add_option("--sync-k", mech.sync_k, "explicit mode: zeros to align");
  sc_mech->add_option("--y-max", mech.y_max, "explicit mode: prime-side ceiling on y");
  sc_mech->add_option("--g", mech.g_override, "family pipeline g(q) (default log q)");
  sc_mech->add_flag("--timestamps", mech.timestamps);
  sc_mech->add_option("--out", mech_out);

  // littlewood-demo
  auto* sc_lit = app.add_subcommand("littlewood-demo", "theta/psi trajectory scan");
  u64 lq = 4;
  std::string llabel = "1", lcsv, lreport;
  double lceil = 1e7;
  sc_lit->add_option("--q", lq)->required();
  sc_lit->add_option("--label", llabel)->required();
  sc_lit->add_option("--x-ceiling", lceil);
  sc_lit->add_option("--out", lcsv, "trajectory CSV path")->required();
  sc_lit->add_option("--report", lreport, "JSON report path (default stdout)");

  // cross-check
  auto* sc_cc = app.add_subcommand("cross-check", "S_delta vs R_delta over a y grid");
  u64 cq = 3;
  std::string cdelta = "1/4", cgrid = "4,6,8,10,12", ccout;
  double cT = 150;
  int cdigits = 25;
  sc_cc->add_option("--q", cq)->required();
  sc_cc->add_option("--delta", cdelta);
  sc_cc->add_option("--height", cT);
  sc_cc->add_option("--y-grid", cgrid);
  sc_cc->add_option("--digits", cdigits);
  sc_cc->add_option("--out", ccout);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) {
      std::ifstream cf(config_path);
      if (!cf) throw CapacityError("cannot open config file " + config_path);
      json cfg = json::parse(cf);
      if (zero_store.empty() && cfg.contains("zero_store"))
        zero_store = cfg["zero_store"].get<std::string>();
      if (sieve_ceiling == 1000000000 && cfg.contains("sieve_ceiling"))
        sieve_ceiling = cfg["sieve_ceiling"].get<u64>();
      if (threads == 0 && cfg.contains("threads")) threads = cfg["threads"].get<int>();
    }
    SieveOptions sieve{sieve_ceiling, threads};

    if (*sc_var) {
      PrimeTally tally;
      if (!var_load_tally.empty()) {
        tally = load_tally(var_load_tally);
        if (tally.q != var_q || tally.x != var_x)
          throw SchemaError("tally cache keyed to (q=" + std::to_string(tally.q) +
                                ", x=" + std::to_string(tally.x) +
                                "), not the requested (q, x)",
                            0);
      } else {
        tally = sieve_tally(var_x, var_q, sieve);
      }
      if (!var_save_tally.empty()) save_tally(tally, var_save_tally);
      auto rep = parseval_check ? variance_with_check(tally) : variance_direct(tally);
      write_text(var_out, variance_json(rep).dump(2) + "\n");
    } else if (*sc_scan) {
      auto scan = hooley_scan(scan_qmin, scan_qmax, parse_grid(scan_grid), sieve);
      write_text(scan_out, hooley_scan_csv(scan));
    } else if (*sc_zeros) {
      if (!zin.empty()) {
        auto sets = ingest_zeros(zin);
        json j;
        j["schema"] = kReportSchema;
        j["mode"] = "zeros-ingest";
        for (auto& s : sets) {
          json e = {{"q", s.conductor},
                    {"label", s.label},
                    {"count", s.zeros.size()},
                    {"height", s.height},
                    {"status", "ingested"}};
          if (zverify) e["verified_against_local"] = verify_against_local(s);
          j["sets"].push_back(e);
        }
        std::cout << j.dump(2) << "\n";
      } else {
        FindZeroOptions opts;
        opts.digits = zdigits;
        opts.height_ceiling = std::max(200.0, zT + 5);
        std::vector<ZeroSet> sets;
        for (const auto& chi : character_group(zq)) {
          if (!chi.is_primitive() || (zq > 1 && chi.is_principal())) continue;
          if (!zlabel.empty() && chi.label() != zlabel) continue;
          sets.push_back(find_zeros(chi, zT, opts));
          std::cerr << "q=" << zq << " label=" << chi.label() << ": "
                    << sets.back().zeros.size() << " zeros to " << sets.back().height
                    << ", status "
                    << (sets.back().status == ZeroSetStatus::verified ? "verified"
                                                                      : "unverified")
                    << "\n";
        }
        write_text(zout, zeros_csv(sets));
      }
    } else if (*sc_fam) {
      std::optional<u64> size;
      if (fsize != "max") size = std::stoull(fsize);
      auto fam = select_family(fq, fw, size);
      write_text(fout, family_json(fam));
    } else if (*sc_ef) {
      EFParams params;
      if (!efam_path.empty()) {
        std::ifstream ff(efam_path);
        std::stringstream buf;
        buf << ff.rdbuf();
        params.family = family_from_json(buf.str());
      } else {
        std::vector<std::string> labels;
        for (const auto& c : character_group(eq))
          if (!c.is_principal()) labels.push_back(c.label());
        params.family = family_from_labels(eq, labels);
      }
      params.delta = parse_rational(edelta);
      params.T = eT;
      params.M = eM;
      ZeroStore store(resolve_zero_store(zero_store));
      FindZeroOptions zopts;
      zopts.digits = edigits;
      zopts.height_ceiling = eT + 5;
      ZeroSetMap sets;
      for (const auto& chi : params.family.characters()) {
        auto star = primitive_inducing(chi);
        for (const auto& c : {star, star.conjugate()}) {
          auto key = std::make_pair(c.modulus(), c.label());
          if (!sets.count(key)) sets.emplace(key, store.ensure(c, eT, edigits, zopts));
        }
      }
      auto r = r_delta(params, ey, sets);
      json j;
      j["schema"] = kReportSchema;
      j["mode"] = "explicit-formula";
      j["q"] = eq;
      j["delta"] = params.delta_d();
      j["T"] = eT;
      j["y"] = ey;
      j["R_normalized"] = r.R_normalized;
      j["main_term_prediction"] = r.main_term_prediction;
      j["budget_items"] = {{"truncation", r.budget.truncation},
                           {"conductor", r.budget.conductor},
                           {"secondary", r.budget.secondary},
                           {"phase", r.budget.phase},
                           {"delta_term", r.budget.delta_term},
                           {"multiplicity", r.budget.multiplicity},
                           {"total", r.budget.total()}};
      if (eprime) {
        auto s = s_delta_prime_side(params, ey, sieve);
        j["S_normalized"] = *s.S_normalized;
        j["R_prime_side_psi"] = *s.R_prime_side;
        j["s_minus_r_budget"] = s_minus_r_budget(params, ey);
      }
      write_text(eout, j.dump(2) + "\n");
    } else if (*sc_sync) {
      std::ifstream ff(sfreq);
      if (!ff) throw SchemaError("cannot open frequency file " + sfreq, 0);
      std::string line;
      long lineno = 0;
      std::vector<mp::Real> lambdas;
      while (std::getline(ff, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line == "lambda,digits") continue;
        auto comma = line.find(',');
        std::string val = line.substr(0, comma);
        int digits = comma == std::string::npos ? 30 : std::stoi(line.substr(comma + 1));
        lambdas.push_back(mp::Real::parse(val, mp::bits_for_digits(digits) + 16));
      }
      mpz_class N(sN);
      auto problem = stol == "1/2piM" ? SyncProblem::with_two_pi_M(lambdas, sM, N)
                                      : SyncProblem::with_M(lambdas, sM, N);
      auto result = smethod == "brute" ? sync_brute(problem) : sync_bucket(problem);
      std::optional<mpz_class> fl;
      if (!sfloor.empty() && sfloor != "auto") fl = mpz_class(sfloor);
      auto low = sync_lowest_in_range(problem, result, fl);
      json j;
      j["schema"] = kReportSchema;
      j["mode"] = "synchronize";
      j["k"] = problem.k();
      j["M"] = sM;
      j["tolerance"] = problem.tolerance;
      j["N"] = problem.N.get_str();
      j["method"] = smethod;
      j["count_lower_bound"] = result.count_lower_bound;
      j["hits"] = json::array();
      for (const auto& n : result.hits) j["hits"].push_back(n.get_str());
      j["max_fractional_error"] = result.max_fractional_error;
      j["all_verified"] = result.all_verified;
      j["lowest_in_range"] = {{"floor", low.floor_used.get_str()},
                              {"guaranteed", low.guaranteed},
                              {"n", low.n ? json(low.n->get_str()) : json(nullptr)},
                              {"note", low.note}};
      write_text(sout, j.dump(2) + "\n");
    } else if (*sc_mech) {
      mech.delta = parse_rational(mech_delta);
      mech.zero_store_dir = resolve_zero_store(zero_store);
      mech.sieve_ceiling = sieve_ceiling;
      mech.threads = threads;
      auto report = mechanism_demo(mech);
      write_text(mech_out, report.dump(2) + "\n");
      if (!all_verdicts_pass(report)) return 2;
    } else if (*sc_lit) {
      auto report = littlewood_demo(lq, llabel, lceil, lcsv, sieve_ceiling);
      write_text(lreport, report.dump(2) + "\n");
    } else if (*sc_cc) {
      ExperimentConfig cfg;
      cfg.zero_store_dir = resolve_zero_store(zero_store);
      cfg.sieve_ceiling = sieve_ceiling;
      cfg.threads = threads;
      cfg.digits = cdigits;
      auto report = cross_check(cq, parse_grid(cgrid), parse_rational(cdelta), cT, cfg);
      write_text(ccout, report.dump(2) + "\n");
      if (!all_verdicts_pass(report)) return 2;
    }
  } catch (const PrecisionError& e) {
    std::cerr << "precision error: " << e.what() << "\n";
    return 3;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 4;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return 5;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 6;
  }
  return 0;
}
