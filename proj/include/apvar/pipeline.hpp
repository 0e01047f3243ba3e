#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "apvar/explicit_formula.hpp"
#include "apvar/variance.hpp"

namespace apv {

using json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "apvar-report-v1";
inline constexpr const char* kZeroStoreEnv = "APVAR_ZERO_STORE";

struct ExperimentConfig {
  u64 q = 5;
  mpq_class delta{1, 10};
  double epsilon = 0.1;
  double C = 0;  // 0: search upward from 10 for budget < |main|/2, capped
  std::string sync_mode = "certified";  // "certified" | "explicit"
  int digits = 25;
  u64 sieve_ceiling = 1000000000;
  int threads = 1;
  std::string zero_store_dir;  // empty: $APVAR_ZERO_STORE or ./zero-store
  bool timestamps = false;     // keep reports byte-identical by default
  // explicit-sync knobs
  size_t sync_k = 4;          // dominant zeros to synchronize
  long sync_M = 24;           // bucket tolerance parameter
  double y_max = 18.0;        // prime-side variant ceiling on y
  double g_override = 0;      // pipeline family g(q); 0 = log q
};

std::string resolve_zero_store(const std::string& configured);

// Verdicts are stored as (name, lhs, cmp, rhs, pass) tuples so that an
// external checker can re-derive every PASS from the JSON alone.
void add_verdict(json& report, const std::string& name, double lhs,
                 const std::string& cmp, double rhs);
bool all_verdicts_pass(const json& report);

json mechanism_demo(const ExperimentConfig& config);

json littlewood_demo(u64 q, const std::string& label, double x_ceiling,
                     const std::string& csv_out_path = "", u64 sieve_ceiling = 1000000000);

json cross_check(u64 q, const std::vector<double>& y_grid, const mpq_class& delta,
                 double T, const ExperimentConfig& config = {});

}  // namespace apv
