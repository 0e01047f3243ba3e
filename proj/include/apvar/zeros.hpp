#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "apvar/lfunc.hpp"

namespace apv {

struct CriticalZero {
  mp::Real gamma;       // ordinate, >= 0
  int precision_digits; // significant digits the refinement targeted
  double gamma_d() const { return gamma.to_double(); }
};

enum class ZeroSetStatus { verified, unverified, ingested };

// Critical-line zeros of one primitive character, ordinates in [0, height].
// verified_count is the both-sign count from the argument principle; a set
// is `verified` exactly when own-scan + conjugate-scan counts match it.
struct ZeroSet {
  u64 conductor = 0;
  std::string label;
  std::vector<CriticalZero> zeros;
  double height = 0;
  long verified_count = -1;
  ZeroSetStatus status = ZeroSetStatus::unverified;
  int grid_retries = 0;
  bool central_zero_suspect = false;
  std::string diagnostic;

  std::vector<double> gammas_d() const;
};

struct FindZeroOptions {
  double grid = 0.05;   // initial sign-change grid step
  int max_retries = 4;  // grid halvings on verification failure
  int digits = 25;
  double height_ceiling = 200.0;  // raise explicitly for tall runs
  u64 modulus_ceiling = 100;      // larger conductors must be ingested
};

// Zero sets for chi and its conjugate, sharing one argument-principle count.
std::pair<ZeroSet, ZeroSet> find_zero_pair(const DirichletCharacter& chi_primitive,
                                           double T, const FindZeroOptions& opts = {});
ZeroSet find_zeros(const DirichletCharacter& chi_primitive, double T,
                   const FindZeroOptions& opts = {});

// Riemann-von Mangoldt main term (T/pi) log(qT / 2 pi e) for the both-sign
// count, and the effective acceptance bound with constant 5.
double rvm_main_term(u64 conductor, double T);
bool rvm_one_sided_ok(const ZeroSet& set);

// CSV persistence: header `q,label,gamma,digits`, decimal gammas, rows
// sorted by (q, label, gamma).  Ingested sets come back status=ingested.
void export_zeros(const std::vector<ZeroSet>& sets, const std::string& path);
std::string zeros_csv(const std::vector<ZeroSet>& sets);
std::vector<ZeroSet> ingest_zeros(const std::string& path);

// Compare an ingested set against a locally recomputed one; true when every
// ordinate matches within tol and the counts agree.
bool verify_against_local(const ZeroSet& ingested, double tol = 1e-6,
                          const FindZeroOptions& opts = {});

int multiplicity_at_half(const ZeroSet& set, double threshold = 1e-8);

struct FejerDensity {
  double value = 0;        // sum over chi != chi0 of f((log q / 2pi) gamma)
  double tail_bound = 0;   // RvM-based estimate of the |gamma| > T remainder
  int central_multiplicity = 0;
};

// (conductor,label) keys of the primitive sets needed to assemble statistics
// for all nonprincipal characters mod q.
std::vector<std::pair<u64, std::string>> required_primitive_sets(u64 q);

using ZeroSetMap = std::map<std::pair<u64, std::string>, ZeroSet>;

FejerDensity fejer_density(u64 q, const ZeroSetMap& sets, double T);

// Directory-backed cache of zero sets; computes and persists on miss.
class ZeroStore {
 public:
  explicit ZeroStore(std::string dir);
  const ZeroSet& ensure(const DirichletCharacter& chi_primitive, double T,
                        int digits, const FindZeroOptions& opts = {});
  // fingerprint of the set as persisted (provenance lines in reports)
  static std::string fingerprint(const ZeroSet& set);

 private:
  std::string path_for(u64 conductor, const std::string& label) const;
  std::string dir_;
  ZeroSetMap cache_;
};

}  // namespace apv
