#include "apvar/family.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "apvar/errors.hpp"

namespace apv {

using nlohmann::ordered_json;

std::vector<DirichletCharacter> CharacterFamily::characters() const {
  std::vector<DirichletCharacter> out;
  out.reserve(members.size());
  for (const auto& label : members) out.push_back(character_from_label(q, label));
  return out;
}

namespace {

double variance_from_counts(u64 q, const std::map<u64, u64>& counts) {
  const double lq = std::log(static_cast<double>(q));
  double sum = 0;
  for (const auto& [d, count] : counts) {
    double diff = std::log(static_cast<double>(d)) - lq;
    sum += static_cast<double>(count) * diff * diff;
  }
  return sum / static_cast<double>(euler_phi(q));
}

}  // namespace

double conductor_variance(u64 q) {
  if (q < 3) throw DomainError("conductor_variance: q must be >= 3");
  std::map<u64, u64> counts;
  for (const auto& chi : character_group(q)) ++counts[chi.conductor()];
  return variance_from_counts(q, counts);
}

double conductor_variance_grouped(u64 q) {
  if (q < 3) throw DomainError("conductor_variance: q must be >= 3");
  std::map<u64, u64> counts;
  for (u64 d = 1; d <= q; ++d) {
    if (q % d != 0) continue;
    u64 c = primitive_character_count(d);
    if (c > 0) counts[d] = c;
  }
  return variance_from_counts(q, counts);
}

CharacterFamily select_family(u64 q, double w, std::optional<u64> target_size) {
  if (q < 3) throw DomainError("select_family: q must be >= 3");
  if (!(w > 0))
    throw DomainError("select_family: w must be positive");
  const double lq = std::log(static_cast<double>(q));
  const double llq = std::log(lq);
  const double threshold = llq / w;

  // Conjugate pairs surviving the conductor and realness filters.
  struct Pair {
    u64 conductor;
    std::string a, b;  // labels; a == b never happens (real chars dropped)
  };
  std::vector<Pair> pairs;
  std::set<std::string> seen;
  for (const auto& chi : character_group(q)) {
    if (chi.is_real()) continue;
    double deficit = std::abs(std::log(static_cast<double>(chi.conductor())) - lq);
    if (deficit > threshold) continue;
    if (seen.count(chi.label())) continue;
    auto bar_label = chi.conjugate().label();
    seen.insert(chi.label());
    seen.insert(bar_label);
    pairs.push_back({chi.conductor(), std::min(chi.label(), bar_label),
                     std::max(chi.label(), bar_label)});
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    if (x.conductor != y.conductor) return x.conductor > y.conductor;
    return x.a < y.a;
  });

  u64 keep_pairs = pairs.size();
  if (target_size) {
    if (*target_size % 2 != 0)
      throw DomainError("select_family: target_size must be even (conjugate pairs)");
    if (*target_size > 2 * pairs.size())
      throw DomainError("select_family: target_size " + std::to_string(*target_size) +
                        " exceeds the " + std::to_string(2 * pairs.size()) +
                        " surviving characters mod " + std::to_string(q));
    keep_pairs = *target_size / 2;
  }

  CharacterFamily fam;
  fam.q = q;
  fam.w = w;
  fam.threshold = threshold;
  fam.threshold_vacuous = threshold >= lq;
  for (u64 i = 0; i < keep_pairs; ++i) {
    fam.members.push_back(pairs[i].a);
    fam.members.push_back(pairs[i].b);
    fam.E_q += 2.0 * (lq - std::log(static_cast<double>(pairs[i].conductor)));
  }
  std::sort(fam.members.begin(), fam.members.end());
  fam.phi_F = fam.members.size();
  return fam;
}

CharacterFamily pipeline_family(u64 q, double K, std::optional<double> g) {
  if (q < 3) throw DomainError("pipeline_family: q must be >= 3");
  const double lq = std::log(static_cast<double>(q));
  const double llq = std::log(lq);
  const double gv = g.value_or(lq);
  double raw = static_cast<double>(euler_phi(q)) * gv / (2.0 * lq) * (1.0 - K / (llq * llq));
  long long half = static_cast<long long>(std::floor(raw));
  if (half < 1)
    throw DomainError("pipeline_family: formula size 2*floor(" + std::to_string(raw) +
                      ") < 2 at q = " + std::to_string(q) +
                      " (q too small for the pipeline; pick the family explicitly)");
  u64 requested = 2 * static_cast<u64>(half);
  double w = 1.0 / llq;
  auto all = select_family(q, w, std::nullopt);
  u64 realized = std::min<u64>(requested, all.phi_F);
  if (realized < 2)
    throw DomainError("pipeline_family: no complex characters survive at q = " +
                      std::to_string(q));
  auto fam = select_family(q, w, realized);
  fam.g = gv;
  fam.requested_size = requested;
  return fam;
}

CharacterFamily family_from_labels(u64 q, std::vector<std::string> labels) {
  CharacterFamily fam;
  fam.q = q;
  const double lq = std::log(static_cast<double>(q));
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  for (const auto& label : labels) {
    auto chi = character_from_label(q, label);
    auto bar = chi.conjugate().label();
    if (std::find(labels.begin(), labels.end(), bar) == labels.end())
      throw DomainError("family_from_labels: not conjugation-closed (missing " + bar + ")");
    fam.members.push_back(label);
    fam.E_q += lq - std::log(static_cast<double>(chi.conductor()));
  }
  fam.phi_F = fam.members.size();
  return fam;
}

std::string family_json(const CharacterFamily& fam) {
  ordered_json j;
  j["schema"] = "apvar-family-v1";
  j["q"] = fam.q;
  j["members"] = fam.members;
  j["phi_F"] = fam.phi_F;
  j["E_q"] = fam.E_q;
  j["w"] = fam.w;
  j["threshold"] = fam.threshold;
  j["threshold_vacuous"] = fam.threshold_vacuous;
  if (fam.g != 0) j["g"] = fam.g;
  if (fam.requested_size != 0) j["requested_size"] = fam.requested_size;
  return j.dump(2) + "\n";
}

CharacterFamily family_from_json(const std::string& text) {
  auto j = ordered_json::parse(text);
  if (!j.contains("q") || !j.contains("members"))
    throw SchemaError("family_from_json: missing q or members", 0);
  CharacterFamily fam = family_from_labels(
      j["q"].get<u64>(), j["members"].get<std::vector<std::string>>());
  if (j.contains("w")) fam.w = j["w"].get<double>();
  if (j.contains("threshold")) fam.threshold = j["threshold"].get<double>();
  if (j.contains("threshold_vacuous")) fam.threshold_vacuous = j["threshold_vacuous"].get<bool>();
  if (j.contains("g")) fam.g = j["g"].get<double>();
  if (j.contains("requested_size")) fam.requested_size = j["requested_size"].get<u64>();
  return fam;
}

}  // namespace apv
