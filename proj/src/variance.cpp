#include "apvar/variance.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "apvar/errors.hpp"

namespace apv {

VarianceReport variance_direct(const PrimeTally& tally) {
  if (tally.q < 3)
    throw DomainError("variance: q must be >= 3 (log q weighting degenerate)");
  VarianceReport r;
  r.q = tally.q;
  r.x = tally.x;
  r.x_below_q = tally.x < static_cast<double>(tally.q);

  const double phi = static_cast<double>(euler_phi(tally.q));
  const double mean_theta = tally.x / phi;

  double psi_total = tally.psi_coprime_total();
  const double mean_psi = psi_total / phi;

  double G = 0, V = 0;
  for (u64 a = 0; a < tally.q; ++a) {
    if (std::gcd(a, tally.q) != 1) continue;
    double dt = tally.theta_at(a) - mean_theta;
    double dp = tally.psi_at(a) - mean_psi;
    G += dt * dt;
    V += dp * dp;
  }
  r.G = G;
  r.V = V;
  r.hooley_ratio = G / (tally.x * std::log(static_cast<double>(tally.q)));
  return r;
}

VarianceReport variance_parseval(const std::vector<CharacterSum>& sums) {
  if (sums.empty()) throw DomainError("variance_parseval: no character sums");
  const u64 q = sums[0].q;
  const double x = sums[0].x;
  const u64 phi_int = euler_phi(q);
  if (sums.size() != phi_int)
    throw DomainError("variance_parseval: need all " + std::to_string(phi_int) +
                      " characters mod " + std::to_string(q) + ", got " +
                      std::to_string(sums.size()));
  if (q < 3) throw DomainError("variance: q must be >= 3");

  auto group = character_group(q);
  VarianceReport r;
  r.q = q;
  r.x = x;
  r.x_below_q = x < static_cast<double>(q);
  const double phi = static_cast<double>(phi_int);

  double G = 0, V = 0;
  for (size_t i = 0; i < sums.size(); ++i) {
    if (sums[i].q != q || sums[i].x != x)
      throw DomainError("variance_parseval: mixed (q, x) in character sums");
    bool principal = group[i].is_principal();
    if (sums[i].label != group[i].label())
      throw DomainError("variance_parseval: sums must be in character_group order");
    cpx dt = sums[i].theta - (principal ? cpx(x, 0) : cpx(0, 0));
    double contrib = std::norm(dt) / phi;
    r.per_character_contributions.emplace_back(sums[i].label, contrib);
    G += contrib;
    if (!principal) V += std::norm(sums[i].psi) / phi;
  }
  r.G = G;
  r.V = V;
  r.hooley_ratio = G / (x * std::log(static_cast<double>(q)));
  return r;
}

VarianceReport variance_with_check(const PrimeTally& tally) {
  auto direct = variance_direct(tally);
  auto pars = variance_parseval(all_character_sums(tally.q, tally));
  pars.parseval_residual_G = std::abs(direct.G - pars.G);
  pars.parseval_residual_V = std::abs(direct.V - pars.V);
  // Report the direct values as primary; residuals quantify the identity.
  pars.G = direct.G;
  pars.V = direct.V;
  pars.hooley_ratio = direct.hooley_ratio;
  return pars;
}

HooleyScan hooley_scan(u64 q_min, u64 q_max, const std::vector<double>& x_grid,
                       const SieveOptions& opts) {
  HooleyScan scan;
  if (q_min > q_max || x_grid.empty()) return scan;
  for (double x : x_grid) {
    for (u64 q = q_min; q <= q_max; ++q) {
      auto rep = variance_direct(sieve_tally(x, q, opts));
      scan.rows.push_back({q, x, rep.G, rep.V, rep.hooley_ratio, rep.x_below_q});
    }
  }
  // windowed averages over (Q, 2Q] for every window inside [q_min, q_max]
  for (double x : x_grid) {
    if (x <= 16.0) continue;  // logloglog x undefined this low
    double l3 = std::log(std::log(std::log(x)));
    for (u64 Q = q_min; 2 * Q <= q_max; ++Q) {
      double sum = 0;
      for (const auto& row : scan.rows)
        if (row.x == x && row.q > Q && row.q <= 2 * Q) sum += row.G;
      scan.windows.push_back({Q, x, sum / static_cast<double>(Q) / (x * l3 * l3)});
    }
  }
  return scan;
}

std::string hooley_scan_csv(const HooleyScan& scan) {
  std::ostringstream os;
  os << "# apvar hooley-scan v1\n";
  os << "kind,q,x,G,V,hooley_ratio,window_avg,flags\n";
  os.precision(17);
  for (const auto& r : scan.rows)
    os << "row," << r.q << ',' << r.x << ',' << r.G << ',' << r.V << ','
       << r.hooley_ratio << ",," << (r.x_below_q ? "x_below_q" : "") << '\n';
  for (const auto& w : scan.windows)
    os << "window," << w.Q << ',' << w.x << ",,,," << w.avg << ",\n";
  return os.str();
}

}  // namespace apv
