#include "microlam/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "microlam/energy.hpp"
#include "microlam/errors.hpp"

namespace microlam {

namespace {

void check_two_phase(const PhaseField& chi, int a, int b) {
  chi.validate();
  const int k = static_cast<int>(chi.wells.size());
  require(a >= 0 && a < k && b >= 0 && b < k && a != b, ErrorCode::invalid_input, "phase indices must name two distinct wells");
  const Mat& A = chi.wells[static_cast<std::size_t>(a)];
  require(A.cols() == chi.grid.d, ErrorCode::dimension_mismatch, "wells must have d columns for the divergence operator");
}

OperatorSpec div_for(const PhaseField& chi) { return divergence_operator(static_cast<int>(chi.wells.front().rows()), chi.grid.d); }

std::vector<double> centered_diagonal(const PhaseField& chi, int j) {
  std::vector<double> f = chi.component(j, j);
  const double m = mean(chi.grid, f);
  for (double& x : f) x -= m;
  return f;
}

}  // namespace

nlohmann::json ControlConstants::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  if (C_low) j["C_low"] = *C_low;
  if (C_high) j["C_high"] = *C_high;
  return j;
}

ControlConstants calibrate_controls(const PhaseField& chi, int a, int b, std::span<const double> mus, double safety) {
  check_two_phase(chi, a, b);
  const std::vector<double> f = two_phase_scalar(chi, a, b);
  const Mat M = chi.wells[static_cast<std::size_t>(b)] - chi.wells[static_cast<std::size_t>(a)];
  ControlConstants c;
  c.C_low = calibrate_low_freq(chi.grid, f, M, mus, safety);
  c.C_high = calibrate_high_freq(chi.grid, f, mus, safety);
  return c;
}

nlohmann::json LowerBoundCertificate::to_json() const {
  return {{"eps", eps},           {"mu", mu},           {"f_norm_sq", f_norm_sq}, {"low_lhs", low_lhs},
          {"low_rhs", low_rhs},   {"high_lhs", high_lhs}, {"high_rhs", high_rhs},   {"kappa", kappa},
          {"elastic", elastic},   {"surface", surface},   {"measured", measured},   {"certified", certified},
          {"chain_holds", chain_holds}, {"respects", respects}, {"degenerate", degenerate}};
}

LowerBoundCertificate lower_bound_certificate(const PhaseField& chi, int a, int b, const Mat& F, double eps,
                                              const ControlConstants& constants) {
  require(constants.C_low && constants.C_high, ErrorCode::must_calibrate,
          "lower-bound constants are not calibrated; run calibration on a reference field first");
  require(eps > 0.0 && eps < 1.0, ErrorCode::invalid_input, "eps must lie in (0, 1)");
  check_two_phase(chi, a, b);
  const Mat M = chi.wells[static_cast<std::size_t>(b)] - chi.wells[static_cast<std::size_t>(a)];
  require(numerical_rank(M) < chi.grid.d, ErrorCode::compatibility, "B - A has no compatible direction (full column rank)");
  const Grid& g = chi.grid;
  const std::vector<double> f = two_phase_scalar(chi, a, b);

  LowerBoundCertificate c;
  c.eps = eps;
  c.mu = std::cbrt(1.0 / eps);
  c.f_norm_sq = l2_norm_sq(g, f);
  const ControlCheck lo = low_freq_control_check(g, f, M, c.mu, *constants.C_low);
  const ControlCheck hi = high_freq_control_check(g, f, c.mu, *constants.C_high);
  c.low_lhs = lo.lhs;
  c.low_rhs = lo.rhs;
  c.high_lhs = hi.lhs;
  c.high_rhs = hi.rhs;
  c.chain_holds = c.f_norm_sq <= (c.low_rhs + c.high_rhs) * (1.0 + 1e-12);
  // Divergence symbol: the relaxed energy of chi at mode k is |M k/|k||^2 |f^(k)|^2, and f has zero mean.
  c.kappa = 1.0;
  c.elastic = elastic_energy_relaxed(chi, F, div_for(chi)).value;
  c.surface = surface_energy(chi);
  c.measured = c.elastic + eps * c.surface;
  // TV(f) = TV(chi) / |B - A| for a two-phase field.
  const double s = 1.0 / M.norm();
  const double denom = std::max(*constants.C_low * c.kappa, *constants.C_high * s);
  const double slack = 2.0 * g.d * *constants.C_high * std::cbrt(eps);
  c.certified = std::pow(eps, 2.0 / 3.0) * (c.f_norm_sq - slack) / denom;
  c.degenerate = c.certified <= 0.0;
  c.respects = c.certified <= c.measured * (1.0 + 1e-12);
  return c;
}

nlohmann::json RigidityEstimate::to_json() const {
  return {{"lhs", lhs}, {"rhs", rhs}, {"energy", energy}, {"pass", pass}};
}

RigidityEstimate rigidity_estimate_check(const PhaseField& chi, const Mat& F, double eps, double c_nu, double nu) {
  require(eps > 0.0 && eps < 1.0, ErrorCode::invalid_input, "eps must lie in (0, 1)");
  require(nu > 0.0 && nu < 0.5, ErrorCode::invalid_input, "nu must lie in (0, 1/2)");
  chi.validate();
  RigidityEstimate r;
  const int dims = static_cast<int>(std::min(chi.wells.front().rows(), chi.wells.front().cols()));
  for (int j = 0; j < dims; ++j) r.lhs += l2_norm_sq(chi.grid, centered_diagonal(chi, j));
  r.energy = elastic_energy_relaxed(chi, F, div_for(chi)).value + eps * surface_energy(chi);
  r.rhs = std::exp(c_nu * std::pow(std::abs(std::log(eps)), 0.5 + nu)) * std::sqrt(r.energy);
  r.pass = r.lhs <= r.rhs;
  return r;
}

double smallest_passing_c(std::span<const PhaseField> fields, std::span<const double> eps, const Mat& F, double nu) {
  require(fields.size() == eps.size(), ErrorCode::invalid_input, "one eps per field required");
  double c = 0.0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const RigidityEstimate r = rigidity_estimate_check(fields[i], F, eps[i], 0.0, nu);
    if (r.lhs <= r.rhs) continue;
    if (r.energy <= 0.0) return std::numeric_limits<double>::infinity();
    c = std::max(c, std::log(r.lhs / std::sqrt(r.energy)) / std::pow(std::abs(std::log(eps[i])), 0.5 + nu));
  }
  return c;
}

nlohmann::json ConeTruncationProfile::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows)
    rs.push_back({{"k", r.k}, {"radius", r.radius}, {"error", r.error}, {"per_axis", r.per_axis}, {"envelope", r.envelope}});
  return {{"eps", eps}, {"nu", nu}, {"alpha", alpha}, {"aperture", aperture}, {"growth", growth}, {"rows", rs}};
}

ConeTruncationProfile cone_truncation_profile(const PhaseField& chi, const Mat& F, double eps, double nu, int kmax, double growth,
                                              bool smooth) {
  require(eps > 0.0 && eps < 1.0, ErrorCode::invalid_input, "eps must lie in (0, 1)");
  require(nu > 0.0 && nu < 0.5, ErrorCode::invalid_input, "nu must lie in (0, 1/2)");
  require(kmax >= 0, ErrorCode::invalid_input, "kmax must be nonnegative");
  chi.validate();
  const Grid& g = chi.grid;
  ConeTruncationProfile p;
  p.eps = eps;
  p.nu = nu;
  p.growth = growth;
  p.alpha = std::pow(std::abs(std::log(eps)), -1.0 / (2.0 + nu));
  p.aperture = std::pow(eps, p.alpha);
  const double elastic = elastic_energy_relaxed(chi, F, div_for(chi)).value;
  const double tv = surface_energy(chi);
  const int dims = static_cast<int>(std::min<Eigen::Index>({chi.wells.front().rows(), chi.wells.front().cols(), g.d}));
  std::vector<std::vector<double>> fs;
  for (int j = 0; j < dims; ++j) fs.push_back(centered_diagonal(chi, j));
  for (int k = 0; k <= kmax; ++k) {
    ConeTruncationRow row;
    row.k = k;
    row.radius = std::pow(growth, k) * std::pow(eps, (2.0 + k) * p.alpha - 1.0);
    for (int j = 0; j < dims; ++j) {
      const ConeSpec cone{j, p.aperture, row.radius};
      const std::vector<double> mf = cone_multiplier(g, fs[static_cast<std::size_t>(j)], cone, smooth);
      std::vector<double> diff(mf.size());
      for (std::size_t i = 0; i < mf.size(); ++i) diff[i] = fs[static_cast<std::size_t>(j)][i] - mf[i];
      row.per_axis.push_back(l2_norm_sq(g, diff));
      row.error += row.per_axis.back();
    }
    row.envelope = elastic / (p.aperture * p.aperture) + tv / row.radius;
    p.rows.push_back(std::move(row));
  }
  return p;
}

}  // namespace microlam
