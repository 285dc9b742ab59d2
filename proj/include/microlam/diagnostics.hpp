#pragma once

#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "microlam/grid.hpp"
#include "microlam/symbol.hpp"

namespace microlam {

// Constants of the low/high frequency controls; unset means not yet calibrated.
struct ControlConstants {
  std::optional<double> C_low, C_high;
  nlohmann::json to_json() const;
};

// Calibrates both controls on a reference two-phase field (phases a, b) with compatibility matrix M = B - A.
ControlConstants calibrate_controls(const PhaseField& chi, int a, int b, std::span<const double> mus, double safety = 2.0);

struct LowerBoundCertificate {
  double eps = 0.0;
  double mu = 0.0;             // eps^{-1/3}
  double f_norm_sq = 0.0;      // ||f||^2
  double low_lhs = 0.0, low_rhs = 0.0;
  double high_lhs = 0.0, high_rhs = 0.0;
  double kappa = 0.0;          // multiplier energy <= kappa * relaxed elastic energy
  double elastic = 0.0;        // relaxed elastic energy of chi
  double surface = 0.0;        // discrete TV of chi
  double measured = 0.0;       // elastic + eps * surface
  double certified = 0.0;      // implied lower bound on the energy
  bool chain_holds = false;    // ||f||^2 <= low_rhs + high_rhs
  bool respects = false;       // certified <= measured
  bool degenerate = false;     // certified <= 0: the split carries no information
  nlohmann::json to_json() const;
};

// Two-well lower-bound chain with mu = eps^{-1/3} for the divergence operator; phases a, b of chi, F the boundary datum.
LowerBoundCertificate lower_bound_certificate(const PhaseField& chi, int a, int b, const Mat& F, double eps,
                                              const ControlConstants& constants);

struct RigidityEstimate {
  double lhs = 0.0;  // sum_j ||chi_jj - <chi_jj>||^2
  double rhs = 0.0;  // exp(c |log eps|^{1/2 + nu}) (relaxed + eps TV)^{1/2}
  double energy = 0.0;
  bool pass = false;
  nlohmann::json to_json() const;
};

RigidityEstimate rigidity_estimate_check(const PhaseField& chi, const Mat& F, double eps, double c_nu, double nu = 0.25);

// Smallest c making every (chi, eps) pair pass; 0 when all left-hand sides vanish.
double smallest_passing_c(std::span<const PhaseField> fields, std::span<const double> eps, const Mat& F, double nu = 0.25);

struct ConeTruncationRow {
  int k = 0;
  double radius = 0.0;     // lambda_k
  double error = 0.0;      // sum_j ||f_j - m_j f_j||^2
  std::vector<double> per_axis;
  double envelope = 0.0;   // mu^{-2} E_el + lambda_k^{-1} TV, uncalibrated
};

struct ConeTruncationProfile {
  double eps = 0.0, nu = 0.25, alpha = 0.0, aperture = 0.0, growth = 6.0;
  std::vector<ConeTruncationRow> rows;
  nlohmann::json to_json() const;
};

// alpha = |log eps|^{-1/(2+nu)}, aperture mu = eps^alpha, radii lambda_k = growth^k eps^{(2+k) alpha - 1}, k = 0..kmax.
ConeTruncationProfile cone_truncation_profile(const PhaseField& chi, const Mat& F, double eps, double nu = 0.25, int kmax = 5,
                                              double growth = 6.0, bool smooth = false);

}  // namespace microlam
