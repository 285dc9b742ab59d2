#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "microlam/constructions.hpp"
#include "microlam/rational.hpp"

namespace microlam {

enum class SweepConstruction { branching, t3 };

struct SweepConfig {
  SweepConstruction construction = SweepConstruction::branching;
  std::vector<double> eps;  // strictly decreasing, in (0, 1)

  // Branching: N = max(2, round(N_scale * eps^{-1/3})) unless N_fixed.
  int d = 3;
  double theta = 0.3;
  double lambda = 0.5;
  BranchingVariant variant = BranchingVariant::d_dim;
  double N_scale = 1.0;
  std::optional<int> N_fixed;

  // T3: paper schedule unless m_fixed / r_fixed.
  std::optional<int> m_fixed;
  std::optional<double> r_fixed;
  std::string F = "S3";

  // Rasterized verification on the first raster_rows rows (largest eps); -1 = all rows.
  int raster_rows = 0;
  int min_cells = 4;    // finest feature must span this many cells
  int max_grid = 128;   // cap on N_g
  std::uint64_t seed = 1;

  void validate() const;
  static SweepConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct RasterCheck {
  int grid = 0;
  bool policy_met = false;  // finest feature >= min_cells cells
  double feature = 0.0;     // finest feature width
  double E_el_pair = 0.0;   // midpoint quadrature of the rasterized pair
  double E_el_relaxed = 0.0;
  double E_surf = 0.0;      // discrete anisotropic TV
  double exact_surface_aniso = 0.0;
  double elastic_error = 0.0;  // |raster - exact|
  double elastic_bound = 0.0;  // raster_elastic_bound
  bool within_bound = false;
  nlohmann::json to_json() const;
};

struct SweepRow {
  double eps = 0.0;
  bool ok = false;
  std::string error;
  nlohmann::json params = nlohmann::json::object();  // parameters actually used
  double E_el_pair = 0.0;
  std::optional<double> E_el_relaxed;
  double E_surf = 0.0;
  double E_total = 0.0;
  std::optional<bool> interface_pass;
  double interface_residual = 0.0;
  std::optional<RasterCheck> raster;
  std::string checks() const;
  nlohmann::json to_json() const;
};

struct SweepTable {
  SweepConfig config;
  std::vector<SweepRow> rows;
  nlohmann::json to_json() const;
};

SweepTable run_sweep(const SweepConfig& cfg);

// Log-spaced eps from 10^-a to 10^-b (a < b) with the given number of points per decade.
std::vector<double> log_spaced_eps(double a, double b, int per_decade);

// Fixed columns: eps, params..., E_el_pair, E_el_relaxed, E_surf, E_total, checks.
std::string sweep_csv(const SweepTable& t);

struct SweepPoint {
  double eps = 0.0;
  double E = 0.0;
};

// Reads (eps, E_total) pairs from a sweep CSV; rows with an error or empty E_total are skipped.
std::vector<SweepPoint> read_sweep_csv(const std::string& text);

enum class ScalingModel { algebraic, stretched };

ScalingModel scaling_model_from_string(const std::string& s);
std::string to_string(ScalingModel m);

struct ScalingFitResult {
  ScalingModel model = ScalingModel::algebraic;
  double a = 0.0;         // prefactor
  double exponent = 0.0;  // alpha (algebraic) or c (stretched)
  double r2 = 0.0;        // on the linearized coordinates
  std::vector<double> residuals;
  nlohmann::json to_json() const;
};

// Least squares of log E against log eps (algebraic) or -|log eps|^{1/2} (stretched).
ScalingFitResult fit_scaling(std::span<const SweepPoint> pts, ScalingModel model);

// Optimal exponent 2p/(2p+1) from balancing mu^{2p} E against (mu eps)^{-1} eps E.
Rational exponent_balance(int p);

}  // namespace microlam
