#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "microlam/grid.hpp"
#include "microlam/symbol.hpp"

namespace microlam {

struct RelaxedEnergy {
  double value = 0.0;       // nonzero modes plus the mean mismatch
  double mean_term = 0.0;   // |f^(0) - F|^2
  std::size_t skipped_modes = 0;  // modes whose symbol rank differs from the generic rank
  int generic_rank = 0;
  std::vector<double> per_mode;  // filled on request, index = DFT index
};

// Sum over k != 0 of |projection of f^(k) onto ran symbol(k/|k|)^*|^2 plus |f^(0) - F|^2.
RelaxedEnergy elastic_energy_relaxed(const PhaseField& chi, const Mat& F, const OperatorSpec& op, bool keep_spectrum = false);
RelaxedEnergy elastic_energy_relaxed(const TensorField& f, const Mat& F, const OperatorSpec& op, bool keep_spectrum = false);

// Divergence of diagonal d x d phase fields: sum_k sum_i (k_i^2/|k|^2)|chi^_ii|^2 + |chi^(0) - F|^2.
double elastic_energy_relaxed_diagonal(const PhaseField& chi, const Mat& F);

// Midpoint quadrature of |u - chi|^2.
double elastic_energy_pair(const TensorField& u, const PhaseField& chi);

// Anisotropic discrete total variation over interior and periodic faces.
double surface_energy(const PhaseField& chi);
double surface_energy(const Grid& g, std::span<const double> f);

struct EnergyReport {
  double eps = 0.0;
  double pair = 0.0;
  double relaxed = 0.0;
  double surface = 0.0;
  double total = 0.0;  // pair + eps * surface
  std::size_t skipped_modes = 0;
  nlohmann::json to_json() const;
};

// F defaults to the mean of u.
EnergyReport evaluate_energy(const TensorField& u, const PhaseField& chi, const OperatorSpec& op, double eps,
                             const std::optional<Mat>& F = std::nullopt);

struct ControlCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  double ratio() const { return rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? HUGE_VAL : 0.0); }
};

// Multiplier energy sum_{k != 0} |M k/|k||^2 |f^|^2 + |f^(0)|^2 of a scalar field, M a D x d matrix.
double multiplier_energy(const Grid& g, std::span<const double> f, const Mat& M);

// lhs = sum over |proj_{ker M} k| <= mu of |f^|^2, rhs = C mu^2 multiplier_energy.
ControlCheck low_freq_control_check(const Grid& g, std::span<const double> f, const Mat& M, double mu, double C);

// lhs = sum over |k| >= mu of |f^|^2, rhs = C mu^{-1} (TV(f) + 2d).
ControlCheck high_freq_control_check(const Grid& g, std::span<const double> f, double mu, double C);

// Smallest constants making the checks hold on a reference field across mus, times a safety factor.
double calibrate_low_freq(const Grid& g, std::span<const double> f, const Mat& M, std::span<const double> mus, double safety = 2.0);
double calibrate_high_freq(const Grid& g, std::span<const double> f, std::span<const double> mus, double safety = 2.0);

// Two-phase scalar f = (1 - lambda) 1_{chi = a} - lambda 1_{chi = b}, lambda the volume fraction of a (zero mean).
std::vector<double> two_phase_scalar(const PhaseField& chi, int a, int b);

}  // namespace microlam
