#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "microlam/linalg.hpp"

namespace microlam {

// One term A_alpha d^alpha. alpha lists the k differentiated axes (0-based, nondecreasing).
struct OperatorTerm {
  std::vector<int> alpha;
  Mat coeff;  // m x n
};

// Homogeneous constant-coefficient operator of order k acting on R^n-valued fields in R^d.
// States may be viewed as rows x cols matrices (rows * cols == n), flattened row-major.
class OperatorSpec {
 public:
  OperatorSpec(int order, int d, int n, int m, std::vector<OperatorTerm> terms, std::string name = {},
               int state_rows = 0, int state_cols = 0);

  int order() const { return order_; }
  int d() const { return d_; }
  int n() const { return n_; }
  int m() const { return m_; }
  const std::vector<OperatorTerm>& terms() const { return terms_; }
  const std::string& name() const { return name_; }
  int state_rows() const { return state_rows_; }
  int state_cols() const { return state_cols_; }
  bool is_divergence() const { return name_ == "div"; }

  // A^j for first-order operators (sum of the terms with alpha = {j}).
  Mat first_order_coeff(int j) const;

 private:
  int order_, d_, n_, m_;
  std::vector<OperatorTerm> terms_;
  std::string name_;
  int state_rows_, state_cols_;
};

// Divergence of rows x d matrix fields: symbol(xi) M = M xi.
OperatorSpec divergence_operator(int rows, int d);
// Row-wise curl of rows x 3 matrix fields.
OperatorSpec curl3_operator(int rows = 3);
// Scalar curl-curl of 2 x 2 matrix fields in the plane.
OperatorSpec curlcurl2_operator();
// "div", "curl3", "curlcurl2"; rows/d refine the shape where meaningful.
OperatorSpec builtin_operator(const std::string& name, int rows = 3, int d = 3);

OperatorSpec operator_from_json(const nlohmann::json& j);
nlohmann::json operator_to_json(const OperatorSpec& op);

Mat symbol_eval(const OperatorSpec& op, std::span<const double> xi);
inline Mat symbol_eval(const OperatorSpec& op, const Vec& xi) {
  return symbol_eval(op, std::span<const double>(xi.data(), static_cast<std::size_t>(xi.size())));
}

// Points on S^{d-1}: circle or Fibonacci lattice, plus the coordinate axes.
std::vector<Vec> sphere_lattice(int d, int count);

// Largest operator norm of the symbol over a sphere lattice.
double symbol_norm_on_sphere(const OperatorSpec& op, int count = 2000);

struct WaveConeCertificate {
  bool member = false;
  std::optional<Vec> direction;
  double residual = 0.0;   // |symbol(xi) mu| at the returned / best direction
  double sigma_ref = 0.0;  // max operator norm of the symbol on the sphere
};

WaveConeCertificate wave_cone_contains(const OperatorSpec& op, const Vec& mu, double tol = 1e-8);

// Orthonormal basis (d x l) of {xi : symbol(xi) mu = 0}; first-order only.
Mat lamination_space(const OperatorSpec& op, const Vec& mu);

struct ConstantRankReport {
  bool constant = false;
  int min_rank = 0;
  int max_rank = 0;
  int samples = 0;
};

ConstantRankReport constant_rank_check(const OperatorSpec& op, int samples = 200, double tol = kRankTol);

struct OmegaMap {
  int m = 0, d = 0, n = 0;
  Mat matrix;  // (m*d) x n, row i*d + j holds (A^j)_{i,.}
  Mat kernel;  // n x q orthonormal
  double max_probe_error = 0.0;

  Mat apply(const Vec& x) const { return unflatten(matrix * x, m, d); }
};

OmegaMap omega_reduction(const OperatorSpec& op, std::uint64_t seed = 7, int probes = 64);

// u R for orthogonal R.
Mat rotate_frame(const Mat& u, const Mat& r);

}  // namespace microlam
