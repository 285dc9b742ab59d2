#pragma once

#include <Eigen/Dense>
#include <string>

namespace microlam {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;

inline constexpr double kRankTol = 1e-10;

// Row-major flattening: entry (i, j) goes to index i * cols + j.
Vec flatten(const Mat& m);
Mat unflatten(const Vec& v, int rows, int cols);

// Rank counting singular values with sigma / sigma_max > rel_tol.
int numerical_rank(const Mat& a, double rel_tol = kRankTol);

// Orthonormal basis (columns) of ker a. A zero matrix has the full space as kernel.
Mat null_space(const Mat& a, double rel_tol = kRankTol);

double spectral_norm(const Mat& a);

// 17 significant digits, shortest exact round trip for doubles.
std::string fmt17(double x);

}  // namespace microlam
