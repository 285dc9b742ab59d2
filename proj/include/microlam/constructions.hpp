#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "microlam/complex.hpp"
#include "microlam/grid.hpp"
#include "microlam/hulls.hpp"
#include "microlam/rational.hpp"

namespace microlam {

// Scalar affine map x -> c0 + g . x.
struct ScalarAffine {
  double c0 = 0.0;
  Vec3 g = Vec3::Zero();
  double at(const Vec3& x) const { return c0 + g.dot(x); }
};

// base + sum_i s_i(x) M_i as an affine matrix field.
AffineValue affine_combination(const Mat& base, const std::vector<std::pair<ScalarAffine, Mat>>& terms);

// ---------------------------------------------------------------- laminates

struct LaminateParams {
  Mat A, B;
  std::optional<int> axis;  // lamination normal e_axis (0-based); chosen from the lamination space if absent
  double lambda = 0.5;      // volume fraction of A
  int periods = 1;
};

// Periodic simple laminate on the unit cube (the unit square extruded when the operator acts in 2-D).
RegionComplex simple_laminate(const OperatorSpec& op, const LaminateParams& p);

// ---------------------------------------------------------------- branching

struct UnitCellParams {
  Mat A, B;
  double lambda = 0.5;
  double l = 0.25, h = 0.5;
  int d = 3;
};

struct UnitCellResult {
  RegionComplex complex;
  Mat E;                     // perturbation matrix of the middle region
  Vec3 normal;               // unnormalized tilted normal e1 - s e2
  double analytic_elastic = 0.0;
  double analytic_surface = 0.0;  // interface length times |B - A|
};

UnitCellResult branching_unit_cell(const UnitCellParams& p);

enum class BranchingVariant { upper, d_dim };

struct BranchingParams {
  int N = 4;
  double theta = 0.3;
  double lambda = 0.5;
  int d = 3;
  Mat A, B;  // defaults: A = 0, B = diag(0, 4, 4) (d = 3) or diag(0, 4)
  BranchingVariant variant = BranchingVariant::d_dim;

  static BranchingParams defaults(int d, int N);
  void validate() const;
  int j0() const;  // largest j with l_j < h_j
};

struct BranchingResult {
  RegionComplex complex;
  ExactEnergies exact;
  int j0 = 0;
  double bound = 0.0;  // 1/N^2 + eps N
  // Unit-cell formulas summed over layers 0..j0 (upper variant only).
  std::optional<double> layers_elastic;
  double eps = 0.0;
  double total() const { return exact.elastic + eps * exact.surface; }
  nlohmann::json report() const;
};

BranchingResult build_two_well_branching(const BranchingParams& p, double eps);

// ---------------------------------------------------------------- T3

// Kind of a cell in the T3 iteration: value and how it splits.
struct T3CellKind {
  enum class Type { S, Leg, Triangle } type = Type::S;
  int j = 3;                 // 1-based well / auxiliary index (S and Leg)
  Rational nu{0};            // Leg: value nu A_j + (1 - nu) S_j
  Rational lambda{0};        // Triangle: value lambda F1 + (1 - lambda) F2
  int leg1 = 1, leg2 = 3;    // Triangle: leg indices of F1, F2
  Rational nu1{0}, nu2{0};   // Triangle: leg parameters of F1, F2

  RMat value() const;
  std::string tag() const;
};

struct T3Split {
  RMat P, Q;
  Rational t;  // volume fraction of P
  int axis = 0;
  std::optional<T3CellKind> P_child, Q_child;  // absent: the phase value is a well
};

T3Split t3_split(const T3CellKind& kind);

// Entry kind for a boundary datum in the hull minus the wells; counts the pre-splits before the S iteration.
struct T3Entry {
  T3CellKind kind;
  int pre_levels = 0;
};
T3Entry t3_entry(const RMat& F);

struct T3Params {
  int m = 1;                    // S-lamination iterations (after the pre-splits)
  std::vector<double> r;        // target scale per level (pre_levels + m entries); empty: geometric from r_base
  double r_base = 0.25;
  RMat F;                       // boundary datum, defaults to S3
  double eps = 0.0;

  static T3Params paper_schedule(double eps);  // m = max(1, round(sqrt(|log eps| / log 2))), r = min(eps^{1/(m+1)}, 1/4)
};

struct T3ClassInfo {
  std::string tag;
  int depth = 1;
  Vec3 dims = Vec3::Ones();
  std::uint64_t multiplicity = 1;
  double r = 0.0;
  int periods = 0;  // full Q slabs; P slabs number periods + 1
  int axis = 0;
  double t = 0.5;
  double own_elastic = 0.0, own_surface = 0.0, own_surface_aniso = 0.0;
  double cutoff_volume = 0.0;      // collar volume (distance to the cell boundary <= 3r/8)
  double own_off_wells = 0.0;      // own region volume off the wells
  double leaf_elastic = 0.0;       // |V - Pi V|^2 vol when left unrefined
  double leaf_off_wells = 0.0;
  double volume = 0.0;
  double interface_area = 0.0;     // own interior interfaces, unweighted
  double grad_sq = 0.0;            // sum of vol * |grad (u - chi)|^2 over own regions
  double max_pointwise = 0.0;      // sup |u - chi|^2 over own regions
  std::size_t local_regions = 0;
};

struct T3Result {
  T3Params params;
  int pre_levels = 0;
  int levels = 0;
  std::vector<double> r_target;
  std::vector<double> r_used;  // per depth, from the first class at that depth
  std::vector<T3ClassInfo> classes;
  double elastic = 0.0, surface = 0.0, surface_aniso = 0.0, off_wells_volume = 0.0, cutoff_volume = 0.0;
  // Energies of the construction truncated after depth k (index k - 1).
  std::vector<double> elastic_by_depth, surface_by_depth;
  double interface_area = 0.0, grad_sq = 0.0, max_pointwise = 0.0;
  double bound = 0.0;  // 2^-m + sum_{k=2}^m 2^-k r_k/r_{k-1} + r_1 + eps / r_m with the rounded sequence
  std::optional<RegionComplex> complex;
  // Potential v with row-wise curl u (only when the explicit complex was built).
  std::function<Mat(const Vec3&)> potential;
  // Pointwise field (u, chi) of the construction; available without the explicit complex.
  std::function<std::pair<Mat, int>(const Vec3&)> sample;

  double total() const { return elastic + params.eps * surface; }
  nlohmann::json report() const;
};

T3Result build_t3_laminate(const T3Params& p, bool explicit_complex = false);

// Cell-center sampling of the construction on an n^3 grid.
Raster rasterize_t3(const T3Result& res, int n);

// Staircase plus midpoint-quadrature bound on |rasterized - exact| elastic energy at grid spacing h.
double raster_elastic_bound(double interface_area, double max_pointwise, double grad_sq, int d, double h);

}  // namespace microlam
