#include <cmath>

#include "microlam/constructions.hpp"
#include "microlam/errors.hpp"

namespace microlam {

AffineValue affine_combination(const Mat& base, const std::vector<std::pair<ScalarAffine, Mat>>& terms) {
  AffineValue a = AffineValue::of(base);
  for (const auto& [s, m] : terms) {
    a.c0 += s.c0 * m;
    for (int k = 0; k < 3; ++k)
      if (s.g(k) != 0.0) {
        a.grad[static_cast<std::size_t>(k)] += s.g(k) * m;
        a.constant = false;
      }
  }
  return a;
}

RegionComplex simple_laminate(const OperatorSpec& op, const LaminateParams& p) {
  require(op.order() == 1, ErrorCode::unsupported_order, "simple laminates need a first-order operator");
  require(op.d() == 2 || op.d() == 3, ErrorCode::invalid_input, "simple laminates are built in dimension 2 or 3");
  require(p.A.rows() == p.B.rows() && p.A.cols() == p.B.cols() && p.A.size() == op.n(), ErrorCode::dimension_mismatch,
          "well shapes do not match the operator state");
  require(p.lambda > 0.0 && p.lambda < 1.0, ErrorCode::invalid_input, "lambda must lie in (0, 1)");
  require(p.periods >= 1, ErrorCode::invalid_input, "periods must be a positive integer");

  RegionComplex rc;
  rc.d = op.d();
  rc.boundary = {BoundaryMode::periodic, BoundaryMode::periodic, op.d() == 3 ? BoundaryMode::periodic : BoundaryMode::extruded};
  rc.wells = {p.A, p.B};
  rc.exterior = p.lambda * p.A + (1.0 - p.lambda) * p.B;
  const Vec diff = flatten(p.B - p.A);
  if (diff.norm() == 0.0) {
    rc.regions.push_back({Polytope::box(Vec3::Zero(), Vec3::Ones()), AffineValue::of(p.A), 0, -1});
    rc.meta = {{"construction", "laminate"}, {"axis", nullptr}, {"periods", 0}};
    rc.finalize();
    return rc;
  }

  int axis = -1;
  if (p.axis) {
    require(*p.axis >= 0 && *p.axis < op.d(), ErrorCode::invalid_input, "lamination axis out of range");
    axis = *p.axis;
  } else {
    for (int a = 0; a < op.d() && axis < 0; ++a) {
      Vec e = Vec::Zero(op.d());
      e(a) = 1.0;
      if ((symbol_eval(op, e) * diff).norm() <= 1e-12 * (1.0 + diff.norm())) axis = a;
    }
  }
  const auto cert = wave_cone_contains(op, diff);
  if (axis < 0) {
    nlohmann::json info = {{"member", cert.member}, {"residual", cert.residual}};
    if (cert.direction) info["direction"] = std::vector<double>(cert.direction->data(), cert.direction->data() + cert.direction->size());
    throw Error(ErrorCode::compatibility, cert.member ? "B - A lies in the wave cone but no coordinate lamination normal exists; certificate " + info.dump()
                                                      : "B - A is not in the wave cone; certificate " + info.dump());
  }
  Vec e = Vec::Zero(op.d());
  e(axis) = 1.0;
  const double res = (symbol_eval(op, e) * diff).norm();
  require(res <= 1e-12 * (1.0 + diff.norm()), ErrorCode::compatibility,
          "B - A is incompatible across normal e" + std::to_string(axis + 1) + " (residual " + fmt17(res) +
              ", wave-cone member " + (cert.member ? "yes" : "no") + ")");

  const double period = 1.0 / p.periods;
  for (int k = 0; k < p.periods; ++k) {
    const double x0 = k * period, xm = x0 + p.lambda * period, x1 = (k + 1) * period;
    Vec3 lo = Vec3::Zero(), hi = Vec3::Ones();
    lo(axis) = x0;
    hi(axis) = xm;
    rc.regions.push_back({Polytope::box(lo, hi), AffineValue::of(p.A), 0, -1});
    lo(axis) = xm;
    hi(axis) = x1;
    rc.regions.push_back({Polytope::box(lo, hi), AffineValue::of(p.B), 1, -1});
  }
  rc.meta = {{"construction", "laminate"}, {"axis", axis}, {"periods", p.periods}, {"lambda", p.lambda}};
  rc.finalize();
  return rc;
}

}  // namespace microlam
