#include <cmath>

#include "microlam/constructions.hpp"
#include "microlam/errors.hpp"

namespace microlam {

namespace {

// a x1 + b y <= c in the local (x1, y) frame of a branching half.
struct Constraint {
  double a, b, c;
};

struct LocalRegion {
  std::vector<Constraint> cons;
  AffineValue u;  // grad[0] along x1, grad[1] along y
  int chi;
};

// Local frame: y = sigma (x_b - y_shift); the remaining axis is extruded over [0, 1].
struct Frame {
  int b = 1;
  double sigma = 1.0;
  double y_shift = 0.0;
  std::vector<Halfspace> clip;
  Vec3 lo = Vec3::Zero(), hi = Vec3::Ones();
};

Region embed(const LocalRegion& lr, const Frame& f) {
  Polytope shape = Polytope::box(f.lo, f.hi);
  for (const auto& c : lr.cons) {
    Vec3 n = Vec3::Zero();
    n(0) = c.a;
    n(f.b) += c.b * f.sigma;
    shape = shape.clipped(n, c.c + c.b * f.sigma * f.y_shift);
  }
  for (const auto& h : f.clip) shape = shape.clipped(h);
  AffineValue u = lr.u;
  if (!lr.u.constant) {
    const Mat gx = lr.u.grad[0], gy = lr.u.grad[1];
    for (auto& g : u.grad) g.setZero();
    u.grad[0] = gx;
    u.grad[static_cast<std::size_t>(f.b)] = f.sigma * gy;
    u.c0 = lr.u.c0 - f.sigma * f.y_shift * gy;
  }
  return {std::move(shape), std::move(u), lr.chi, -1};
}

AffineValue local_affine(const Mat& c0, const Mat& gx, const Mat& gy) {
  AffineValue a = AffineValue::of(c0);
  a.grad[0] = gx;
  a.grad[1] = gy;
  a.constant = gx.norm() == 0.0 && gy.norm() == 0.0;
  return a;
}

// Four regions of one unit cell at (x0, y0) with width l and height h; E is the middle-region perturbation.
void unit_cell_regions(double x0, double y0, double l, double h, double lambda, const Mat& A, const Mat& B, const Mat& E,
                       std::vector<LocalRegion>& out) {
  const double s = (1.0 - lambda) * l / (2.0 * h);
  const std::vector<Constraint> rows = {{0, -1, -y0}, {0, 1, y0 + h}};
  auto with = [&](std::vector<Constraint> extra) {
    extra.insert(extra.end(), rows.begin(), rows.end());
    return extra;
  };
  // Tilted lines x1 - s (y - y0) = x0 + c.
  const double c1 = x0 + lambda * l / 2.0 - s * y0, c2 = x0 + lambda * l - s * y0;
  out.push_back({with({{-1, 0, -x0}, {1, 0, x0 + lambda * l / 2.0}}), AffineValue::of(A), 0});
  out.push_back({with({{-1, 0, -(x0 + lambda * l / 2.0)}, {1, -s, c1}}), AffineValue::of(B), 1});
  out.push_back({with({{-1, s, -c1}, {1, -s, c2}}), AffineValue::of(A + E), 0});
  out.push_back({with({{-1, s, -c2}, {1, 0, x0 + l}}), AffineValue::of(B), 1});
}

Mat e1_outer(const Vec& col) {
  Mat m = Mat::Zero(col.size(), col.size());
  m.col(0) = col;
  return m;
}

void check_wells(const Mat& A, const Mat& B, int d) {
  require(A.rows() == d && A.cols() == d && B.rows() == d && B.cols() == d, ErrorCode::dimension_mismatch,
          "branching wells must be d x d");
  require((B - A).col(0).norm() <= 1e-14 * (1.0 + (B - A).norm()), ErrorCode::compatibility,
          "branching needs (B - A) e1 = 0");
}

}  // namespace

UnitCellResult branching_unit_cell(const UnitCellParams& p) {
  require(p.d == 2 || p.d == 3, ErrorCode::invalid_input, "dimension must be 2 or 3");
  check_wells(p.A, p.B, p.d);
  require(p.lambda > 0.0 && p.lambda < 1.0, ErrorCode::invalid_input, "lambda must lie in (0, 1)");
  require(p.l > 0.0 && p.l < p.h && p.h <= 1.0, ErrorCode::degenerate_parameters, "unit cell needs 0 < l < h <= 1");
  UnitCellResult res;
  const double s = (1.0 - p.lambda) * p.l / (2.0 * p.h);
  res.E = -s * e1_outer((p.B - p.A).col(1));
  res.normal = Vec3(1.0, -s, 0.0);
  std::vector<LocalRegion> local;
  unit_cell_regions(0.0, 0.0, p.l, p.h, p.lambda, p.A, p.B, res.E, local);
  Frame f;
  f.hi = Vec3(p.l, p.h, 1.0);
  RegionComplex& rc = res.complex;
  rc.d = p.d;
  rc.lo = Vec3::Zero();
  rc.hi = f.hi;
  rc.boundary = {BoundaryMode::exterior, BoundaryMode::extruded, BoundaryMode::extruded};
  rc.wells = {p.A, p.B};
  rc.exterior = p.lambda * p.A + (1.0 - p.lambda) * p.B;
  for (const auto& lr : local) rc.regions.push_back(embed(lr, f));
  rc.meta = {{"construction", "branching_unit_cell"}, {"lambda", p.lambda}, {"l", p.l}, {"h", p.h}};
  rc.finalize();
  const double b2 = (p.B - p.A).col(1).squaredNorm();
  res.analytic_elastic = b2 * (1.0 - p.lambda) * (1.0 - p.lambda) * p.lambda * p.l * p.l * p.l / (8.0 * p.h);
  res.analytic_surface =
      (p.B - p.A).norm() * (p.h + 2.0 * std::sqrt((1.0 - p.lambda) * (1.0 - p.lambda) * p.l * p.l / 4.0 + p.h * p.h));
  return res;
}

BranchingParams BranchingParams::defaults(int d, int N) {
  BranchingParams p;
  p.d = d;
  p.N = N;
  p.A = Mat::Zero(d, d);
  p.B = Mat::Zero(d, d);
  for (int i = 1; i < d; ++i) p.B(i, i) = 4.0;
  return p;
}

void BranchingParams::validate() const {
  require(d == 2 || d == 3, ErrorCode::invalid_input, "dimension must be 2 or 3");
  require(N >= 1, ErrorCode::invalid_input, "N must be a positive integer");
  require(theta > 0.25 && theta < 0.5, ErrorCode::invalid_input, "theta must lie in (1/4, 1/2)");
  require(lambda > 0.0 && lambda < 1.0, ErrorCode::invalid_input, "lambda must lie in (0, 1)");
  require(variant == BranchingVariant::upper || d == 3, ErrorCode::invalid_input, "the all-faces variant is built for d = 3");
  check_wells(A, B, d);
}

int BranchingParams::j0() const {
  int j = -1;
  for (int k = 0; k < 64; ++k) {
    const double l = 1.0 / (std::ldexp(1.0, k) * N), h = std::pow(theta, k) * (1.0 - theta) / 2.0;
    if (l < h) j = k;
  }
  return j;
}

namespace {

// Upper half (y in [0, 1/2]) of the branching construction in the local frame, branching along e_b.
std::vector<LocalRegion> branching_half(const BranchingParams& p, int j0, int b, double sigma) {
  const Mat& A = p.A;
  const Mat& B = p.B;
  const double lam = p.lambda;
  const Mat F = lam * A + (1.0 - lam) * B;
  const Vec col = (B - A).col(b);
  std::vector<LocalRegion> out;
  for (int j = 0; j <= j0; ++j) {
    const long cells = static_cast<long>(p.N) << j;
    const double l = 1.0 / static_cast<double>(cells);
    const double h = std::pow(p.theta, j) * (1.0 - p.theta) / 2.0;
    const double y0 = (1.0 - std::pow(p.theta, j)) / 2.0;
    const double s = (1.0 - lam) * l / (2.0 * h);
    const Mat E = -sigma * s * e1_outer(col);
    for (long k = 0; k < cells; ++k) unit_cell_regions(k * l, y0, l, h, lam, A, B, E, out);
  }
  // Cut-off layer with cells of width l_{j0+1}.
  const long cells = static_cast<long>(p.N) << (j0 + 1);
  const double l = 1.0 / static_cast<double>(cells);
  const double Y = (1.0 - std::pow(p.theta, j0 + 1)) / 2.0, H = std::pow(p.theta, j0 + 1) / 2.0;
  const Mat X = e1_outer((A - B).col(b));
  const double psi = 4.0 * l * sigma / H;  // -l phi'(t) dt/dx_b with phi' = -4
  const double t_half = Y + H / 2.0, t_3q = Y + 3.0 * H / 4.0;
  for (long k = 0; k < cells; ++k) {
    const double x0 = k * l;
    for (int piece = 0; piece < 2; ++piece) {
      const double xa = piece == 0 ? x0 : x0 + lam * l, xb = piece == 0 ? x0 + lam * l : x0 + l;
      const double hp = piece == 0 ? 1.0 - lam : -lam;
      // h(x1) = (1 - lam)(x1 - x0)/l or lam (1 - (x1 - x0)/l).
      const double h0 = piece == 0 ? -(1.0 - lam) * x0 / l : lam * (1.0 + x0 / l);
      const double h1 = piece == 0 ? (1.0 - lam) / l : -lam / l;
      const int chi = piece == 0 ? 0 : 1;
      const std::vector<Constraint> xs = {{-1, 0, -xa}, {1, 0, xb}};
      auto with = [&](double ylo, double yhi) {
        auto c = xs;
        c.push_back({0, -1, -ylo});
        c.push_back({0, 1, yhi});
        return c;
      };
      // (B - A) e_b = 0: the laminate already carries the normal trace F e_b, so no cut-off is needed.
      if (col.isZero(0.0)) {
        out.push_back({with(Y, 0.5), AffineValue::of(F + hp * (A - B)), chi});
        continue;
      }
      out.push_back({with(Y, t_half), AffineValue::of(F + hp * (A - B)), chi});
      // phi = 3 - 4 t with t = (y - Y)/H.
      const double phi0 = 3.0 + 4.0 * Y / H, phiy = -4.0 / H;
      const Mat c0 = F + phi0 * hp * (A - B) + psi * h0 * X;
      out.push_back({with(t_half, t_3q), local_affine(c0, psi * h1 * X, phiy * hp * (A - B)), chi});
      out.push_back({with(t_3q, 0.5), AffineValue::of(F), chi});
    }
  }
  return out;
}

}  // namespace

BranchingResult build_two_well_branching(const BranchingParams& p, double eps) {
  p.validate();
  require(eps >= 0.0, ErrorCode::invalid_input, "eps must be nonnegative");
  const int j0 = p.j0();
  require(j0 >= 1, ErrorCode::degenerate_parameters,
          "no refinement layer: l_j < h_j fails for j = 1 (N = " + std::to_string(p.N) + ", theta = " + fmt17(p.theta) + ")");
  BranchingResult res;
  res.j0 = j0;
  res.eps = eps;
  RegionComplex& rc = res.complex;
  rc.d = p.d;
  rc.wells = {p.A, p.B};
  rc.exterior = p.lambda * p.A + (1.0 - p.lambda) * p.B;
  if (p.variant == BranchingVariant::upper) {
    rc.boundary = {BoundaryMode::exterior, BoundaryMode::exterior, BoundaryMode::extruded};
    for (double sigma : {1.0, -1.0}) {
      Frame f;
      f.b = 1;
      f.sigma = sigma;
      f.y_shift = 0.5;
      for (const auto& lr : branching_half(p, j0, 1, sigma)) rc.regions.push_back(embed(lr, f));
    }
  } else {
    rc.boundary = {BoundaryMode::exterior, BoundaryMode::exterior, BoundaryMode::exterior};
    const Vec3 e2 = Vec3::UnitY(), e3 = Vec3::UnitZ();
    for (int b : {1, 2}) {
      const Vec3 eb = b == 1 ? e2 : e3, ec = b == 1 ? e3 : e2;
      for (double sigma : {1.0, -1.0}) {
        Frame f;
        f.b = b;
        f.sigma = sigma;
        f.y_shift = 0.5;
        // Wedge where x_b is the coordinate closest to its faces: |x_c - 1/2| <= sigma (x_b - 1/2).
        f.clip = {Halfspace::make(ec - sigma * eb, 0.5 - sigma * 0.5), Halfspace::make(-ec - sigma * eb, -0.5 - sigma * 0.5)};
        for (const auto& lr : branching_half(p, j0, b, sigma)) rc.regions.push_back(embed(lr, f));
      }
    }
  }
  rc.meta = {{"construction", "branching"},
             {"variant", p.variant == BranchingVariant::upper ? "upper" : "d_dim"},
             {"N", p.N},
             {"theta", p.theta},
             {"lambda", p.lambda},
             {"j0", j0}};
  rc.finalize();
  res.exact = exact_energies(rc);
  res.bound = 1.0 / (static_cast<double>(p.N) * p.N) + eps * p.N;
  if (p.variant == BranchingVariant::upper) {
    const double b2 = (p.B - p.A).col(1).squaredNorm();
    double sum = 0.0;
    for (int j = 0; j <= j0; ++j) {
      const double cells = std::ldexp(static_cast<double>(p.N), j);
      const double l = 1.0 / cells, h = std::pow(p.theta, j) * (1.0 - p.theta) / 2.0;
      sum += 2.0 * cells * b2 * (1.0 - p.lambda) * (1.0 - p.lambda) * p.lambda * l * l * l / (8.0 * h);
    }
    res.layers_elastic = sum;
  }
  return res;
}

nlohmann::json BranchingResult::report() const {
  nlohmann::json j = {{"eps", eps},
                      {"E_el_pair", exact.elastic},
                      {"E_surf", exact.surface},
                      {"E_total", total()},
                      {"j0", j0},
                      {"bound", bound},
                      {"regions", complex.regions.size()},
                      {"interfaces", complex.interfaces.size()}};
  if (layers_elastic) j["layers_elastic_analytic"] = *layers_elastic;
  return j;
}

}  // namespace microlam
