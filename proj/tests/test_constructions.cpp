#include <random>

#include "doctest.h"
#include "microlam/constructions.hpp"
#include "microlam/energy.hpp"
#include "microlam/errors.hpp"
#include "microlam/hulls.hpp"
#include "oracles.hpp"

using namespace microlam;

namespace {

const OperatorSpec kDiv = divergence_operator(3, 3);

// Row-wise curl of a matrix potential by central differences.
Mat numerical_curl(const std::function<Mat(const Vec3&)>& v, const Vec3& x, double h) {
  std::array<Mat, 3> du;
  for (int k = 0; k < 3; ++k) {
    const Vec3 e = Vec3::Unit(k) * h;
    du[static_cast<std::size_t>(k)] = (v(x + e) - v(x - e)) / (2.0 * h);
  }
  Mat c(3, 3);
  for (int i = 0; i < 3; ++i) {
    c(i, 0) = du[1](i, 2) - du[2](i, 1);
    c(i, 1) = du[2](i, 0) - du[0](i, 2);
    c(i, 2) = du[0](i, 1) - du[1](i, 0);
  }
  return c;
}

T3Params t3_params(int m, std::vector<double> r) {
  T3Params p;
  p.m = m;
  p.r = std::move(r);
  p.F = t3_wells().S[2];
  p.eps = 1e-3;
  return p;
}

}  // namespace

TEST_CASE("simple laminate examples") {
  const auto w = t3_wells();
  LaminateParams p;
  p.A = w.A[0].to_mat();
  p.B = w.S[0].to_mat();
  p.periods = 3;
  const RegionComplex rc = simple_laminate(kDiv, p);
  const InterfaceReport ir = interface_check(rc, kDiv);
  CHECK(ir.pass);
  CHECK(ir.max_residual == 0.0);
  // 2p interfaces per unit cross-section, periodic wrap included.
  CHECK(exact_energies(rc).surface == doctest::Approx(2.0 * 3 * (p.B - p.A).norm()).epsilon(1e-13));

  p.B = p.A;
  const RegionComplex single = simple_laminate(kDiv, p);
  CHECK(single.regions.size() == 1);
  CHECK(exact_energies(single).surface == 0.0);

  p.B = w.A[1].to_mat();
  try {
    simple_laminate(kDiv, p);
    FAIL("incompatible wells accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::compatibility);
    CHECK(std::string(e.what()).find("certificate") != std::string::npos);
  }
}

TEST_CASE("interface check flags a corrupted value") {
  const auto w = t3_wells();
  LaminateParams p;
  p.A = w.A[0].to_mat();
  p.B = w.S[0].to_mat();
  RegionComplex rc = simple_laminate(kDiv, p);
  rc.regions[0].u.c0(0, 0) += 0.1;
  const InterfaceReport ir = interface_check(rc, kDiv);
  CHECK_FALSE(ir.pass);
  CHECK(ir.max_residual > 0.05);
  CHECK_FALSE(ir.offending.empty());
}

TEST_CASE("rotated laminate still passes the jump conditions") {
  const auto w = t3_wells();
  LaminateParams p;
  p.A = w.A[0].to_mat();
  p.B = w.S[0].to_mat();
  const RegionComplex rc = simple_laminate(kDiv, p);
  std::mt19937_64 rng(41);
  std::normal_distribution<double> n(0.0, 1.0);
  Mat q(3, 3);
  for (int i = 0; i < 9; ++i) q(i / 3, i % 3) = n(rng);
  const Mat R = Eigen::HouseholderQR<Mat>(q).householderQ();
  const RegionComplex rot = rotate_complex(rc, R);
  CHECK(interface_check(rot, kDiv).max_residual < 1e-12);
}

TEST_CASE("branching unit cell") {
  UnitCellParams p;
  p.A = Mat::Zero(3, 3);
  p.B = oracle::diag3(0, 4, 4);
  p.lambda = 0.5;
  p.l = 0.25;
  p.h = 0.5;
  const UnitCellResult uc = branching_unit_cell(p);
  CHECK(uc.analytic_elastic == doctest::Approx(16.0 / 2048.0).epsilon(1e-14));
  const ExactEnergies ex = exact_energies(uc.complex);
  CHECK(ex.elastic == doctest::Approx(uc.analytic_elastic).epsilon(1e-12));
  CHECK(ex.surface == doctest::Approx(uc.analytic_surface).epsilon(1e-12));
  CHECK(interface_check(uc.complex, kDiv).pass);
  // Jump identities: E e2 = 0 on the flat interface and (B - A - E) n = 0 on the tilted normal.
  CHECK((uc.E * Vec3::UnitY()).norm() == 0.0);
  CHECK(((p.B - p.A - uc.E) * uc.normal).norm() < 1e-14);
  // Exterior trace equals F_lambda.
  CHECK((uc.complex.exterior - 0.5 * (p.A + p.B)).norm() == 0.0);
  p.l = 0.6;
  CHECK_THROWS_AS(branching_unit_cell(p), Error);
}

TEST_CASE("branching construction passes interface checks, including the diagonal plane") {
  for (int N : {5, 6, 8}) {
    for (const auto variant : {BranchingVariant::d_dim, BranchingVariant::upper}) {
      BranchingParams p = BranchingParams::defaults(3, N);
      p.variant = variant;
      const BranchingResult r = build_two_well_branching(p, 1e-3);
      const InterfaceReport ir = interface_check(r.complex, kDiv);
      CHECK(ir.pass);
      CHECK(ir.uncovered_area < 1e-9);
      if (variant == BranchingVariant::d_dim) {
        bool diagonal = false;
        for (const auto& f : r.complex.interfaces)
          diagonal = diagonal || (std::abs(std::abs(f.normal(1)) - std::sqrt(0.5)) < 1e-12 && std::abs(f.normal(1) + f.normal(2)) < 1e-12);
        CHECK(diagonal);
      }
    }
  }
}

TEST_CASE("branching: eps = 0, flexible wells, degenerate parameters") {
  double prev = 1e300;
  for (int N : {5, 8, 12}) {
    const BranchingResult r = build_two_well_branching(BranchingParams::defaults(3, N), 0.0);
    CHECK(r.total() == r.exact.elastic);
    CHECK(r.exact.elastic < prev);
    prev = r.exact.elastic;
  }
  BranchingParams flex = BranchingParams::defaults(3, 6);
  flex.variant = BranchingVariant::upper;
  flex.B = oracle::diag3(0, 0, 4);
  const BranchingResult fr = build_two_well_branching(flex, 1e-3);
  CHECK(fr.exact.elastic < 1e-24);
  CHECK(fr.exact.surface > 0.0);
  BranchingParams bad = BranchingParams::defaults(3, 1);
  bad.theta = 0.26;
  CHECK_THROWS_AS(build_two_well_branching(bad, 1e-3), Error);
}

TEST_CASE("branching: exterior datum on the faces") {
  // The divergence datum is the normal trace: (u - F) n = 0 on every exterior face.
  for (const auto variant : {BranchingVariant::d_dim, BranchingVariant::upper}) {
    BranchingParams p = BranchingParams::defaults(3, 6);
    p.variant = variant;
    const RegionComplex rc = build_two_well_branching(p, 1e-3).complex;
    double worst = 0.0, area = 0.0;
    for (const auto& f : rc.interfaces) {
      if (f.minus != kExterior && f.plus != kExterior) continue;
      const int inside = f.minus == kExterior ? f.plus : f.minus;
      const Vec3 shift = f.minus == kExterior ? f.plus_shift : f.minus_shift;
      area += f.area;
      for (const Vec3& x : f.poly) worst = std::max(worst, ((rc.value_at(inside, x + shift) - rc.exterior) * f.normal).norm());
    }
    double faces = 0.0;
    for (int a = 0; a < 3; ++a)
      if (rc.boundary[static_cast<std::size_t>(a)] == BoundaryMode::exterior) faces += 2.0;
    CHECK(worst <= 1e-12);
    CHECK(area == doctest::Approx(faces).epsilon(1e-12));
    if (variant == BranchingVariant::d_dim) CHECK(faces == 6.0);
  }
}

TEST_CASE("branching: N trade-off") {
  const double eps = 1e-3;
  double prev_el = 1e300, prev_surf = 0.0;
  for (int N : {5, 6, 8, 10, 12}) {
    const BranchingResult r = build_two_well_branching(BranchingParams::defaults(3, N), eps);
    CHECK(r.exact.elastic < prev_el);
    CHECK(eps * r.exact.surface > prev_surf);
    prev_el = r.exact.elastic;
    prev_surf = eps * r.exact.surface;
  }
}

TEST_CASE("branching: the energy-minimizing N sits within a factor 2 of eps^(-1/3)") {
  for (double eps : {1e-2, 1e-3}) {
    const int N0 = static_cast<int>(std::lround(std::cbrt(1.0 / eps)));
    int best_N = 0;
    double best = 1e300;
    for (int N = 5; N <= 3 * N0; ++N) {
      const double e = build_two_well_branching(BranchingParams::defaults(3, N), eps).total();
      if (e < best) {
        best = e;
        best_N = N;
      }
    }
    CHECK(best_N * 2 >= N0);
    CHECK(best_N <= 2 * N0);
  }
}

TEST_CASE("T3 split rules follow the S identities") {
  const auto w = t3_wells();
  for (int j = 1; j <= 3; ++j) {
    T3CellKind k;
    k.type = T3CellKind::Type::S;
    k.j = j;
    const T3Split s = t3_split(k);
    CHECK(s.t * s.P + (Rational(1) - s.t) * s.Q == k.value());
    CHECK((s.P - s.Q).to_mat().col(s.axis).norm() == 0.0);
  }
  const T3Entry e = t3_entry(w.S[2]);
  CHECK(e.pre_levels == 0);
  CHECK(e.kind.value() == w.S[2]);
}

TEST_CASE("T3 potential, bookkeeping and interfaces for m = 1, 2") {
  for (int m : {1, 2}) {
    const T3Params p = m == 1 ? t3_params(1, {0.25}) : t3_params(2, {0.25, 0.0625});
    const T3Result r = build_t3_laminate(p, true);
    REQUIRE(r.complex.has_value());
    const ExactEnergies ex = exact_energies(*r.complex);
    CHECK(ex.elastic == doctest::Approx(r.elastic).epsilon(1e-9));
    CHECK(ex.surface == doctest::Approx(r.surface).epsilon(1e-9));
    CHECK(ex.off_wells_volume == doctest::Approx(r.off_wells_volume).epsilon(1e-9));
    CHECK(ex.volume == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(interface_check(*r.complex, kDiv).pass);
    // Off-wells volume halves per iteration up to cut-off volume.
    CHECK(r.off_wells_volume <= std::ldexp(1.0, -m) + r.cutoff_volume + 1e-12);

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    int bad = 0;
    for (int s = 0; s < 1000; ++s) {
      const Vec3 x(u(rng), u(rng), u(rng));
      const Mat c = numerical_curl(r.potential, x, 1e-6);
      bad += (c - r.sample(x).first).norm() > 1e-5;
    }
    // Points within 1e-6 of a sector tie can straddle two affine pieces.
    CHECK(bad <= 2);

    const Raster a = rasterize_t3(r, 32);
    const Raster b = rasterize(*r.complex, 32);
    int differ = 0;
    for (std::size_t i = 0; i < a.grid.cells(); ++i) differ += (a.u.at(i) - b.u.at(i)).norm() > 1e-9;
    CHECK(differ <= static_cast<int>(a.grid.cells() / 1000));
  }
}

TEST_CASE("T3 schedule and sequencing") {
  const T3Params p = T3Params::paper_schedule(1e-4);
  CHECK(p.m == static_cast<int>(std::lround(std::sqrt(std::abs(std::log(1e-4)) / std::log(2.0)))));
  CHECK(p.r_base == doctest::Approx(std::min(std::pow(1e-4, 1.0 / (p.m + 1)), 0.25)));
  const T3Result r = build_t3_laminate(p, false);
  for (std::size_t k = 1; k < r.r_used.size(); ++k) CHECK(r.r_used[k] <= 0.5 * r.r_used[k - 1]);
  T3Params bad = t3_params(2, {0.25});
  CHECK_THROWS_AS(build_t3_laminate(bad, false), Error);
}
