#include <random>

#include "doctest.h"
#include "microlam/constructions.hpp"
#include "microlam/diagnostics.hpp"
#include "microlam/errors.hpp"
#include "microlam/hulls.hpp"
#include "oracles.hpp"

using namespace microlam;

namespace {

PhaseField branching_phase(int N, int n) {
  return rasterize(build_two_well_branching(BranchingParams::defaults(3, N), 0.0).complex, n).chi;
}

}  // namespace

TEST_CASE("lower-bound certificate needs calibrated constants") {
  const PhaseField chi = branching_phase(5, 32);
  try {
    lower_bound_certificate(chi, 0, 1, oracle::diag3(0, 2, 2), 1e-3, {});
    FAIL("uncalibrated constants accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::must_calibrate);
  }
}

TEST_CASE("lower-bound certificate on held-out branching fields") {
  const std::vector<double> mus = {2.0, 4.0, 8.0, 16.0};
  const ControlConstants c = calibrate_controls(branching_phase(5, 32), 0, 1, mus);
  REQUIRE(c.C_low.has_value());
  REQUIRE(c.C_high.has_value());
  const Mat F = oracle::diag3(0, 2, 2);
  for (const auto& [N, eps] : std::vector<std::pair<int, double>>{{6, 1e-2}, {7, 1e-2}, {8, 1e-3}, {10, 1e-3}}) {
    const LowerBoundCertificate lb = lower_bound_certificate(branching_phase(N, 32), 0, 1, F, eps, c);
    CHECK(lb.respects);
    CHECK(lb.mu == doctest::Approx(std::cbrt(1.0 / eps)));
  }
}

TEST_CASE("lower-bound chain degenerates for a constant field") {
  const Grid g{3, 16};
  PhaseField chi;
  chi.grid = g;
  chi.wells = {Mat::Zero(3, 3), oracle::diag3(0, 4, 4)};
  chi.labels.assign(g.cells(), 0);
  ControlConstants c;
  c.C_low = 1.0;
  c.C_high = 1.0;
  const LowerBoundCertificate lb = lower_bound_certificate(chi, 0, 1, oracle::diag3(0, 2, 2), 1e-3, c);
  // f is identically zero when only one phase is present.
  CHECK(lb.f_norm_sq == 0.0);
  CHECK(lb.degenerate);
  CHECK(lb.respects);
}

TEST_CASE("rigidity estimate") {
  const Grid g{3, 8};
  PhaseField constant;
  constant.grid = g;
  constant.wells = t3_wellset().wells;
  constant.labels.assign(g.cells(), 1);
  const Mat F = t3_wells().S[2].to_mat();
  const RigidityEstimate c = rigidity_estimate_check(constant, F, 1e-3, 0.0);
  CHECK(c.lhs < 1e-28);
  CHECK(c.pass);

  // Checkerboard: large surface energy, passes with a moderate constant.
  PhaseField cb = constant;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    const auto x = g.coords(i);
    cb.labels[i] = (x[0] + x[1] + x[2]) % 3;
  }
  const RigidityEstimate r = rigidity_estimate_check(cb, F, 1e-2, 0.5);
  CHECK(r.pass);
  std::vector<PhaseField> fields = {cb};
  std::vector<double> eps = {1e-2};
  const double c_min = smallest_passing_c(fields, eps, F);
  CHECK(rigidity_estimate_check(cb, F, 1e-2, c_min + 1e-12).pass);
  CHECK_THROWS_AS(rigidity_estimate_check(cb, F, 1e-2, 1.0, 0.7), Error);
}

TEST_CASE("cone truncation profile") {
  const Grid g{3, 16};
  PhaseField constant;
  constant.grid = g;
  constant.wells = t3_wellset().wells;
  constant.labels.assign(g.cells(), 0);
  const Mat F = t3_wells().S[2].to_mat();
  const ConeTruncationProfile p = cone_truncation_profile(constant, F, 1e-3);
  REQUIRE(p.rows.size() == 6);
  for (const auto& r : p.rows) CHECK(r.error < 1e-28);
  CHECK(p.alpha == doctest::Approx(std::pow(std::abs(std::log(1e-3)), -1.0 / 2.25)));

  // A1/A2 laminate along e1: f_1 varies along e1, so all of its mass sits outside the e1 cone.
  const PhaseField lam = oracle::laminate_phase(g, t3_wellset().wells[1], t3_wellset().wells[0], 0, 2, 0.5);
  const ConeTruncationProfile q = cone_truncation_profile(lam, F, 1e-3);
  auto f1 = lam.component(0, 0);
  const double m = mean(g, f1);
  for (auto& x : f1) x -= m;
  const double mass = l2_norm_sq(g, f1);
  for (const auto& r : q.rows) CHECK(r.per_axis[0] == doctest::Approx(mass).epsilon(1e-12));
}
