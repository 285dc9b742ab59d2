#include <cmath>

#include "doctest.h"
#include "microlam/errors.hpp"
#include "microlam/scaling.hpp"

using namespace microlam;

namespace {

std::vector<SweepPoint> synthetic(ScalingModel model, double a, double p) {
  std::vector<SweepPoint> pts;
  for (double e = 1e-2; e > 1e-6; e /= std::sqrt(10.0)) {
    const double E = model == ScalingModel::algebraic ? a * std::pow(e, p) : a * std::exp(-p * std::sqrt(std::abs(std::log(e))));
    pts.push_back({e, E});
  }
  return pts;
}

}  // namespace

TEST_CASE("fit recovers exact synthetic laws") {
  const auto alg = fit_scaling(synthetic(ScalingModel::algebraic, 3.0, 2.0 / 3.0), ScalingModel::algebraic);
  CHECK(std::abs(alg.exponent - 2.0 / 3.0) < 1e-10);
  CHECK(std::abs(alg.a - 3.0) < 1e-10);
  CHECK(std::abs(alg.r2 - 1.0) < 1e-12);
  const auto str = fit_scaling(synthetic(ScalingModel::stretched, 0.5, std::log(2.0)), ScalingModel::stretched);
  CHECK(std::abs(str.exponent - std::log(2.0)) < 1e-10);
  CHECK(std::abs(str.a - 0.5) < 1e-10);
  for (double r : str.residuals) CHECK(std::abs(r) < 1e-10);
  // The stretched model explains stretched data better than a power law.
  CHECK(fit_scaling(synthetic(ScalingModel::stretched, 0.5, std::log(2.0)), ScalingModel::algebraic).r2 < str.r2);
}

TEST_CASE("fit errors") {
  std::vector<SweepPoint> three = {{1e-2, 1.0}, {1e-3, 0.5}, {1e-4, 0.2}};
  CHECK_THROWS_AS(fit_scaling(three, ScalingModel::algebraic), Error);
  three.push_back({1e-5, 0.0});
  try {
    fit_scaling(three, ScalingModel::algebraic);
    FAIL("nonpositive energy accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::fit);
  }
  CHECK_THROWS_AS(read_sweep_csv(""), Error);
  CHECK_THROWS_AS(scaling_model_from_string("cubic"), Error);
}

TEST_CASE("exponent balance") {
  CHECK(exponent_balance(1) == Rational(2, 3));
  CHECK(exponent_balance(2) == Rational(4, 5));
  CHECK(exponent_balance(3) == Rational(6, 7));
  CHECK_THROWS_AS(exponent_balance(0), Error);
}

TEST_CASE("sweep configuration") {
  SweepConfig c;
  CHECK(run_sweep(c).rows.empty());
  c.eps = {1e-2, 1e-2};
  CHECK_THROWS_AS(c.validate(), Error);
  c.eps = {1e-3, 1e-2};
  CHECK_THROWS_AS(c.validate(), Error);
  c.eps = {1.5};
  CHECK_THROWS_AS(c.validate(), Error);
  const auto e = log_spaced_eps(2, 5, 2);
  REQUIRE(e.size() == 7);
  CHECK(e.front() == doctest::Approx(1e-2));
  CHECK(e.back() == doctest::Approx(1e-5));
  const SweepConfig j = SweepConfig::from_json({{"construction", "t3"}, {"eps_range", {{"from", 2}, {"to", 3}, {"per_decade", 2}}}});
  CHECK(j.construction == SweepConstruction::t3);
  CHECK(j.eps.size() == 3);
  CHECK_THROWS_AS(SweepConfig::from_json({{"construction", "foam"}}), Error);
}

TEST_CASE("branching sweep rows, CSV round trip and determinism") {
  SweepConfig c;
  c.eps = log_spaced_eps(2, 4.5, 2);
  c.raster_rows = 1;
  const SweepTable t = run_sweep(c);
  REQUIRE(t.rows.size() == 6);
  for (const auto& r : t.rows) {
    CHECK(r.ok);
    REQUIRE(r.interface_pass.has_value());
    CHECK(*r.interface_pass);
    CHECK(r.E_total > 0.0);
    CHECK(r.params.contains("N"));
  }
  REQUIRE(t.rows.front().raster.has_value());
  CHECK(t.rows.front().raster->within_bound);
  const std::string csv = sweep_csv(t);
  CHECK(csv.rfind("eps,N,j0,theta,lambda,d,E_el_pair,E_el_relaxed,E_surf,E_total,checks\n", 0) == 0);
  const auto pts = read_sweep_csv(csv);
  REQUIRE(pts.size() == t.rows.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].eps == t.rows[i].eps);
    CHECK(pts[i].E == t.rows[i].E_total);
  }
  CHECK(sweep_csv(run_sweep(c)) == csv);
}

TEST_CASE("failing rows are recorded, not fatal") {
  SweepConfig c;
  c.eps = {1e-2, 1e-3};
  c.N_fixed = 1;
  c.theta = 0.26;
  const SweepTable t = run_sweep(c);
  REQUIRE(t.rows.size() == 2);
  for (const auto& r : t.rows) {
    CHECK_FALSE(r.ok);
    CHECK_FALSE(r.error.empty());
  }
}
