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

Mat well(const RMat& m) { return m.to_mat(); }

PhaseField constant_phase(const Grid& g, const Mat& A) {
  PhaseField chi;
  chi.grid = g;
  chi.wells = {A};
  chi.labels.assign(g.cells(), 0);
  return chi;
}

}  // namespace

TEST_CASE("relaxed energy examples") {
  const Grid g{3, 8};
  const auto w = t3_wells();
  const PhaseField a1 = constant_phase(g, well(w.A[0]));
  CHECK(elastic_energy_relaxed(a1, well(w.A[0]), kDiv).value == 0.0);
  CHECK(elastic_energy_relaxed(a1, well(w.S[2]), kDiv).value == doctest::Approx(10.0 / 9.0).epsilon(1e-14));

  // A1/S1 laminate along e1 with mean S3.
  const PhaseField lam = oracle::laminate_phase(g, well(w.A[0]), well(w.S[0]), 0, 2, 0.5);
  const RelaxedEnergy e = elastic_energy_relaxed(lam, well(w.S[2]), kDiv);
  CHECK(e.value < 1e-28);
  CHECK(oracle::relaxed_divergence(lam, well(w.S[2])) < 1e-28);
}

TEST_CASE("relaxed energy matches the naive-DFT oracle") {
  std::mt19937_64 rng(31);
  const Grid g{3, 4};
  for (int s = 0; s < 5; ++s) {
    const PhaseField chi = oracle::random_phase(g, t3_wellset().wells, rng);
    const Mat F = well(t3_wells().S[2]);
    CHECK(elastic_energy_relaxed(chi, F, kDiv).value == doctest::Approx(oracle::relaxed_divergence(chi, F)).epsilon(1e-12));
  }
}

TEST_CASE("diagonal specialization agrees with the projection formula") {
  std::mt19937_64 rng(32);
  for (int s = 0; s < 10; ++s) {
    const Grid g{3, 8};
    const PhaseField chi = oracle::random_phase(g, t3_wellset().wells, rng, 0.3);
    const Mat F = well(t3_wells().S[2]);
    const double general = elastic_energy_relaxed(chi, F, kDiv).value;
    CHECK(elastic_energy_relaxed_diagonal(chi, F) == doctest::Approx(general).epsilon(1e-12));
  }
}

TEST_CASE("incompatible laminate obeys the nucleation bound") {
  const Grid g{3, 16};
  const auto w = t3_wells();
  const Mat A1 = well(w.A[0]), A2 = well(w.A[1]);
  const PhaseField lam = oracle::laminate_phase(g, A2, A1, 0, 1, 0.5);
  const Mat F = 0.5 * (A1 + A2);
  double C = 1e300;
  for (const auto& xi : sphere_lattice(3, 2000)) C = std::min(C, (symbol_eval(kDiv, xi) * flatten(A2 - A1)).squaredNorm());
  CHECK(elastic_energy_relaxed(lam, F, kDiv).value >= C * 0.25 * (1.0 - 1e-12));
}

TEST_CASE("pair energy") {
  std::mt19937_64 rng(33);
  const Grid g{3, 8};
  const PhaseField chi = oracle::random_phase(g, t3_wellset().wells, rng);
  TensorField u = chi.to_tensor();
  CHECK(elastic_energy_pair(u, chi) == 0.0);
  Mat c = Mat::Zero(3, 3);
  c(0, 1) = 0.25;
  c(2, 2) = -0.5;
  for (std::size_t i = 0; i < g.cells(); ++i) u.set(i, u.at(i) + c);
  CHECK(elastic_energy_pair(u, chi) == doctest::Approx(c.squaredNorm()).epsilon(1e-13));
  TensorField other(Grid{3, 4}, 3, 3);
  CHECK_THROWS_AS(elastic_energy_pair(other, chi), Error);
}

TEST_CASE("pair energy of the rasterized unit cell approaches the analytic value") {
  UnitCellParams p;
  p.A = Mat::Zero(3, 3);
  p.B = oracle::diag3(0, 4, 4);
  p.l = 0.25;
  p.h = 0.5;
  const UnitCellResult uc = branching_unit_cell(p);
  CHECK(uc.analytic_elastic == doctest::Approx(16.0 / 2048.0).epsilon(1e-14));
  CHECK(exact_energies(uc.complex).elastic == doctest::Approx(uc.analytic_elastic).epsilon(1e-12));
}

TEST_CASE("surface energy") {
  const Grid g{3, 8};
  const auto w = t3_wells();
  CHECK(surface_energy(constant_phase(g, well(w.A[0]))) == 0.0);
  const PhaseField lam = oracle::laminate_phase(g, well(w.A[0]), well(w.S[0]), 0, 1, 0.5);
  CHECK(surface_energy(lam) == doctest::Approx(2.0 * 2.0 * std::sqrt(10.0) / 3.0).epsilon(1e-14));

  // 45 degree interface: between the exact perimeter and sqrt(d) times it.
  const Grid g2{2, 64};
  PhaseField tilt;
  tilt.grid = g2;
  tilt.wells = {Mat::Zero(2, 2), Mat::Identity(2, 2)};
  tilt.labels.resize(g2.cells());
  for (std::size_t i = 0; i < g2.cells(); ++i) {
    const Vec3 x = g2.center(i);
    const double s = x(0) + x(1);
    tilt.labels[i] = (s > 0.5 && s < 1.5) ? 1 : 0;
  }
  const double jump = std::sqrt(2.0);
  const double perimeter = 2.0 * std::sqrt(2.0) * jump;
  const double tv = surface_energy(tilt);
  CHECK(tv >= perimeter * (1.0 - 1e-12));
  CHECK(tv <= std::sqrt(2.0) * perimeter * (1.0 + 1e-12));
}

TEST_CASE("energy report and total") {
  std::mt19937_64 rng(34);
  const Grid g{3, 8};
  const PhaseField chi = oracle::random_phase(g, t3_wellset().wells, rng);
  const TensorField u = chi.to_tensor();
  const EnergyReport r = evaluate_energy(u, chi, kDiv, 0.01, well(t3_wells().S[2]));
  CHECK(r.total == doctest::Approx(r.pair + 0.01 * r.surface).epsilon(1e-15));
  CHECK(r.pair >= 0.0);
  CHECK(r.relaxed >= 0.0);
  const auto j = r.to_json();
  for (const char* k : {"eps", "E_el_pair", "E_el_relaxed", "E_surf", "E_total"}) CHECK(j.contains(k));
}

TEST_CASE("relaxation ordering on construction rasters") {
  const BranchingResult br = build_two_well_branching(BranchingParams::defaults(3, 6), 1e-3);
  for (int n : {16, 32, 64}) {
    const Raster r = rasterize(br.complex, n);
    const Mat F = br.complex.exterior;
    const double relaxed_chi = elastic_energy_relaxed(r.chi, F, kDiv).value;
    const double relaxed_u = elastic_energy_relaxed(r.u, F, kDiv).value;
    const double pair = elastic_energy_pair(r.u, r.chi);
    CHECK(std::sqrt(relaxed_chi) <= std::sqrt(pair) + std::sqrt(relaxed_u) + 1e-12);
  }
}

TEST_CASE("frequency controls") {
  const Grid g{3, 16};
  const Mat M = oracle::diag3(0, 4, 4);
  // ker M = span(e1). A mode along e2 has zero projection onto ker M, so it sits in the low slab.
  std::vector<double> f(g.cells());
  for (std::size_t i = 0; i < g.cells(); ++i) f[i] = std::cos(2.0 * std::numbers::pi * 3.0 * g.center(i)(1));
  const ControlCheck lo = low_freq_control_check(g, f, M, 2.0, 1.0);
  CHECK(lo.lhs == doctest::Approx(l2_norm_sq(g, f)).epsilon(1e-12));
  std::vector<double> fx(g.cells());
  for (std::size_t i = 0; i < g.cells(); ++i) fx[i] = std::cos(2.0 * std::numbers::pi * 5.0 * g.center(i)(0));
  CHECK(low_freq_control_check(g, fx, M, 2.0, 1.0).lhs < 1e-28);

  // Band-limited below mu: no high-frequency mass.
  const ControlCheck hi = high_freq_control_check(g, f, 4.0, 1.0);
  CHECK(hi.lhs < 1e-28);
  CHECK(hi.pass);
  // Sawtooth-like laminate: the tail mass decays for mu well above the period count.
  const PhaseField lam = oracle::laminate_phase(g, Mat::Zero(3, 3), M, 0, 1, 0.5);
  const auto s = two_phase_scalar(lam, 0, 1);
  const double t2 = high_freq_control_check(g, s, 2.0, 1.0).lhs;
  const double t6 = high_freq_control_check(g, s, 6.0, 1.0).lhs;
  CHECK(t6 < t2);
}
