#include <random>

#include "doctest.h"
#include "microlam/errors.hpp"
#include "microlam/hulls.hpp"
#include "microlam/symbol.hpp"
#include "oracles.hpp"

using namespace microlam;

namespace {

Vec random_unit(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = n(rng);
  return v / v.norm();
}

Mat random_mat(std::mt19937_64& rng, int r, int c) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

// Ex. loss operator: d = 2, n = 3, m = 1, A(D)u = d1 u2 + d2 u3.
OperatorSpec loss_operator() {
  Mat a1 = Mat::Zero(1, 3), a2 = Mat::Zero(1, 3);
  a1(0, 1) = 1.0;
  a2(0, 2) = 1.0;
  return OperatorSpec(1, 2, 3, 1, {{{0}, a1}, {{1}, a2}}, "loss");
}

std::vector<Mat> well_mats() {
  const T3Wells w = t3_wells();
  std::vector<Mat> out;
  for (const auto& a : w.A) out.push_back(a.to_mat());
  for (const auto& s : w.S) out.push_back(s.to_mat());
  return out;
}

}  // namespace

TEST_CASE("divergence symbol acts as M xi") {
  std::mt19937_64 rng(11);
  const OperatorSpec op = divergence_operator(3, 3);
  for (int t = 0; t < 20; ++t) {
    const Vec xi = random_unit(rng, 3);
    const Mat M = random_mat(rng, 3, 3);
    CHECK((symbol_eval(op, xi) * flatten(M) - M * xi).norm() < 1e-14);
  }
  Mat e22 = Mat::Zero(3, 3);
  e22(1, 1) = 1.0;
  CHECK((symbol_eval(op, Vec(Vec3::UnitX())) * flatten(e22)).norm() == 0.0);
}

TEST_CASE("curl-curl symbol closed form") {
  std::mt19937_64 rng(12);
  const OperatorSpec op = curlcurl2_operator();
  for (int t = 0; t < 20; ++t) {
    const Vec xi = random_unit(rng, 2) * 1.7;
    const Mat M = random_mat(rng, 2, 2);
    const double expect = xi(1) * xi(1) * M(0, 0) - xi(0) * xi(1) * (M(0, 1) + M(1, 0)) + xi(0) * xi(0) * M(1, 1);
    CHECK((symbol_eval(op, xi) * flatten(M))(0) == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("symbol homogeneity") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ts(-3.0, 3.0);
  for (const auto& op : {divergence_operator(2, 3), curl3_operator(), curlcurl2_operator()}) {
    for (int t = 0; t < 100; ++t) {
      const Vec xi = random_unit(rng, op.d()) * ts(rng);
      const double s = ts(rng);
      const Mat lhs = symbol_eval(op, Vec(s * xi));
      const Mat rhs = std::pow(s, op.order()) * symbol_eval(op, xi);
      CHECK((lhs - rhs).norm() <= 1e-13 * (1.0 + rhs.norm()));
    }
  }
}

TEST_CASE("operator JSON round trip and dimension errors") {
  const OperatorSpec op = curl3_operator();
  const OperatorSpec back = operator_from_json(operator_to_json(op));
  std::mt19937_64 rng(14);
  const Vec xi = random_unit(rng, 3);
  CHECK((symbol_eval(op, xi) - symbol_eval(back, xi)).norm() == 0.0);
  CHECK_THROWS_AS(symbol_eval(op, Vec(Vec::Ones(2))), Error);
}

TEST_CASE("wave cone examples") {
  const OperatorSpec op = divergence_operator(3, 3);
  const auto w = t3_wells();
  const auto S1mA1 = flatten((w.S[0] - w.A[0]).to_mat());
  const auto c = wave_cone_contains(op, S1mA1);
  REQUIRE(c.member);
  CHECK(std::abs(std::abs((*c.direction)(0)) - 1.0) < 1e-14);
  CHECK_FALSE(wave_cone_contains(op, flatten((w.A[1] - w.A[0]).to_mat())).member);
  CHECK_FALSE(wave_cone_contains(op, flatten(Mat(Mat::Identity(3, 3)))).member);
  CHECK_THROWS_AS(wave_cone_contains(op, Vec(Vec::Zero(9))), Error);
}

TEST_CASE("wave cone agrees with the rank of L_mu on all well differences") {
  const OperatorSpec op = divergence_operator(3, 3);
  const auto wells = well_mats();
  for (std::size_t i = 0; i < wells.size(); ++i)
    for (std::size_t j = 0; j < wells.size(); ++j) {
      if (i == j) continue;
      const Mat diff = wells[i] - wells[j];
      if (diff.norm() == 0.0) continue;
      // L_mu columns are (B - A) e_j, i.e. L_mu = B - A for the divergence.
      const bool oracle = numerical_rank(diff) < 3;
      CHECK(wave_cone_contains(op, flatten(diff)).member == oracle);
    }
}

TEST_CASE("lamination space") {
  const OperatorSpec op = divergence_operator(3, 3);
  const auto w = t3_wells();
  const Mat L1 = lamination_space(op, flatten((w.S[0] - w.A[0]).to_mat()));
  REQUIRE(L1.cols() == 1);
  CHECK(std::abs(std::abs(L1(0, 0)) - 1.0) < 1e-14);
  const Mat flex = oracle::diag3(0, 0, 4);
  const Mat L2 = lamination_space(op, flatten(flex));
  REQUIRE(L2.cols() == 2);
  // e1 and e2 lie in the span.
  for (int a : {0, 1}) CHECK((L2 * L2.transpose() * Vec(Vec3::Unit(a)) - Vec(Vec3::Unit(a))).norm() < 1e-14);
  CHECK(lamination_space(op, flatten((w.A[1] - w.A[0]).to_mat())).cols() == 0);
  CHECK_THROWS_AS(lamination_space(curlcurl2_operator(), Vec(Vec::Ones(4))), Error);
}

TEST_CASE("constant rank") {
  CHECK(constant_rank_check(divergence_operator(3, 3), 200).constant);
  CHECK(constant_rank_check(curlcurl2_operator(), 200).constant);
  // A(xi) = xi_1 E with E rank one: rank drops to zero on xi_1 = 0.
  Mat E = Mat::Zero(1, 2);
  E(0, 0) = 1.0;
  const OperatorSpec jump(1, 2, 2, 1, {{{0}, E}}, "jump");
  const auto r = constant_rank_check(jump, 200);
  CHECK_FALSE(r.constant);
  CHECK(r.min_rank == 0);
  CHECK(r.max_rank == 1);
  CHECK_THROWS_AS(constant_rank_check(jump, 10), Error);
}

TEST_CASE("omega reduction") {
  const OmegaMap loss = omega_reduction(loss_operator());
  Vec x(3);
  x << 0.3, -1.2, 2.5;
  const Mat w = loss.apply(x);
  CHECK(w(0, 0) == doctest::Approx(-1.2));
  CHECK(w(0, 1) == doctest::Approx(2.5));
  REQUIRE(loss.kernel.cols() == 1);
  CHECK(std::abs(std::abs(loss.kernel(0, 0)) - 1.0) < 1e-14);
  // Loss of information: e1 is in the wave cone but omega(e1) = 0.
  const Vec e1 = Vec(Vec3::UnitX());
  CHECK(loss.apply(e1).norm() == 0.0);
  CHECK(wave_cone_contains(loss_operator(), e1).member);

  CHECK(omega_reduction(divergence_operator(3, 3)).kernel.cols() == 0);
  CHECK_THROWS_AS(omega_reduction(curlcurl2_operator()), Error);

  std::mt19937_64 rng(15);
  for (int t = 0; t < 5; ++t) {
    std::vector<OperatorTerm> terms;
    for (int j = 0; j < 3; ++j) terms.push_back({{j}, random_mat(rng, 2, 4)});
    const OperatorSpec op(1, 3, 4, 2, terms, "random");
    const OmegaMap om = omega_reduction(op, 100 + static_cast<std::uint64_t>(t));
    for (int p = 0; p < 20; ++p) {
      const Vec mu = random_mat(rng, 4, 1);
      const Vec xi = random_mat(rng, 3, 1);
      CHECK((om.apply(mu) * xi - symbol_eval(op, xi) * mu).norm() <= 1e-13 * (1.0 + mu.norm() * xi.norm()));
    }
  }
}

TEST_CASE("rotate frame") {
  std::mt19937_64 rng(16);
  const Mat u = random_mat(rng, 3, 3);
  CHECK((rotate_frame(u, Mat::Identity(3, 3)) - u).norm() == 0.0);
  // u with u xi = 0 and R e1 = xi gives (uR) e1 = 0.
  const Vec xi = random_unit(rng, 3);
  const Mat proj = Mat::Identity(3, 3) - xi * xi.transpose();
  const Mat v = u * proj;
  Eigen::HouseholderQR<Mat> qr(xi);
  Mat R = qr.householderQ();
  if (R.col(0).dot(xi) < 0) R.col(0) *= -1.0;
  CHECK((rotate_frame(v, R).col(0)).norm() < 1e-14);
  CHECK_THROWS_AS(rotate_frame(u, 2.0 * Mat::Identity(3, 3)), Error);
}
