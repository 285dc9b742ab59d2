#include <random>

#include "doctest.h"
#include "microlam/errors.hpp"
#include "microlam/hulls.hpp"
#include "microlam/matrix_literal.hpp"
#include "oracles.hpp"

using namespace microlam;

namespace {

const OperatorSpec kDiv = divergence_operator(3, 3);

RMat lit(const char* s) { return parse_matrix_literal(s); }

}  // namespace

TEST_CASE("matrix literals") {
  CHECK(lit("diag(0,2/3,2)") == t3_wells().S[0]);
  CHECK(lit("(A1+S1)/2") == RMat::diag({Rational(0), Rational(1, 3), Rational(1)}));
  CHECK(lit("[[1,2],[3,4]]")(1, 0) == Rational(3));
  CHECK(lit("0.25*Id")(2, 2) == Rational(1, 4));
  CHECK_THROWS_AS(lit("diag(1,"), Error);
  CHECK_THROWS_AS(lit("[[1,2],[3]]"), Error);
  CHECK_THROWS_AS(lit("B7"), Error);
}

TEST_CASE("well identities hold exactly") {
  const T3Wells w = t3_wells();
  for (int i = 0; i < 3; ++i) {
    const std::size_t nx = static_cast<std::size_t>((i + 1) % 3);
    CHECK(w.S[static_cast<std::size_t>(i)] == Rational(1, 2) * (w.A[nx] + w.S[nx]));
    const RMat d = w.S[static_cast<std::size_t>(i)] - w.A[static_cast<std::size_t>(i)];
    for (int r = 0; r < 3; ++r) CHECK(d(r, i) == Rational(0));
  }
  CHECK(w.A[1] == lit("diag(-1/2,2/3,3)"));
  CHECK(w.A[2] == RMat::identity(3));
}

TEST_CASE("h polynomials") {
  const auto hs = hij_polynomials();
  REQUIRE(hs.size() == 6);
  const HPoly& h12 = hs.front();
  CHECK(h12.i == 1);
  CHECK(h12.j == 2);
  CHECK(h12(Rational(-1, 2)) == Rational(2, 3));
  CHECK(h12(Rational(0)) == Rational(0));
  CHECK(h12(Rational(1)) == Rational(1));
  const HijVerification v = verify_hij();
  CHECK(v.exact);
  CHECK(v.failures.empty());
  CHECK(v.checks >= 18);
}

TEST_CASE("hull membership") {
  const T3Wells w = t3_wells();
  const auto s3 = t3_qc_hull_contains(w.S[2]);
  CHECK(s3.inside);
  REQUIRE(s3.witness.has_value());
  for (int j = 0; j < 3; ++j) {
    const RMat mid = Rational(1, 2) * (w.A[static_cast<std::size_t>(j)] + w.S[static_cast<std::size_t>(j)]);
    CHECK(t3_qc_hull_contains(mid).inside);
    const RMat quarter = Rational(1, 4) * w.A[static_cast<std::size_t>(j)] + Rational(3, 4) * w.S[static_cast<std::size_t>(j)];
    const auto q = t3_qc_hull_contains(quarter);
    CHECK(q.inside);
  }
  const RMat bary = Rational(1, 3) * (w.S[0] + w.S[1] + w.S[2]);
  const auto b = t3_qc_hull_contains(bary);
  CHECK(b.inside);
  REQUIRE(b.witness.has_value());
  CHECK(b.witness->kind == HullWitness::Kind::triangle);
  for (const auto& x : b.witness->barycentric) CHECK(x == Rational(1, 3));
  CHECK_FALSE(t3_qc_hull_contains(lit("2*Id")).inside);
  CHECK_FALSE(t3_qc_hull_contains(lit("[[0,1,0],[0,1/3,0],[0,0,1]]")).inside);
  CHECK_FALSE(t3_qc_hull_contains(Rational(1, 2) * (w.A[0] + w.A[1])).inside);
}

TEST_CASE("hull decomposition recomposes exactly") {
  const T3Wells w = t3_wells();
  const RMat bary = Rational(1, 3) * (w.S[0] + w.S[1] + w.S[2]);
  std::vector<RMat> pts = {w.S[2], bary, Rational(1, 4) * w.A[0] + Rational(3, 4) * w.S[0],
                           Rational(1, 5) * w.S[0] + Rational(3, 5) * w.S[1] + Rational(1, 5) * w.S[2]};
  for (const auto& F : pts) {
    const HullDecomposition d = hull_decompose(F, 6);
    CHECK(recompose(d.tree) == F);
    for (const auto& c : {d.lambda, d.nu1, d.nu2, d.t}) {
      CHECK(c >= Rational(0));
      CHECK(c <= Rational(1));
    }
  }
  const HullDecomposition v = hull_decompose(w.S[2], 2);
  CHECK(v.kind == HullDecomposition::Kind::vertex);
  CHECK(v.lambda == Rational(1));
  CHECK(v.nu1 == Rational(0));
  CHECK(v.j == 3);
  const HullDecomposition leg = hull_decompose(Rational(1, 4) * w.A[0] + Rational(3, 4) * w.S[0], 2);
  CHECK(leg.kind == HullDecomposition::Kind::leg);
  CHECK(leg.j == 1);
  CHECK(leg.t == Rational(1, 4));
  const HullDecomposition tri = hull_decompose(bary, 2);
  CHECK(tri.kind == HullDecomposition::Kind::triangle);
  CHECK(tri.lambda * (tri.nu1 * w.A[static_cast<std::size_t>(tri.j - 1)] + (Rational(1) - tri.nu1) * w.S[static_cast<std::size_t>(tri.j - 1)]) +
            (Rational(1) - tri.lambda) *
                (tri.nu2 * w.A[static_cast<std::size_t>(tri.k - 1)] + (Rational(1) - tri.nu2) * w.S[static_cast<std::size_t>(tri.k - 1)]) ==
        bary);
  try {
    hull_decompose(w.A[0]);
    FAIL("well accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::trivial_input);
  }
  try {
    hull_decompose(lit("2*Id"));
    FAIL("outside point accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::membership);
  }
}

TEST_CASE("laminar hull step") {
  const T3Wells w = t3_wells();
  const auto a1s1 = laminar_hull_step(kDiv, {w.A[0].to_mat(), w.S[0].to_mat()});
  CHECK(a1s1.changed);
  CHECK(a1s1.points.size() == 17);
  CHECK(a1s1.compatible_pairs == 1);
  const auto a1a2 = laminar_hull_step(kDiv, {w.A[0].to_mat(), w.A[1].to_mat()});
  CHECK_FALSE(a1a2.changed);
  CHECK(a1a2.points.size() == 2);
  const auto single = laminar_hull_step(kDiv, {w.A[0].to_mat()});
  CHECK_FALSE(single.changed);
  // The T3 wells alone form no compatible pair.
  std::vector<Mat> t3;
  for (const auto& a : w.A) t3.push_back(a.to_mat());
  CHECK(laminar_hull_step(kDiv, t3).compatible_pairs == 0);
}

TEST_CASE("rigidity search") {
  const T3Wells w = t3_wells();
  const std::vector<Mat> single = {w.A[0].to_mat()};
  CHECK(exact_rigidity_search(2, 3, single, kDiv).fields.size() == 1);

  const std::vector<Mat> pair = {w.A[0].to_mat(), w.S[0].to_mat()};
  const RigidityResult en = exact_rigidity_search(2, 3, pair, kDiv, RigidityMode::enumerate);
  const RigidityResult pr = exact_rigidity_search(2, 3, pair, kDiv, RigidityMode::pruned);
  CHECK(en.enumerated);
  CHECK_FALSE(pr.enumerated);
  CHECK(en.fields == pr.fields);
  CHECK(en.fields.size() > 2);

  const std::vector<Mat> t3 = t3_wellset().wells;
  const RigidityResult te = exact_rigidity_search(2, 3, t3, kDiv, RigidityMode::enumerate);
  CHECK(te.fields.size() == 3);
  CHECK(exact_rigidity_search(2, 3, t3, kDiv, RigidityMode::pruned).fields == te.fields);

  // Adding an incompatible well cannot remove admissible fields of the smaller set, and vice versa.
  std::vector<Mat> more = pair;
  more.push_back(w.A[1].to_mat());
  CHECK(exact_rigidity_search(2, 3, more, kDiv).fields.size() >= en.fields.size());
  CHECK_THROWS_AS(exact_rigidity_search(4, 3, t3, kDiv, RigidityMode::enumerate, 1000), Error);
}
