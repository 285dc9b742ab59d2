#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "microlam/rational.hpp"
#include "microlam/symbol.hpp"

namespace microlam {

// T3 wells A1 = 0, A2 = diag(-1/2, 2/3, 3), A3 = Id and auxiliaries S1, S2, S3 (index 0 holds A1/S1).
struct T3Wells {
  std::array<RMat, 3> A;
  std::array<RMat, 3> S;
};
T3Wells t3_wells();

// Floating-point well list with optional boundary datum and fraction.
struct WellSet {
  std::vector<Mat> wells;
  std::optional<Mat> F;
  std::optional<double> lambda;
};
WellSet t3_wellset();

// Index of the nearest well in Frobenius distance; ties go to the smallest index.
int nearest_well(const Mat& u, const std::vector<Mat>& wells);

struct HullWitness {
  enum class Kind { triangle, leg } kind = Kind::triangle;
  std::array<Rational, 3> barycentric{};  // F = sum b_i S_i (triangle)
  int leg = 0;                            // 1-based leg index
  Rational t{0};                          // F = t A_leg + (1 - t) S_leg
};

struct HullMembership {
  bool inside = false;
  std::optional<HullWitness> witness;
  std::string reason;
};

HullMembership t3_qc_hull_contains(const RMat& f);

// One split of a laminate tree: value = lambda * children[0] + (1 - lambda) * children[1].
struct SplitNode {
  RMat value;
  std::string label;
  Rational lambda{0};
  int axis = -1;           // lamination normal e_axis (0-based) certifying compatibility
  bool truncated = false;  // unresolved auxiliary leaf at the depth limit
  std::vector<SplitNode> children;
};

struct HullDecomposition {
  enum class Kind { vertex, leg, triangle } kind = Kind::vertex;
  Rational lambda{1}, nu1{0}, nu2{0};
  int j = 0, k = 0;  // 1-based well indices
  Rational t{0};     // leg parameter, F = t A_j + (1 - t) S_j
  int explicit_order = 0;
  SplitNode tree;
};

HullDecomposition hull_decompose(const RMat& f, int tree_depth = 4);
RMat recompose(const SplitNode& node);

struct HullStepResult {
  std::vector<Mat> points;
  bool changed = false;
  int compatible_pairs = 0;
};

HullStepResult laminar_hull_step(const OperatorSpec& op, const std::vector<Mat>& cloud, int samples_per_segment = 17,
                                 double dist_tol = 1e-12);

struct HPoly {
  int i = 0, j = 0;  // 1-based, h_{i,j}(f_i) = f_j
  Rational quad{0}, lin{0};
  Rational operator()(const Rational& x) const { return quad * x * x + lin * x; }
};

std::vector<HPoly> hij_polynomials();

struct HijVerification {
  bool exact = false;
  int checks = 0;
  std::vector<std::string> failures;
};

HijVerification verify_hij();

enum class RigidityMode { automatic, enumerate, pruned };

struct RigidityResult {
  std::vector<std::vector<int>> fields;  // labels per cell, row-major
  std::uint64_t nodes = 0;
  bool enumerated = false;
};

// Periodic label fields on an ng^d grid whose every face jump W_p - W_q satisfies symbol(e_axis)(W_p - W_q) = 0.
RigidityResult exact_rigidity_search(int ng, int d, const std::vector<Mat>& wells, const OperatorSpec& op,
                                     RigidityMode mode = RigidityMode::automatic, std::uint64_t guard = 100000000ULL);

}  // namespace microlam
