#include "microlam/hulls.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "microlam/errors.hpp"

namespace microlam {

T3Wells t3_wells() {
  using Q = Rational;
  T3Wells w;
  w.A[0] = RMat::diag({Q(0), Q(0), Q(0)});
  w.A[1] = RMat::diag({Q(-1, 2), Q(2, 3), Q(3)});
  w.A[2] = RMat::diag({Q(1), Q(1), Q(1)});
  w.S[0] = RMat::diag({Q(0), Q(2, 3), Q(2)});
  w.S[1] = RMat::diag({Q(1, 2), Q(2, 3), Q(1)});
  w.S[2] = RMat::diag({Q(0), Q(1, 3), Q(1)});
  return w;
}

WellSet t3_wellset() {
  const T3Wells w = t3_wells();
  WellSet ws;
  for (const auto& a : w.A) ws.wells.push_back(a.to_mat());
  ws.F = w.S[2].to_mat();
  return ws;
}

int nearest_well(const Mat& u, const std::vector<Mat>& wells) {
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < wells.size(); ++i) {
    const double dist = (u - wells[i]).squaredNorm();
    if (dist < bd) {
      bd = dist;
      best = static_cast<int>(i);
    }
  }
  return best;
}

namespace {

using Q = Rational;
using V3 = std::array<Q, 3>;

V3 diag3(const RMat& m) { return {m(0, 0), m(1, 1), m(2, 2)}; }

V3 sub(const V3& a, const V3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

// Solves w = a u + b v exactly; nullopt if inconsistent.
std::optional<std::pair<Q, Q>> solve_plane(const V3& u, const V3& v, const V3& w) {
  for (int r = 0; r < 3; ++r)
    for (int s = r + 1; s < 3; ++s) {
      const Q det = u[r] * v[s] - u[s] * v[r];
      if (det == 0) continue;
      const Q a = (w[r] * v[s] - w[s] * v[r]) / det;
      const Q b = (u[r] * w[s] - u[s] * w[r]) / det;
      for (int q = 0; q < 3; ++q)
        if (a * u[q] + b * v[q] != w[q]) return std::nullopt;
      return std::make_pair(a, b);
    }
  return std::nullopt;
}

// t with p = s + t (a - s), if any.
std::optional<Q> solve_segment(const V3& s, const V3& a, const V3& p) {
  const V3 dir = sub(a, s), w = sub(p, s);
  std::optional<Q> t;
  for (int q = 0; q < 3; ++q)
    if (dir[q] != 0) {
      t = w[q] / dir[q];
      break;
    }
  if (!t) return std::nullopt;
  for (int q = 0; q < 3; ++q)
    if (*t * dir[q] != w[q]) return std::nullopt;
  return t;
}

bool in_unit(const Q& x) { return x >= 0 && x <= 1; }

struct Located {
  std::optional<std::array<Q, 3>> triangle;  // barycentrics w.r.t. S1, S2, S3
  std::optional<std::pair<int, Q>> leg;      // 0-based leg, t
};

Located locate(const RMat& f) {
  const T3Wells w = t3_wells();
  const V3 p = diag3(f);
  const V3 s1 = diag3(w.S[0]), s2 = diag3(w.S[1]), s3 = diag3(w.S[2]);
  Located loc;
  if (auto ab = solve_plane(sub(s1, s3), sub(s2, s3), sub(p, s3))) {
    const Q a = ab->first, b = ab->second, c = Q(1) - a - b;
    if (a >= 0 && b >= 0 && c >= 0) loc.triangle = std::array<Q, 3>{a, b, c};
  }
  for (int j = 0; j < 3; ++j) {
    auto t = solve_segment(diag3(w.S[static_cast<std::size_t>(j)]), diag3(w.A[static_cast<std::size_t>(j)]), p);
    if (t && in_unit(*t)) {
      loc.leg = std::make_pair(j, *t);
      break;
    }
  }
  return loc;
}

bool check_shape(const RMat& f, std::string& reason) {
  if (f.rows() != 3 || f.cols() != 3) {
    reason = "F must be 3x3";
    return false;
  }
  if (!f.is_diagonal()) {
    reason = "F has off-diagonal entries";
    return false;
  }
  return true;
}

std::string s_name(int j) { return "S" + std::to_string(j + 1); }
std::string a_name(int j) { return "A" + std::to_string(j + 1); }

// S_j = (A_{j+1} + S_{j+1}) / 2, laminated along e_{j+1}; expanded to the given depth.
SplitNode expand_s(int j, int depth) {
  const T3Wells w = t3_wells();
  SplitNode node;
  node.value = w.S[static_cast<std::size_t>(j)];
  node.label = s_name(j);
  if (depth <= 0) {
    node.truncated = true;
    return node;
  }
  const int next = (j + 1) % 3;
  node.lambda = Q(1, 2);
  node.axis = next;
  SplitNode leaf;
  leaf.value = w.A[static_cast<std::size_t>(next)];
  leaf.label = a_name(next);
  node.children.push_back(leaf);
  node.children.push_back(expand_s(next, depth - 1));
  return node;
}

SplitNode expand_leg(int j, const Q& t, const RMat& value, const std::string& label, int depth) {
  const T3Wells w = t3_wells();
  if (t == 0) return expand_s(j, depth);
  SplitNode node;
  node.value = value;
  node.label = label;
  node.lambda = t;
  node.axis = j;
  SplitNode leaf;
  leaf.value = w.A[static_cast<std::size_t>(j)];
  leaf.label = a_name(j);
  node.children.push_back(leaf);
  node.children.push_back(expand_s(j, depth));
  return node;
}

}  // namespace

HullMembership t3_qc_hull_contains(const RMat& f) {
  HullMembership out;
  if (!check_shape(f, out.reason)) return out;
  const Located loc = locate(f);
  if (loc.triangle) {
    out.inside = true;
    HullWitness wit;
    wit.kind = HullWitness::Kind::triangle;
    wit.barycentric = *loc.triangle;
    out.witness = wit;
    if (loc.leg) {
      out.witness->leg = loc.leg->first + 1;
      out.witness->t = loc.leg->second;
    }
    return out;
  }
  if (loc.leg) {
    out.inside = true;
    HullWitness wit;
    wit.kind = HullWitness::Kind::leg;
    wit.leg = loc.leg->first + 1;
    wit.t = loc.leg->second;
    out.witness = wit;
    return out;
  }
  out.reason = "no barycentric or leg solution";
  return out;
}

HullDecomposition hull_decompose(const RMat& f, int tree_depth) {
  std::string reason;
  require(check_shape(f, reason), ErrorCode::membership, "F outside the T3 hull: " + reason);
  const T3Wells w = t3_wells();
  for (int j = 0; j < 3; ++j)
    require(!(f == w.A[static_cast<std::size_t>(j)]), ErrorCode::trivial_input,
            "F equals the well " + a_name(j) + "; nothing to decompose");
  const Located loc = locate(f);
  require(loc.triangle || loc.leg, ErrorCode::membership, "F outside the T3 quasiconvex hull");
  HullDecomposition dec;
  for (int j = 0; j < 3; ++j)
    if (f == w.S[static_cast<std::size_t>(j)]) {
      dec.kind = HullDecomposition::Kind::vertex;
      dec.lambda = 1;
      dec.nu1 = 0;
      dec.j = j + 1;
      dec.tree = expand_s(j, tree_depth);
      return dec;
    }
  if (loc.leg) {
    const int j = loc.leg->first;
    dec.kind = HullDecomposition::Kind::leg;
    dec.j = j + 1;
    dec.t = loc.leg->second;
    dec.explicit_order = 1;
    dec.tree = expand_leg(j, dec.t, f, "F", tree_depth);
    return dec;
  }
  // Interior: F = lam F1 + (1 - lam) F2 with F1 on leg 1, F2 on leg 3 and F1 - F2 parallel to S1 - S2 (kernel e2).
  const auto& bc = *loc.triangle;
  const Q a = bc[0], b = bc[1], s = a + b;
  dec.kind = HullDecomposition::Kind::triangle;
  dec.lambda = a / s;
  dec.nu1 = (Q(1) - s) / Q(2);
  dec.nu2 = s / Q(2);
  dec.j = 1;
  dec.k = 3;
  dec.explicit_order = 2;
  const RMat f1 = w.S[2] + s * (w.S[0] - w.S[2]);
  const RMat f2 = w.S[2] + s * (w.S[1] - w.S[2]);
  SplitNode root;
  root.value = f;
  root.label = "F";
  root.lambda = dec.lambda;
  root.axis = 1;
  root.children.push_back(expand_leg(0, dec.nu1, f1, "F1", tree_depth));
  root.children.push_back(expand_leg(2, dec.nu2, f2, "F2", tree_depth));
  dec.tree = root;
  return dec;
}

RMat recompose(const SplitNode& node) {
  if (node.children.empty()) return node.value;
  return node.lambda * recompose(node.children[0]) + (Q(1) - node.lambda) * recompose(node.children[1]);
}

HullStepResult laminar_hull_step(const OperatorSpec& op, const std::vector<Mat>& cloud, int samples_per_segment,
                                 double dist_tol) {
  require(op.order() == 1, ErrorCode::unsupported_order, "laminar hull step needs a first-order operator");
  require(samples_per_segment >= 2, ErrorCode::invalid_input, "need at least two samples per segment");
  HullStepResult out;
  out.points = cloud;
  auto known = [&](const Mat& p) {
    for (const auto& q : out.points)
      if ((p - q).norm() <= dist_tol * (1.0 + p.norm())) return true;
    return false;
  };
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (std::size_t j = i + 1; j < cloud.size(); ++j) {
      const Mat diff = cloud[j] - cloud[i];
      if (diff.norm() == 0.0) continue;
      if (!wave_cone_contains(op, flatten(diff)).member) continue;
      ++out.compatible_pairs;
      for (int s = 1; s + 1 < samples_per_segment; ++s) {
        const double lam = static_cast<double>(s) / (samples_per_segment - 1);
        const Mat p = (1.0 - lam) * cloud[i] + lam * cloud[j];
        if (!known(p)) {
          out.points.push_back(p);
          out.changed = true;
        }
      }
    }
  return out;
}

std::vector<HPoly> hij_polynomials() {
  return {
      {1, 2, Q(14, 9), Q(-5, 9)},  {1, 3, Q(14, 3), Q(-11, 3)},  {2, 1, Q(21, 4), Q(-17, 4)},
      {2, 3, Q(-21, 2), Q(23, 2)}, {3, 1, Q(-7, 12), Q(19, 12)}, {3, 2, Q(-7, 18), Q(25, 18)},
  };
}

HijVerification verify_hij() {
  const T3Wells w = t3_wells();
  HijVerification v;
  for (const auto& h : hij_polynomials()) {
    if (h(Q(0)) != 0) v.failures.push_back("h" + std::to_string(h.i) + std::to_string(h.j) + "(0) != 0");
    ++v.checks;
    for (int well = 0; well < 3; ++well) {
      const auto diag = w.A[static_cast<std::size_t>(well)].diagonal();
      const Q fi = diag[static_cast<std::size_t>(h.i - 1)], fj = diag[static_cast<std::size_t>(h.j - 1)];
      ++v.checks;
      if (h(fi) != fj)
        v.failures.push_back("h" + std::to_string(h.i) + std::to_string(h.j) + "(" + to_string(fi) + ") = " +
                             to_string(h(fi)) + ", expected " + to_string(fj) + " on A" + std::to_string(well + 1));
    }
  }
  v.exact = v.failures.empty();
  return v;
}

RigidityResult exact_rigidity_search(int ng, int d, const std::vector<Mat>& wells, const OperatorSpec& op,
                                     RigidityMode mode, std::uint64_t guard) {
  require(ng >= 1 && ng <= 4, ErrorCode::invalid_input, "rigidity grid must have 1..4 cells per axis");
  require(d >= 1 && d <= 3 && d == op.d(), ErrorCode::dimension_mismatch, "grid dimension must match the operator");
  require(!wells.empty(), ErrorCode::invalid_input, "empty well set");
  require(op.order() == 1, ErrorCode::unsupported_order, "rigidity search needs a first-order operator");
  const int nk = static_cast<int>(wells.size());
  int cells = 1;
  for (int a = 0; a < d; ++a) cells *= ng;

  // compat[a][p][q]: a face with normal e_a may separate wells p and q.
  std::vector<std::vector<std::vector<char>>> compat(
      static_cast<std::size_t>(d), std::vector<std::vector<char>>(static_cast<std::size_t>(nk), std::vector<char>(static_cast<std::size_t>(nk), 0)));
  for (int a = 0; a < d; ++a) {
    const Mat sym = symbol_eval(op, Vec::Unit(d, a));
    for (int p = 0; p < nk; ++p)
      for (int q = 0; q < nk; ++q) {
        const Mat diff = wells[static_cast<std::size_t>(p)] - wells[static_cast<std::size_t>(q)];
        require(diff.size() == op.n(), ErrorCode::dimension_mismatch, "well size does not match the operator state");
        compat[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] =
            (sym * flatten(diff)).norm() <= 1e-12 * std::max(1.0, diff.norm());
      }
  }
  std::vector<int> stride(static_cast<std::size_t>(d));
  {
    int s = 1;
    for (int a = d - 1; a >= 0; --a) {
      stride[static_cast<std::size_t>(a)] = s;
      s *= ng;
    }
  }
  auto neighbor = [&](int c, int a, int dir) {
    const int sa = stride[static_cast<std::size_t>(a)];
    const int coord = (c / sa) % ng;
    const int nc = (coord + dir + ng) % ng;
    return c + (nc - coord) * sa;
  };

  double space = 1.0;
  for (int c = 0; c < cells; ++c) space *= nk;
  bool enumerate = mode == RigidityMode::enumerate || (mode == RigidityMode::automatic && space <= static_cast<double>(guard));
  RigidityResult res;
  res.enumerated = enumerate;
  std::vector<int> lab(static_cast<std::size_t>(cells), 0);

  if (enumerate) {
    require(space <= static_cast<double>(guard), ErrorCode::enumeration_guard,
            "enumeration space " + fmt17(space) + " exceeds the guard");
    const auto total = static_cast<std::uint64_t>(space);
    for (std::uint64_t code = 0; code < total; ++code) {
      std::uint64_t x = code;
      for (int c = cells - 1; c >= 0; --c) {
        lab[static_cast<std::size_t>(c)] = static_cast<int>(x % static_cast<std::uint64_t>(nk));
        x /= static_cast<std::uint64_t>(nk);
      }
      ++res.nodes;
      bool ok = true;
      for (int c = 0; c < cells && ok; ++c)
        for (int a = 0; a < d && ok; ++a) {
          const int nb = neighbor(c, a, +1);
          ok = compat[static_cast<std::size_t>(a)][static_cast<std::size_t>(lab[static_cast<std::size_t>(c)])]
                     [static_cast<std::size_t>(lab[static_cast<std::size_t>(nb)])];
        }
      if (ok) res.fields.push_back(lab);
    }
    return res;
  }

  // Exhaustive backtracking in row-major order; a face is tested once both cells are placed.
  std::function<void(int)> place = [&](int c) {
    if (c == cells) {
      res.fields.push_back(lab);
      return;
    }
    for (int p = 0; p < nk; ++p) {
      require(++res.nodes <= guard, ErrorCode::enumeration_guard, "search node guard exceeded");
      bool ok = true;
      for (int a = 0; a < d && ok; ++a)
        for (int dir : {-1, +1}) {
          const int nb = neighbor(c, a, dir);
          if (nb < c || nb == c) {
            const int q = nb == c ? p : lab[static_cast<std::size_t>(nb)];
            if (!compat[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)][static_cast<std::size_t>(q)]) {
              ok = false;
              break;
            }
          }
        }
      if (!ok) continue;
      lab[static_cast<std::size_t>(c)] = p;
      place(c + 1);
    }
  };
  place(0);
  return res;
}

}  // namespace microlam
