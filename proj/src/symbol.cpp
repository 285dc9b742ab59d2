#include "microlam/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "microlam/errors.hpp"

namespace microlam {

OperatorSpec::OperatorSpec(int order, int d, int n, int m, std::vector<OperatorTerm> terms, std::string name,
                           int state_rows, int state_cols)
    : order_(order), d_(d), n_(n), m_(m), terms_(std::move(terms)), name_(std::move(name)) {
  require(order >= 1, ErrorCode::invalid_input, "operator order must be positive");
  require(d >= 1 && n >= 1 && m >= 1, ErrorCode::invalid_input, "operator dimensions must be positive");
  bool nonzero = false;
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    auto& term = terms_[t];
    require(static_cast<int>(term.alpha.size()) == order, ErrorCode::dimension_mismatch,
            "term " + std::to_string(t) + ": multi-index length " + std::to_string(term.alpha.size()) +
                " differs from order " + std::to_string(order));
    for (std::size_t a = 0; a < term.alpha.size(); ++a)
      require(term.alpha[a] >= 0 && term.alpha[a] < d, ErrorCode::dimension_mismatch,
              "term " + std::to_string(t) + ": alpha[" + std::to_string(a) + "] = " + std::to_string(term.alpha[a]) +
                  " outside 0.." + std::to_string(d - 1));
    std::sort(term.alpha.begin(), term.alpha.end());
    require(term.coeff.rows() == m && term.coeff.cols() == n, ErrorCode::dimension_mismatch,
            "term " + std::to_string(t) + ": coefficient is " + std::to_string(term.coeff.rows()) + "x" +
                std::to_string(term.coeff.cols()) + ", expected " + std::to_string(m) + "x" + std::to_string(n));
    require(term.coeff.allFinite(), ErrorCode::invalid_input, "term " + std::to_string(t) + ": non-finite coefficient");
    if (term.coeff.cwiseAbs().maxCoeff() > 0.0) nonzero = true;
  }
  require(nonzero, ErrorCode::invalid_input, "operator has no nonzero coefficient");
  if (state_rows <= 0 || state_cols <= 0) {
    state_rows = n;
    state_cols = 1;
  }
  require(state_rows * state_cols == n, ErrorCode::dimension_mismatch, "state shape does not match n");
  state_rows_ = state_rows;
  state_cols_ = state_cols;
}

Mat OperatorSpec::first_order_coeff(int j) const {
  require(order_ == 1, ErrorCode::unsupported_order, "first-order coefficient requested for order " + std::to_string(order_));
  Mat a = Mat::Zero(m_, n_);
  for (const auto& t : terms_)
    if (t.alpha[0] == j) a += t.coeff;
  return a;
}

OperatorSpec divergence_operator(int rows, int d) {
  std::vector<OperatorTerm> terms;
  for (int j = 0; j < d; ++j) {
    Mat a = Mat::Zero(rows, rows * d);
    for (int i = 0; i < rows; ++i) a(i, i * d + j) = 1.0;
    terms.push_back({{j}, a});
  }
  return OperatorSpec(1, d, rows * d, rows, std::move(terms), "div", rows, d);
}

OperatorSpec curl3_operator(int rows) {
  // (e_q x v)_p = eps_{pqr} v_r
  auto eps = [](int p, int q, int r) {
    if (p == q || q == r || p == r) return 0.0;
    return ((p + 1) % 3 == q) ? 1.0 : -1.0;
  };
  std::vector<OperatorTerm> terms;
  for (int q = 0; q < 3; ++q) {
    Mat a = Mat::Zero(3 * rows, 3 * rows);
    for (int i = 0; i < rows; ++i)
      for (int p = 0; p < 3; ++p)
        for (int r = 0; r < 3; ++r) a(i * 3 + p, i * 3 + r) = eps(p, q, r);
    terms.push_back({{q}, a});
  }
  return OperatorSpec(1, 3, 3 * rows, 3 * rows, std::move(terms), "curl3", rows, 3);
}

OperatorSpec curlcurl2_operator() {
  Mat a11 = Mat::Zero(1, 4), a12 = Mat::Zero(1, 4), a22 = Mat::Zero(1, 4);
  a11(0, 3) = 1.0;                  // xi1^2 M22
  a12(0, 1) = a12(0, 2) = -1.0;     // -xi1 xi2 (M12 + M21)
  a22(0, 0) = 1.0;                  // xi2^2 M11
  return OperatorSpec(2, 2, 4, 1, {{{0, 0}, a11}, {{0, 1}, a12}, {{1, 1}, a22}}, "curlcurl2", 2, 2);
}

OperatorSpec builtin_operator(const std::string& name, int rows, int d) {
  if (name == "div") return divergence_operator(rows, d);
  if (name == "curl3") return curl3_operator(rows);
  if (name == "curlcurl2") return curlcurl2_operator();
  throw Error(ErrorCode::invalid_input, "unknown built-in operator '" + name + "'");
}

OperatorSpec operator_from_json(const nlohmann::json& j) {
  try {
    if (j.is_string()) return builtin_operator(j.get<std::string>());
    if (j.contains("builtin"))
      return builtin_operator(j.at("builtin").get<std::string>(), j.value("rows", 3), j.value("d", 3));
    const int order = j.at("order").get<int>();
    const int d = j.at("d").get<int>(), n = j.at("n").get<int>(), m = j.at("m").get<int>();
    std::vector<OperatorTerm> terms;
    for (const auto& c : j.at("coeffs")) {
      OperatorTerm t;
      t.alpha = c.at("alpha").get<std::vector<int>>();
      const auto rows = c.at("matrix").get<std::vector<std::vector<double>>>();
      t.coeff = Mat::Zero(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        require(rows[r].size() == static_cast<std::size_t>(t.coeff.cols()), ErrorCode::dimension_mismatch,
                "term " + std::to_string(terms.size()) + ": ragged matrix row " + std::to_string(r));
        for (std::size_t s = 0; s < rows[r].size(); ++s) t.coeff(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) = rows[r][s];
      }
      terms.push_back(std::move(t));
    }
    int sr = 0, sc = 0;
    if (j.contains("state_shape")) {
      const auto sh = j.at("state_shape").get<std::vector<int>>();
      require(sh.size() == 2, ErrorCode::invalid_input, "state_shape must have two entries");
      sr = sh[0];
      sc = sh[1];
    }
    return OperatorSpec(order, d, n, m, std::move(terms), j.value("name", std::string{}), sr, sc);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_input, std::string("operator JSON: ") + e.what());
  }
}

nlohmann::json operator_to_json(const OperatorSpec& op) {
  nlohmann::json j;
  j["order"] = op.order();
  j["d"] = op.d();
  j["n"] = op.n();
  j["m"] = op.m();
  if (!op.name().empty()) j["name"] = op.name();
  j["state_shape"] = {op.state_rows(), op.state_cols()};
  j["coeffs"] = nlohmann::json::array();
  for (const auto& t : op.terms()) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(t.coeff.rows()));
    for (Eigen::Index r = 0; r < t.coeff.rows(); ++r)
      for (Eigen::Index c = 0; c < t.coeff.cols(); ++c) rows[static_cast<std::size_t>(r)].push_back(t.coeff(r, c));
    j["coeffs"].push_back({{"alpha", t.alpha}, {"matrix", rows}});
  }
  return j;
}

Mat symbol_eval(const OperatorSpec& op, std::span<const double> xi) {
  require(static_cast<int>(xi.size()) == op.d(), ErrorCode::dimension_mismatch,
          "xi has length " + std::to_string(xi.size()) + ", operator expects d = " + std::to_string(op.d()));
  for (std::size_t i = 0; i < xi.size(); ++i)
    require(std::isfinite(xi[i]), ErrorCode::invalid_input, "xi[" + std::to_string(i) + "] is not finite");
  Mat s = Mat::Zero(op.m(), op.n());
  for (const auto& t : op.terms()) {
    double mono = 1.0;
    for (int a : t.alpha) mono *= xi[static_cast<std::size_t>(a)];
    if (mono != 0.0) s += mono * t.coeff;
  }
  return s;
}

std::vector<Vec> sphere_lattice(int d, int count) {
  std::vector<Vec> pts;
  if (d == 1) {
    pts.push_back(Vec::Constant(1, 1.0));
    pts.push_back(Vec::Constant(1, -1.0));
    return pts;
  }
  if (d == 2) {
    for (int i = 0; i < count; ++i) {
      const double t = 2.0 * std::numbers::pi * (i + 0.5) / count;
      Vec v(2);
      v << std::cos(t), std::sin(t);
      pts.push_back(v);
    }
  } else if (d == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / count;
      const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * i;
      Vec v(3);
      v << rad * std::cos(phi), rad * std::sin(phi), z;
      pts.push_back(v);
    }
  } else {
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> g;
    for (int i = 0; i < count; ++i) {
      Vec v(d);
      for (int a = 0; a < d; ++a) v(a) = g(rng);
      pts.push_back(v.normalized());
    }
  }
  for (int a = 0; a < d; ++a) {
    pts.push_back(Vec::Unit(d, a));
    pts.push_back(-Vec::Unit(d, a));
  }
  return pts;
}

double symbol_norm_on_sphere(const OperatorSpec& op, int count) {
  double best = 0.0;
  for (const auto& xi : sphere_lattice(op.d(), count)) best = std::max(best, spectral_norm(symbol_eval(op, xi)));
  return best;
}

namespace {

void check_state(const OperatorSpec& op, const Vec& mu) {
  require(mu.size() == op.n(), ErrorCode::dimension_mismatch,
          "mu has length " + std::to_string(mu.size()) + ", operator expects n = " + std::to_string(op.n()));
  require(mu.allFinite(), ErrorCode::invalid_input, "mu is not finite");
  require(mu.norm() > 0.0, ErrorCode::invalid_input, "mu = 0 is excluded from the wave cone");
}

Mat lamination_matrix(const OperatorSpec& op, const Vec& mu) {
  Mat l(op.m(), op.d());
  for (int j = 0; j < op.d(); ++j) l.col(j) = op.first_order_coeff(j) * mu;
  return l;
}

// Jacobian of xi -> symbol(xi) mu.
Mat residual_jacobian(const OperatorSpec& op, const Vec& xi, const Vec& mu) {
  Mat jac = Mat::Zero(op.m(), op.d());
  for (const auto& t : op.terms()) {
    const Vec tm = t.coeff * mu;
    for (std::size_t p = 0; p < t.alpha.size(); ++p) {
      double mono = 1.0;
      for (std::size_t q = 0; q < t.alpha.size(); ++q)
        if (q != p) mono *= xi(t.alpha[q]);
      jac.col(t.alpha[p]) += mono * tm;
    }
  }
  return jac;
}

// Damped Gauss-Newton for min |symbol(xi) mu| on the sphere.
Vec refine_on_sphere(const OperatorSpec& op, Vec xi, const Vec& mu) {
  double f = (symbol_eval(op, xi) * mu).squaredNorm();
  double damping = 1e-3;
  for (int it = 0; it < 200 && f > 0.0; ++it) {
    const Vec r = symbol_eval(op, xi) * mu;
    const Mat proj = Mat::Identity(op.d(), op.d()) - xi * xi.transpose();
    const Mat j = residual_jacobian(op, xi, mu) * proj;
    const Mat h = j.transpose() * j;
    const Vec g = j.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      const Mat lhs = h + damping * (h.diagonal().maxCoeff() + 1e-300) * Mat::Identity(op.d(), op.d());
      const Vec step = -lhs.ldlt().solve(g);
      Vec cand = xi + proj * step;
      if (!cand.allFinite() || cand.norm() == 0.0) break;
      cand.normalize();
      const double fc = (symbol_eval(op, cand) * mu).squaredNorm();
      if (fc < f) {
        xi = cand;
        f = fc;
        damping = std::max(damping * 0.3, 1e-12);
        improved = true;
        break;
      }
      damping *= 10.0;
    }
    if (!improved) break;
  }
  return xi;
}

}  // namespace

WaveConeCertificate wave_cone_contains(const OperatorSpec& op, const Vec& mu, double tol) {
  check_state(op, mu);
  require(tol >= 0.0, ErrorCode::invalid_input, "tolerance must be nonnegative");
  WaveConeCertificate cert;
  cert.sigma_ref = symbol_norm_on_sphere(op);
  if (op.order() == 1) {
    const Mat l = lamination_matrix(op, mu);
    Eigen::JacobiSVD<Mat> svd(l, Eigen::ComputeFullV);
    const Vec& s = svd.singularValues();
    const int rank = numerical_rank(l);
    cert.member = rank < op.d();
    // Smallest singular value over all d columns (zero when m < d).
    cert.residual = (s.size() < op.d()) ? 0.0 : s(op.d() - 1);
    const Vec xi = svd.matrixV().col(op.d() - 1);
    if (cert.member) cert.direction = xi;
    return cert;
  }
  const auto pts = sphere_lattice(op.d(), 10000);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) scored.emplace_back((symbol_eval(op, pts[i]) * mu).norm(), i);
  const std::size_t keep = std::min<std::size_t>(8, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end());
  double best = std::numeric_limits<double>::infinity();
  Vec best_xi;
  for (std::size_t c = 0; c < keep; ++c) {
    const Vec xi = refine_on_sphere(op, pts[scored[c].second], mu);
    const double res = (symbol_eval(op, xi) * mu).norm();
    if (res < best) {
      best = res;
      best_xi = xi;
    }
  }
  cert.residual = best;
  cert.member = best <= tol * mu.norm() * cert.sigma_ref;
  if (cert.member) cert.direction = best_xi;
  return cert;
}

Mat lamination_space(const OperatorSpec& op, const Vec& mu) {
  require(op.order() == 1, ErrorCode::unsupported_order,
          "lamination space needs a first-order operator (order " + std::to_string(op.order()) + ")");
  check_state(op, mu);
  return null_space(lamination_matrix(op, mu));
}

ConstantRankReport constant_rank_check(const OperatorSpec& op, int samples, double tol) {
  require(samples >= 100, ErrorCode::invalid_input, "constant-rank check needs at least 100 samples");
  const auto pts = sphere_lattice(op.d(), samples);
  std::vector<Vec> sigmas;
  double sigma_ref = 0.0;
  for (const auto& xi : pts) {
    Eigen::JacobiSVD<Mat> svd(symbol_eval(op, xi));
    sigmas.push_back(svd.singularValues());
    if (svd.singularValues().size() > 0) sigma_ref = std::max(sigma_ref, svd.singularValues()(0));
  }
  ConstantRankReport rep;
  rep.samples = static_cast<int>(pts.size());
  rep.min_rank = std::numeric_limits<int>::max();
  for (const auto& s : sigmas) {
    int r = 0;
    const double smax = s.size() ? s(0) : 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > tol * smax && s(i) > 1e-14 * sigma_ref) ++r;
    rep.min_rank = std::min(rep.min_rank, r);
    rep.max_rank = std::max(rep.max_rank, r);
  }
  rep.constant = rep.min_rank == rep.max_rank;
  return rep;
}

OmegaMap omega_reduction(const OperatorSpec& op, std::uint64_t seed, int probes) {
  require(op.order() == 1, ErrorCode::unsupported_order,
          "omega reduction needs a first-order operator (order " + std::to_string(op.order()) + ")");
  OmegaMap w;
  w.m = op.m();
  w.d = op.d();
  w.n = op.n();
  w.matrix = Mat::Zero(op.m() * op.d(), op.n());
  for (int j = 0; j < op.d(); ++j) {
    const Mat a = op.first_order_coeff(j);
    for (int i = 0; i < op.m(); ++i) w.matrix.row(i * op.d() + j) = a.row(i);
  }
  w.kernel = null_space(w.matrix);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (int p = 0; p < probes; ++p) {
    Vec mu(op.n()), xi(op.d());
    for (auto& x : mu) x = g(rng);
    for (auto& x : xi) x = g(rng);
    const double err = (w.apply(mu) * xi - symbol_eval(op, xi) * mu).norm() / (1.0 + mu.norm() * xi.norm());
    w.max_probe_error = std::max(w.max_probe_error, err);
  }
  require(w.max_probe_error <= 1e-13, ErrorCode::invalid_input, "omega identity failed on random probes");
  return w;
}

Mat rotate_frame(const Mat& u, const Mat& r) {
  require(r.rows() == r.cols(), ErrorCode::invalid_input, "rotation must be square");
  require(u.cols() == r.rows(), ErrorCode::dimension_mismatch, "rotation size does not match field columns");
  const double dev = (r.transpose() * r - Mat::Identity(r.rows(), r.cols())).cwiseAbs().maxCoeff();
  require(dev <= 1e-12, ErrorCode::invalid_input, "matrix is not orthogonal (deviation " + fmt17(dev) + ")");
  return u * r;
}

}  // namespace microlam
