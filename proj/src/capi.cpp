#include "microlam/microlam.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>

#include "microlam/constructions.hpp"
#include "microlam/diagnostics.hpp"
#include "microlam/energy.hpp"
#include "microlam/errors.hpp"
#include "microlam/hulls.hpp"
#include "microlam/matrix_literal.hpp"
#include "microlam/scaling.hpp"

using namespace microlam;
using nlohmann::json;

struct ml_operator {
  OperatorSpec op;
};

struct ml_construction {
  std::string kind;
  std::optional<RegionComplex> complex;
  std::optional<T3Result> t3;
  std::optional<OperatorSpec> op;
  json report;
};

struct ml_field {
  TensorField u;
  std::optional<PhaseField> chi;
  json meta;
};

namespace {

thread_local std::string g_last_error;

template <class Fn>
ml_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return ML_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<ml_status>(static_cast<int>(e.code()));
  } catch (const json::exception& e) {
    g_last_error = std::string("malformed JSON: ") + e.what();
    return ML_ERR_INVALID_INPUT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ML_ERR_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** dst, const json& j) {
  require(dst != nullptr, ErrorCode::invalid_input, "null output pointer");
  *dst = dup(j.dump());
}

void need(const void* p, const char* what) { require(p != nullptr, ErrorCode::invalid_input, std::string("null ") + what); }

json mat_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Mat mat_from_json(const json& j) {
  require(j.is_array() && !j.empty() && j[0].is_array(), ErrorCode::invalid_input, "matrix JSON must be a nonempty array of rows");
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].size() == j[0].size(), ErrorCode::invalid_input, "ragged matrix JSON");
    for (std::size_t k = 0; k < j[i].size(); ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
  }
  return m;
}

Mat literal(const std::string& s) { return parse_matrix_literal(s).to_mat(); }

json rational_json(const Rational& q) { return to_string(q); }

json rmat_json(const RMat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(to_string(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

json split_json(const SplitNode& n) {
  json j = {{"label", n.label}, {"value", rmat_json(n.value)}};
  if (!n.children.empty()) {
    j["lambda"] = rational_json(n.lambda);
    j["axis"] = n.axis;
    j["children"] = json::array();
    for (const auto& c : n.children) j["children"].push_back(split_json(c));
  }
  if (n.truncated) j["truncated"] = true;
  return j;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

std::vector<Mat> wells_from_spec(const std::string& spec) {
  if (spec == "t3") return t3_wellset().wells;
  const json j = json::parse(spec);
  require(j.is_array() && !j.empty(), ErrorCode::invalid_input, "wells must be \"t3\" or a JSON array of matrix literals");
  std::vector<Mat> w;
  for (const auto& e : j) w.push_back(literal(e.get<std::string>()));
  return w;
}

OperatorSpec field_operator(const ml_field& f, const ml_operator* op) {
  if (op) return op->op;
  if (f.meta.contains("operator")) return operator_from_json(f.meta.at("operator"));
  require(f.u.cols == f.u.grid.d, ErrorCode::dimension_mismatch, "default divergence operator needs d columns");
  return divergence_operator(f.u.rows, f.u.grid.d);
}

std::optional<Mat> field_datum(const ml_field& f, const char* F_literal) {
  if (F_literal) return literal(F_literal);
  if (f.meta.contains("F")) return mat_from_json(f.meta.at("F"));
  return std::nullopt;
}

const PhaseField& labels(const ml_field& f) {
  require(f.chi.has_value(), ErrorCode::invalid_input, "field carries no phase labels");
  return *f.chi;
}

void build_branching(const json& p, ml_construction& c) {
  const double eps = p.value("eps", 0.0);
  int N = 0;
  if (p.contains("N")) {
    N = p.at("N").get<int>();
  } else {
    require(eps > 0.0, ErrorCode::invalid_input, "branching needs N or eps > 0");
    N = std::max(2, static_cast<int>(std::lround(std::cbrt(1.0 / eps))));
  }
  BranchingParams bp = BranchingParams::defaults(p.value("d", 3), N);
  bp.theta = p.value("theta", bp.theta);
  bp.lambda = p.value("lambda", bp.lambda);
  const std::string variant = p.value("variant", std::string("d_dim"));
  require(variant == "d_dim" || variant == "upper", ErrorCode::invalid_input, "variant must be d_dim or upper");
  bp.variant = variant == "upper" ? BranchingVariant::upper : BranchingVariant::d_dim;
  if (p.contains("A")) bp.A = literal(p.at("A").get<std::string>());
  if (p.contains("B")) bp.B = literal(p.at("B").get<std::string>());
  BranchingResult r = build_two_well_branching(bp, eps);
  c.report = r.report();
  c.report["N"] = N;
  c.report["theta"] = bp.theta;
  c.report["lambda"] = bp.lambda;
  c.report["d"] = bp.d;
  c.report["variant"] = variant;
  c.report["finest_feature"] = 1.0 / (N * std::ldexp(1.0, r.j0 + 1));
  c.op = divergence_operator(static_cast<int>(bp.A.rows()), bp.d);
  c.complex = std::move(r.complex);
}

void build_t3(const json& p, ml_construction& c) {
  const double eps = p.value("eps", 0.0);
  T3Params tp;
  if (eps > 0.0 && !p.contains("m")) tp = T3Params::paper_schedule(eps);
  tp.eps = eps;
  if (p.contains("m")) tp.m = p.at("m").get<int>();
  if (p.contains("r")) {
    if (p.at("r").is_array()) {
      tp.r = p.at("r").get<std::vector<double>>();
    } else {
      tp.r_base = p.at("r").get<double>();
    }
  }
  tp.F = parse_matrix_literal(p.value("F", std::string("S3")));
  T3Result r = build_t3_laminate(tp, p.value("explicit", false));
  c.report = r.report();
  c.report["F"] = p.value("F", std::string("S3"));
  c.report["finest_feature"] = r.r_used.back() / 8.0;
  c.op = divergence_operator(3, 3);
  if (r.complex) c.complex = std::move(*r.complex);
  r.complex.reset();
  c.t3 = std::move(r);
}

void build_laminate(const json& p, ml_construction& c) {
  LaminateParams lp;
  lp.A = literal(p.at("A").get<std::string>());
  lp.B = literal(p.at("B").get<std::string>());
  lp.lambda = p.value("lambda", 0.5);
  lp.periods = p.value("periods", 1);
  if (p.contains("axis")) lp.axis = p.at("axis").get<int>();
  OperatorSpec op = p.contains("op") ? operator_from_json(p.at("op"))
                                     : divergence_operator(static_cast<int>(lp.A.rows()), static_cast<int>(lp.A.cols()));
  RegionComplex rc = simple_laminate(op, lp);
  const ExactEnergies e = exact_energies(rc);
  const double eps = p.value("eps", 0.0);
  c.report = {{"eps", eps},
              {"E_el_pair", e.elastic},
              {"E_surf", e.surface},
              {"E_total", e.elastic + eps * e.surface},
              {"regions", rc.regions.size()},
              {"interfaces", rc.interfaces.size()},
              {"meta", rc.meta},
              {"finest_feature", std::min(lp.lambda, 1.0 - lp.lambda) / lp.periods}};
  c.op = op;
  c.complex = std::move(rc);
}

}  // namespace

extern "C" {

const char* ml_version(void) { return "0.1.0"; }

const char* ml_last_error(void) { return g_last_error.c_str(); }

const char* ml_status_name(ml_status s) {
  if (s == ML_OK) return "ok";
  if (s == ML_ERR_INTERNAL) return "internal";
  if (s >= ML_ERR_INVALID_INPUT && s <= ML_ERR_MEMBERSHIP) return error_code_name(static_cast<ErrorCode>(static_cast<int>(s)));
  return "unknown";
}

void ml_string_free(char* s) { std::free(s); }

ml_status ml_operator_builtin(const char* name, int rows, int d, ml_operator** out) {
  return guarded([&] {
    need(name, "operator name");
    need(out, "output");
    *out = new ml_operator{builtin_operator(name, rows, d)};
  });
}

ml_status ml_operator_from_json(const char* text, ml_operator** out) {
  return guarded([&] {
    need(text, "JSON");
    need(out, "output");
    *out = new ml_operator{operator_from_json(json::parse(text))};
  });
}

ml_status ml_operator_to_json(const ml_operator* op, char** out) {
  return guarded([&] {
    need(op, "operator");
    put(out, operator_to_json(op->op));
  });
}

void ml_operator_free(ml_operator* op) { delete op; }

ml_status ml_symbol_eval(const ml_operator* op, const double* xi, int d, double* out, size_t out_len) {
  return guarded([&] {
    need(op, "operator");
    need(xi, "xi");
    need(out, "output");
    require(d == op->op.d(), ErrorCode::dimension_mismatch, "xi length must equal the operator dimension");
    const Mat s = symbol_eval(op->op, std::span<const double>(xi, static_cast<std::size_t>(d)));
    require(out_len >= static_cast<size_t>(s.size()), ErrorCode::dimension_mismatch, "output buffer too small");
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      for (Eigen::Index j = 0; j < s.cols(); ++j) out[i * s.cols() + j] = s(i, j);
  });
}

ml_status ml_wave_cone(const ml_operator* op, const char* mu_literal, double tol, char** out) {
  return guarded([&] {
    need(op, "operator");
    need(mu_literal, "mu");
    const Vec mu = flatten(literal(mu_literal));
    require(mu.size() == op->op.n(), ErrorCode::dimension_mismatch,
            "mu has " + std::to_string(mu.size()) + " entries, the operator state has " + std::to_string(op->op.n()));
    const WaveConeCertificate c = wave_cone_contains(op->op, mu, tol);
    json j = {{"member", c.member}, {"residual", c.residual}, {"sigma_ref", c.sigma_ref}};
    if (c.direction) j["direction"] = vec_json(*c.direction);
    if (op->op.order() == 1) {
      const Mat L = lamination_space(op->op, mu);
      json basis = json::array();
      for (Eigen::Index k = 0; k < L.cols(); ++k) basis.push_back(vec_json(L.col(k)));
      j["lamination_space"] = basis;
    }
    put(out, j);
  });
}

ml_status ml_constant_rank(const ml_operator* op, int samples, char** out) {
  return guarded([&] {
    need(op, "operator");
    const ConstantRankReport r = constant_rank_check(op->op, samples);
    put(out, {{"constant", r.constant}, {"min_rank", r.min_rank}, {"max_rank", r.max_rank}, {"samples", r.samples}});
  });
}

ml_status ml_omega(const ml_operator* op, unsigned long long seed, char** out) {
  return guarded([&] {
    need(op, "operator");
    const OmegaMap m = omega_reduction(op->op, seed);
    put(out, {{"m", m.m}, {"d", m.d}, {"n", m.n}, {"matrix", mat_json(m.matrix)}, {"kernel", mat_json(m.kernel)},
              {"kernel_dim", m.kernel.cols()}, {"max_probe_error", m.max_probe_error}});
  });
}

ml_status ml_parse_matrix(const char* text, char** out) {
  return guarded([&] {
    need(text, "literal");
    const RMat m = parse_matrix_literal(text);
    put(out, {{"rows", m.rows()}, {"cols", m.cols()}, {"exact", rmat_json(m)}, {"values", mat_json(m.to_mat())}});
  });
}

ml_status ml_build(const char* kind, const char* params_json, ml_construction** out) {
  return guarded([&] {
    need(kind, "kind");
    need(out, "output");
    const json p = params_json ? json::parse(params_json) : json::object();
    auto c = std::make_unique<ml_construction>();
    c->kind = kind;
    if (c->kind == "branching") {
      build_branching(p, *c);
    } else if (c->kind == "t3") {
      build_t3(p, *c);
    } else if (c->kind == "laminate") {
      build_laminate(p, *c);
    } else {
      throw Error(ErrorCode::invalid_input, "unknown construction '" + c->kind + "' (branching|t3|laminate)");
    }
    c->report["construction"] = c->kind;
    *out = c.release();
  });
}

void ml_construction_free(ml_construction* c) { delete c; }

ml_status ml_construction_report(const ml_construction* c, char** out) {
  return guarded([&] {
    need(c, "construction");
    put(out, c->report);
  });
}

ml_status ml_construction_regions(const ml_construction* c, char** out) {
  return guarded([&] {
    need(c, "construction");
    require(c->complex.has_value(), ErrorCode::invalid_input, "no explicit region complex (pass \"explicit\": true for t3)");
    put(out, complex_to_json(*c->complex));
  });
}

ml_status ml_construction_interface_check(const ml_construction* c, const ml_operator* op, double tol, char** out) {
  return guarded([&] {
    need(c, "construction");
    require(c->complex.has_value(), ErrorCode::invalid_input, "no explicit region complex to check");
    const InterfaceReport r = interface_check(*c->complex, op ? op->op : *c->op, tol > 0.0 ? tol : 1e-12);
    put(out, {{"pass", r.pass},
              {"max_residual", r.max_residual},
              {"scale", r.scale},
              {"interfaces", r.interfaces},
              {"uncovered_area", r.uncovered_area},
              {"overlap_area", r.overlap_area},
              {"offending", r.offending}});
  });
}

ml_status ml_construction_rasterize(const ml_construction* c, int n, ml_field** out) {
  return guarded([&] {
    need(c, "construction");
    need(out, "output");
    Raster r;
    Mat F;
    if (c->complex) {
      r = rasterize(*c->complex, n);
      F = c->complex->exterior;
    } else {
      require(c->t3.has_value(), ErrorCode::invalid_input, "construction has nothing to rasterize");
      r = rasterize_t3(*c->t3, n);
      F = c->t3->params.F.to_mat();
    }
    auto f = std::make_unique<ml_field>();
    f->u = std::move(r.u);
    f->chi = std::move(r.chi);
    f->meta = {{"construction", c->kind}, {"F", mat_json(F)}, {"operator", operator_to_json(*c->op)}, {"report", c->report}};
    *out = f.release();
  });
}

ml_status ml_field_read(const char* path, ml_field** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "output");
    FieldFile ff = read_field(path);
    *out = new ml_field{std::move(ff.u), std::move(ff.chi), std::move(ff.meta)};
  });
}

ml_status ml_field_write(const ml_field* f, const char* path, const char* meta_json) {
  return guarded([&] {
    need(f, "field");
    need(path, "path");
    json meta = f->meta;
    if (meta_json) meta.merge_patch(json::parse(meta_json));
    write_field(path, f->u, f->chi ? &*f->chi : nullptr, meta);
  });
}

ml_status ml_field_info(const ml_field* f, char** out) {
  return guarded([&] {
    need(f, "field");
    json j = {{"d", f->u.grid.d}, {"N_g", f->u.grid.n}, {"value_shape", {f->u.rows, f->u.cols}}, {"labels", f->chi.has_value()},
              {"mean", mat_json(mean(f->u))}, {"meta", f->meta}};
    if (f->chi) {
      j["wells"] = json::array();
      for (const auto& w : f->chi->wells) j["wells"].push_back(mat_json(w));
    }
    put(out, j);
  });
}

void ml_field_free(ml_field* f) { delete f; }

ml_status ml_field_energy(const ml_field* f, const ml_operator* op, double eps, const char* F_literal, char** out) {
  return guarded([&] {
    need(f, "field");
    const EnergyReport r = evaluate_energy(f->u, labels(*f), field_operator(*f, op), eps, field_datum(*f, F_literal));
    put(out, r.to_json());
  });
}

ml_status ml_hull_check(const char* F_literal, char** out) {
  return guarded([&] {
    need(F_literal, "F");
    const HullMembership m = t3_qc_hull_contains(parse_matrix_literal(F_literal));
    json j = {{"inside", m.inside}};
    if (!m.reason.empty()) j["reason"] = m.reason;
    if (m.witness) {
      const auto& w = *m.witness;
      json wj;
      wj["kind"] = w.kind == HullWitness::Kind::triangle ? "triangle" : "leg";
      if (w.kind == HullWitness::Kind::triangle)
        wj["barycentric"] = {to_string(w.barycentric[0]), to_string(w.barycentric[1]), to_string(w.barycentric[2])};
      if (w.leg > 0) {
        wj["leg"] = w.leg;
        wj["t"] = to_string(w.t);
      }
      j["witness"] = wj;
    }
    put(out, j);
  });
}

ml_status ml_hull_decompose(const char* F_literal, int tree_depth, char** out) {
  return guarded([&] {
    need(F_literal, "F");
    const HullDecomposition d = hull_decompose(parse_matrix_literal(F_literal), tree_depth);
    const char* kind = d.kind == HullDecomposition::Kind::vertex ? "vertex" : d.kind == HullDecomposition::Kind::leg ? "leg" : "triangle";
    put(out, {{"kind", kind},
              {"lambda", to_string(d.lambda)},
              {"nu1", to_string(d.nu1)},
              {"nu2", to_string(d.nu2)},
              {"j", d.j},
              {"k", d.k},
              {"t", to_string(d.t)},
              {"explicit_order", d.explicit_order},
              {"recomposes", recompose(d.tree) == parse_matrix_literal(F_literal)},
              {"tree", split_json(d.tree)}});
  });
}

ml_status ml_verify_t3_identities(char** out) {
  return guarded([&] {
    const T3Wells w = t3_wells();
    json s = json::array();
    bool all = true;
    for (int i = 0; i < 3; ++i) {
      const int nx = (i + 1) % 3;
      const bool ok = w.S[static_cast<std::size_t>(i)] == Rational(1, 2) * (w.A[static_cast<std::size_t>(nx)] + w.S[static_cast<std::size_t>(nx)]);
      all = all && ok;
      s.push_back({{"identity", "S" + std::to_string(i + 1) + " = (A" + std::to_string(nx + 1) + " + S" + std::to_string(nx + 1) + ")/2"},
                   {"exact", ok}});
    }
    const HijVerification h = verify_hij();
    put(out, {{"s_identities", s}, {"s_exact", all}, {"hij_exact", h.exact}, {"hij_checks", h.checks}, {"hij_failures", h.failures}});
  });
}

ml_status ml_rigidity_search(int grid, const char* wells, const char* mode, char** out) {
  return guarded([&] {
    const std::vector<Mat> w = wells_from_spec(wells ? wells : "t3");
    const std::string m = mode ? mode : "auto";
    require(m == "auto" || m == "enumerate" || m == "search", ErrorCode::invalid_input, "mode must be auto, enumerate or search");
    const RigidityMode rm = m == "auto" ? RigidityMode::automatic : m == "enumerate" ? RigidityMode::enumerate : RigidityMode::pruned;
    const int rows = static_cast<int>(w.front().rows());
    const OperatorSpec op = divergence_operator(rows, static_cast<int>(w.front().cols()));
    const RigidityResult r = exact_rigidity_search(grid, op.d(), w, op, rm);
    json fields = json::array();
    for (std::size_t i = 0; i < r.fields.size() && i < 64; ++i) fields.push_back(r.fields[i]);
    put(out, {{"count", r.fields.size()}, {"nodes", r.nodes}, {"enumerated", r.enumerated}, {"fields", fields},
              {"fields_truncated", r.fields.size() > 64}});
  });
}

ml_status ml_sweep(const char* config_json, char** csv, char** out) {
  return guarded([&] {
    need(config_json, "config");
    const SweepTable t = run_sweep(SweepConfig::from_json(json::parse(config_json)));
    if (csv) *csv = dup(sweep_csv(t));
    if (out) put(out, t.to_json());
  });
}

ml_status ml_fit(const char* csv_text, const char* model, char** out) {
  return guarded([&] {
    need(csv_text, "CSV");
    const auto pts = read_sweep_csv(csv_text);
    const ScalingFitResult r = fit_scaling(pts, scaling_model_from_string(model ? model : "algebraic"));
    json j = r.to_json();
    j["points"] = pts.size();
    put(out, j);
  });
}

ml_status ml_exponent_balance(int p, long long* num, long long* den) {
  return guarded([&] {
    need(num, "numerator");
    need(den, "denominator");
    const Rational q = exponent_balance(p);
    *num = q.numerator();
    *den = q.denominator();
  });
}

ml_status ml_calibrate_controls(const ml_field* f, int a, int b, const double* mus, size_t n_mus, double safety, char** out) {
  return guarded([&] {
    need(f, "field");
    need(mus, "mu list");
    const ControlConstants c = calibrate_controls(labels(*f), a, b, std::span<const double>(mus, n_mus), safety);
    put(out, c.to_json());
  });
}

ml_status ml_lower_bound(const ml_field* f, int a, int b, const char* F_literal, double eps, const char* constants_json, char** out) {
  return guarded([&] {
    need(f, "field");
    ControlConstants c;
    if (constants_json) {
      const json j = json::parse(constants_json);
      if (j.contains("C_low")) c.C_low = j.at("C_low").get<double>();
      if (j.contains("C_high")) c.C_high = j.at("C_high").get<double>();
    }
    const PhaseField& chi = labels(*f);
    const auto F = field_datum(*f, F_literal);
    put(out, lower_bound_certificate(chi, a, b, F ? *F : mean(f->u), eps, c).to_json());
  });
}

ml_status ml_rigidity_estimate(const ml_field* f, const char* F_literal, double eps, double c_nu, double nu, char** out) {
  return guarded([&] {
    need(f, "field");
    const auto F = field_datum(*f, F_literal);
    put(out, rigidity_estimate_check(labels(*f), F ? *F : mean(f->u), eps, c_nu, nu).to_json());
  });
}

ml_status ml_cone_profile(const ml_field* f, const char* F_literal, double eps, double nu, int kmax, double growth, int smooth,
                          char** out) {
  return guarded([&] {
    need(f, "field");
    const auto F = field_datum(*f, F_literal);
    put(out, cone_truncation_profile(labels(*f), F ? *F : mean(f->u), eps, nu, kmax, growth, smooth != 0).to_json());
  });
}

}  // extern "C"
