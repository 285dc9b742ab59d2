#include "microlam/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "microlam/energy.hpp"
#include "microlam/errors.hpp"
#include "microlam/matrix_literal.hpp"
#include "microlam/parallel.hpp"

namespace microlam {

namespace {

const char* construction_name(SweepConstruction c) { return c == SweepConstruction::branching ? "branching" : "t3"; }

const char* variant_name(BranchingVariant v) { return v == BranchingVariant::upper ? "upper" : "d_dim"; }

int pow2_at_least(double x) {
  int n = 16;
  while (n < x && n < (1 << 20)) n *= 2;
  return n;
}

struct RasterStats {
  double interface_area = 0.0, max_pointwise = 0.0, grad_sq = 0.0;
};

RasterStats complex_stats(const RegionComplex& rc) {
  RasterStats s;
  for (std::size_t i = 0; i < rc.regions.size(); ++i) {
    const Region& r = rc.regions[i];
    const Mat& w = rc.wells[static_cast<std::size_t>(r.chi)];
    for (const Vec3& v : rc.geom[i].verts) s.max_pointwise = std::max(s.max_pointwise, (r.u.at(v) - w).squaredNorm());
    if (!r.u.constant)
      for (const Mat& g : r.u.grad) s.grad_sq += rc.geom[i].volume * g.squaredNorm();
  }
  for (const Interface& itf : rc.interfaces)
    if (itf.minus != kExterior && itf.plus != kExterior) s.interface_area += itf.area;
  return s;
}

// Raster energies of (u, chi) compared with the exact elastic energy.
RasterCheck raster_check(const Raster& ras, const Mat& F, const OperatorSpec& op, double exact_elastic, double exact_aniso,
                         const RasterStats& st, int d, double feature, int min_cells) {
  RasterCheck rc;
  rc.grid = ras.grid.n;
  rc.feature = feature;
  rc.policy_met = feature * ras.grid.n >= min_cells;
  rc.E_el_pair = elastic_energy_pair(ras.u, ras.chi);
  rc.E_el_relaxed = elastic_energy_relaxed(ras.chi, F, op).value;
  rc.E_surf = surface_energy(ras.chi);
  rc.exact_surface_aniso = exact_aniso;
  rc.elastic_error = std::abs(rc.E_el_pair - exact_elastic);
  rc.elastic_bound = raster_elastic_bound(st.interface_area, st.max_pointwise, st.grad_sq, d, 1.0 / ras.grid.n);
  rc.within_bound = rc.elastic_error <= rc.elastic_bound * (1.0 + 1e-9) + 1e-12;
  return rc;
}

SweepRow branching_row(const SweepConfig& cfg, double eps, bool raster) {
  SweepRow row;
  row.eps = eps;
  const int N = cfg.N_fixed ? *cfg.N_fixed : std::max(2, static_cast<int>(std::lround(cfg.N_scale * std::cbrt(1.0 / eps))));
  BranchingParams p = BranchingParams::defaults(cfg.d, N);
  p.theta = cfg.theta;
  p.lambda = cfg.lambda;
  p.variant = cfg.variant;
  const BranchingResult res = build_two_well_branching(p, eps);
  const double feature = 1.0 / (N * std::ldexp(1.0, res.j0 + 1));
  row.params = {{"N", N}, {"j0", res.j0}, {"theta", p.theta}, {"lambda", p.lambda}, {"d", p.d}, {"feature", feature}};
  const OperatorSpec op = divergence_operator(static_cast<int>(p.A.rows()), p.d);
  const InterfaceReport ir = interface_check(res.complex, op);
  row.interface_pass = ir.pass;
  row.interface_residual = ir.max_residual;
  row.E_el_pair = res.exact.elastic;
  row.E_surf = res.exact.surface;
  row.E_total = res.total();
  if (raster) {
    const int n = std::min(cfg.max_grid, pow2_at_least(cfg.min_cells / feature));
    const Raster ras = rasterize(res.complex, n);
    row.raster = raster_check(ras, res.complex.exterior, op, res.exact.elastic, res.exact.surface_aniso, complex_stats(res.complex),
                              p.d, feature, cfg.min_cells);
    row.E_el_relaxed = row.raster->E_el_relaxed;
  }
  row.ok = true;
  return row;
}

SweepRow t3_row(const SweepConfig& cfg, double eps, bool raster) {
  SweepRow row;
  row.eps = eps;
  T3Params p = T3Params::paper_schedule(eps);
  if (cfg.m_fixed) p.m = *cfg.m_fixed;
  if (cfg.r_fixed) p.r_base = *cfg.r_fixed;
  p.F = parse_matrix_literal(cfg.F);
  T3Result res = build_t3_laminate(p, false);
  double regions = 0.0;
  for (const auto& c : res.classes) regions += static_cast<double>(c.multiplicity) * static_cast<double>(c.local_regions);
  const double feature = res.r_used.back() / 8.0;
  row.params = {{"m", p.m},
                {"levels", res.levels},
                {"r", p.r_base},
                {"r_1", res.r_used.front()},
                {"r_m", res.r_used.back()},
                {"bound", res.bound},
                {"feature", feature}};
  const OperatorSpec op = divergence_operator(3, 3);
  if (regions <= 2e5) {
    res = build_t3_laminate(p, true);
    const InterfaceReport ir = interface_check(*res.complex, op);
    row.interface_pass = ir.pass;
    row.interface_residual = ir.max_residual;
  }
  row.E_el_pair = res.elastic;
  row.E_surf = res.surface;
  row.E_total = res.total();
  if (raster) {
    const int n = std::min(cfg.max_grid, pow2_at_least(cfg.min_cells / feature));
    const Raster ras = rasterize_t3(res, n);
    row.raster = raster_check(ras, p.F.to_mat(), op, res.elastic, res.surface_aniso, {res.interface_area, res.max_pointwise, res.grad_sq}, 3,
                              feature, cfg.min_cells);
    row.E_el_relaxed = row.raster->E_el_relaxed;
  }
  row.ok = true;
  return row;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> param_columns(SweepConstruction c) {
  if (c == SweepConstruction::branching) return {"N", "j0", "theta", "lambda", "d"};
  return {"m", "levels", "r", "r_1", "r_m"};
}

std::string json_number(const nlohmann::json& v) {
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return fmt17(v.get<double>());
  return "";
}

}  // namespace

void SweepConfig::validate() const {
  for (std::size_t i = 0; i < eps.size(); ++i) {
    require(eps[i] > 0.0 && eps[i] < 1.0, ErrorCode::invalid_input, "eps " + fmt17(eps[i]) + " outside (0, 1)");
    if (i > 0)
      require(eps[i] < eps[i - 1], ErrorCode::invalid_input,
              "eps list must be strictly decreasing (entry " + std::to_string(i) + " = " + fmt17(eps[i]) + ")");
  }
  require(d == 2 || d == 3, ErrorCode::invalid_input, "d must be 2 or 3");
  require(N_scale > 0.0, ErrorCode::invalid_input, "N_scale must be positive");
  require(min_cells >= 1, ErrorCode::invalid_input, "min_cells must be at least 1");
  require(max_grid >= 4 && max_grid <= 512, ErrorCode::invalid_input, "max_grid must lie in [4, 512]");
  require(!m_fixed || *m_fixed >= 1, ErrorCode::invalid_input, "m must be at least 1");
}

SweepConfig SweepConfig::from_json(const nlohmann::json& j) {
  SweepConfig c;
  try {
    const std::string kind = j.value("construction", std::string("branching"));
    require(kind == "branching" || kind == "t3", ErrorCode::invalid_input, "construction must be branching or t3");
    c.construction = kind == "branching" ? SweepConstruction::branching : SweepConstruction::t3;
    if (j.contains("eps")) {
      c.eps = j.at("eps").get<std::vector<double>>();
    } else if (j.contains("eps_range")) {
      const auto& r = j.at("eps_range");
      c.eps = log_spaced_eps(r.at("from").get<double>(), r.at("to").get<double>(), r.value("per_decade", 2));
    }
    c.d = j.value("d", c.d);
    c.theta = j.value("theta", c.theta);
    c.lambda = j.value("lambda", c.lambda);
    const std::string variant = j.value("variant", std::string("d_dim"));
    require(variant == "d_dim" || variant == "upper", ErrorCode::invalid_input, "variant must be d_dim or upper");
    c.variant = variant == "upper" ? BranchingVariant::upper : BranchingVariant::d_dim;
    c.N_scale = j.value("N_scale", c.N_scale);
    if (j.contains("N")) c.N_fixed = j.at("N").get<int>();
    if (j.contains("m")) c.m_fixed = j.at("m").get<int>();
    if (j.contains("r")) c.r_fixed = j.at("r").get<double>();
    c.F = j.value("F", c.F);
    c.raster_rows = j.value("raster_rows", c.raster_rows);
    c.min_cells = j.value("min_cells", c.min_cells);
    c.max_grid = j.value("max_grid", c.max_grid);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_input, std::string("sweep config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json SweepConfig::to_json() const {
  nlohmann::json j = {{"construction", construction_name(construction)},
                      {"eps", eps},
                      {"d", d},
                      {"theta", theta},
                      {"lambda", lambda},
                      {"variant", variant_name(variant)},
                      {"N_scale", N_scale},
                      {"F", F},
                      {"raster_rows", raster_rows},
                      {"min_cells", min_cells},
                      {"max_grid", max_grid},
                      {"seed", seed}};
  if (N_fixed) j["N"] = *N_fixed;
  if (m_fixed) j["m"] = *m_fixed;
  if (r_fixed) j["r"] = *r_fixed;
  return j;
}

nlohmann::json RasterCheck::to_json() const {
  return {{"grid", grid},
          {"policy_met", policy_met},
          {"feature", feature},
          {"E_el_pair", E_el_pair},
          {"E_el_relaxed", E_el_relaxed},
          {"E_surf", E_surf},
          {"exact_surface_aniso", exact_surface_aniso},
          {"elastic_error", elastic_error},
          {"elastic_bound", elastic_bound},
          {"within_bound", within_bound}};
}

std::string SweepRow::checks() const {
  if (!ok) return "error:" + error;
  std::string s = "iface=";
  s += interface_pass ? (*interface_pass ? "pass" : "fail") : "skipped";
  if (raster) {
    s += ";raster_bound=";
    s += raster->within_bound ? "pass" : "fail";
    s += ";grid=" + std::to_string(raster->grid);
    s += raster->policy_met ? ";policy=met" : ";policy=capped";
  }
  return s;
}

nlohmann::json SweepRow::to_json() const {
  nlohmann::json j = {{"eps", eps}, {"ok", ok}, {"params", params}, {"checks", checks()}};
  if (!ok) {
    j["error"] = error;
    return j;
  }
  j["E_el_pair"] = E_el_pair;
  j["E_surf"] = E_surf;
  j["E_total"] = E_total;
  if (E_el_relaxed) j["E_el_relaxed"] = *E_el_relaxed;
  if (interface_pass) {
    j["interface_pass"] = *interface_pass;
    j["interface_residual"] = interface_residual;
  }
  if (raster) j["raster"] = raster->to_json();
  return j;
}

nlohmann::json SweepTable::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows) rs.push_back(r.to_json());
  return {{"config", config.to_json()}, {"rows", rs}};
}

std::vector<double> log_spaced_eps(double a, double b, int per_decade) {
  require(a > 0.0 && b > a && per_decade >= 1, ErrorCode::invalid_input, "eps range needs 0 < from < to and per_decade >= 1");
  const long steps = std::lround((b - a) * per_decade);
  require(std::abs((b - a) * per_decade - static_cast<double>(steps)) < 1e-9, ErrorCode::invalid_input,
          "eps range must span a whole number of steps");
  std::vector<double> out;
  for (long i = 0; i <= steps; ++i) out.push_back(std::pow(10.0, -(a + static_cast<double>(i) / per_decade)));
  return out;
}

SweepTable run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  SweepTable t;
  t.config = cfg;
  t.rows.resize(cfg.eps.size());
  parallel_tasks(cfg.eps.size(), [&](std::size_t i) {
    const bool raster = cfg.raster_rows < 0 || static_cast<int>(i) < cfg.raster_rows;
    try {
      t.rows[i] = cfg.construction == SweepConstruction::branching ? branching_row(cfg, cfg.eps[i], raster)
                                                                   : t3_row(cfg, cfg.eps[i], raster);
    } catch (const Error& e) {
      SweepRow row;
      row.eps = cfg.eps[i];
      row.error = std::string(error_code_name(e.code())) + ": " + e.what();
      t.rows[i] = std::move(row);
    }
  });
  return t;
}

std::string sweep_csv(const SweepTable& t) {
  std::ostringstream os;
  const auto cols = param_columns(t.config.construction);
  os << "eps";
  for (const auto& c : cols) os << "," << c;
  os << ",E_el_pair,E_el_relaxed,E_surf,E_total,checks\n";
  for (const auto& r : t.rows) {
    os << fmt17(r.eps);
    for (const auto& c : cols) os << "," << (r.params.contains(c) ? json_number(r.params.at(c)) : "");
    if (r.ok) {
      os << "," << fmt17(r.E_el_pair) << "," << (r.E_el_relaxed ? fmt17(*r.E_el_relaxed) : "") << "," << fmt17(r.E_surf) << ","
         << fmt17(r.E_total);
    } else {
      os << ",,,,";
    }
    os << "," << csv_field(r.checks()) << "\n";
  }
  return os.str();
}

std::vector<SweepPoint> read_sweep_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), ErrorCode::fit, "empty sweep CSV");
  const auto header = csv_split(line);
  auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    require(it != header.end(), ErrorCode::fit, "sweep CSV lacks the column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ce = col("eps"), ct = col("E_total");
  std::vector<SweepPoint> pts;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = csv_split(line);
    require(f.size() == header.size(), ErrorCode::fit, "sweep CSV row has " + std::to_string(f.size()) + " fields");
    if (f[ct].empty()) continue;
    try {
      pts.push_back({std::stod(f[ce]), std::stod(f[ct])});
    } catch (const std::exception&) {
      throw Error(ErrorCode::fit, "unparseable number in sweep CSV: " + line);
    }
  }
  return pts;
}

ScalingModel scaling_model_from_string(const std::string& s) {
  if (s == "algebraic") return ScalingModel::algebraic;
  if (s == "stretched") return ScalingModel::stretched;
  throw Error(ErrorCode::invalid_input, "unknown scaling model '" + s + "' (algebraic|stretched)");
}

std::string to_string(ScalingModel m) { return m == ScalingModel::algebraic ? "algebraic" : "stretched"; }

nlohmann::json ScalingFitResult::to_json() const {
  return {{"model", to_string(model)},
          {"a", a},
          {model == ScalingModel::algebraic ? "alpha" : "c", exponent},
          {"r2", r2},
          {"residuals", residuals}};
}

ScalingFitResult fit_scaling(std::span<const SweepPoint> pts, ScalingModel model) {
  require(pts.size() >= 4, ErrorCode::fit, "fit needs at least 4 points, got " + std::to_string(pts.size()));
  std::vector<double> xs, ys;
  for (const auto& p : pts) {
    require(p.eps > 0.0 && p.eps < 1.0, ErrorCode::fit, "eps " + fmt17(p.eps) + " outside (0, 1)");
    require(p.E > 0.0 && std::isfinite(p.E), ErrorCode::fit, "nonpositive energy " + fmt17(p.E) + " at eps " + fmt17(p.eps));
    xs.push_back(model == ScalingModel::algebraic ? std::log(p.eps) : -std::sqrt(std::abs(std::log(p.eps))));
    ys.push_back(std::log(p.E));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  require(sxx > 0.0, ErrorCode::fit, "fit needs at least two distinct eps");
  ScalingFitResult r;
  r.model = model;
  r.exponent = sxy / sxx;
  const double intercept = my - r.exponent * mx;
  r.a = std::exp(intercept);
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double res = ys[i] - (intercept + r.exponent * xs[i]);
    r.residuals.push_back(res);
    ssr += res * res;
  }
  r.r2 = syy > 0.0 ? 1.0 - ssr / syy : (ssr == 0.0 ? 1.0 : 0.0);
  return r;
}

Rational exponent_balance(int p) {
  require(p >= 1, ErrorCode::invalid_input, "degeneracy degree must be at least 1");
  // mu = eps^{-beta}: mu^{2p} = mu^{-1} eps^{-1} gives -2p beta = beta - 1.
  const Rational beta = Rational(1) / Rational(2 * p + 1);
  return Rational(2 * p) * beta;
}

}  // namespace microlam
