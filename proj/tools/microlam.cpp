// Command-line front end; talks to the library only through the C interface.
#include <microlam/microlam.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCheck = 3;

constexpr const char* kLiteralHelp =
    "Matrix literals: diag(a,b,c), [[a,b],[c,d]], names A1 A2 A3 S1 S2 S3 Id Id2 Id3, exact numbers "
    "(integers, decimals, 1e-3), combined with + - * / and parentheses, e.g. \"(A1+S1)/2\".";

struct Failure {
  int exit_code;
  std::string message;
};

int exit_for(ml_status s) {
  switch (s) {
    case ML_OK:
      return kExitOk;
    case ML_ERR_TILING:
    case ML_ERR_MEMBERSHIP:
      return kExitCheck;
    case ML_ERR_INTERNAL:
      return kExitInternal;
    default:
      return kExitValidation;
  }
}

void check(ml_status s) {
  if (s != ML_OK) throw Failure{exit_for(s), std::string(ml_status_name(s)) + ": " + ml_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  ml_string_free(s);
  return out;
}

json take_json(char* s) { return json::parse(take(s)); }

struct OperatorDeleter {
  void operator()(ml_operator* p) const { ml_operator_free(p); }
};
struct ConstructionDeleter {
  void operator()(ml_construction* p) const { ml_construction_free(p); }
};
struct FieldDeleter {
  void operator()(ml_field* p) const { ml_field_free(p); }
};
using OperatorPtr = std::unique_ptr<ml_operator, OperatorDeleter>;
using ConstructionPtr = std::unique_ptr<ml_construction, ConstructionDeleter>;
using FieldPtr = std::unique_ptr<ml_field, FieldDeleter>;

std::string fmt17(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON printer with 17 significant digits for every float.
void emit(std::ostream& os, const json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << json(it.key()).dump() << (indent > 0 ? ": " : ":");
        emit(os, it.value(), indent, depth + 1);
      }
      os << nl << close << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << '[' << nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ',' << nl;
        os << pad;
        emit(os, j[i], indent, depth + 1);
      }
      os << nl << close << ']';
      return;
    }
    case json::value_t::number_float:
      os << fmt17(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

std::string to_text(const json& j, int indent = 2) {
  std::ostringstream os;
  emit(os, j, indent, 0);
  return os.str();
}

void print(const json& j) { std::cout << to_text(j) << '\n'; }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kExitValidation, "cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kExitValidation, "cannot write " + path};
  out << text;
}

// Builtin name ("div", "curl3", "curlcurl2") or a path to an operator JSON file.
OperatorPtr load_operator(const std::string& spec, int rows, int d) {
  ml_operator* op = nullptr;
  if (std::filesystem::exists(spec)) {
    check(ml_operator_from_json(read_text(spec).c_str(), &op));
  } else {
    check(ml_operator_builtin(spec.c_str(), rows, d, &op));
  }
  return OperatorPtr(op);
}

FieldPtr load_field(const std::string& path) {
  ml_field* f = nullptr;
  check(ml_field_read(path.c_str(), &f));
  return FieldPtr(f);
}

json field_info(const ml_field* f) {
  char* s = nullptr;
  check(ml_field_info(f, &s));
  return take_json(s);
}

void print_energy_table(const json& e) {
  static const char* keys[] = {"eps", "E_el_pair", "E_el_relaxed", "E_surf", "E_total"};
  for (const char* k : keys) std::printf("%-13s %s\n", k, fmt17(e.at(k).get<double>()).c_str());
}

// Invocation state shared by all subcommands.
struct Run {
  std::vector<std::string> args;
  std::vector<std::string> outputs;
  json extra = json::object();
  int status = kExitOk;

  void record(const std::string& path) { outputs.push_back(path); }

  void fail_check() { status = kExitCheck; }

  // One manifest per run, next to the first output.
  void write_manifest() const {
    if (outputs.empty()) return;
    json m = {{"tool", "microlam"}, {"version", ml_version()}, {"args", args}, {"outputs", outputs}};
    if (const char* t = std::getenv("MICROLAM_THREADS")) m["MICROLAM_THREADS"] = t;
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    write_text(outputs.front() + ".manifest.json", to_text(m) + "\n");
  }
};

struct BuildOpts {
  std::string out, regions;
  int grid = 64;
  double eps = 0.0;
  double tol = 1e-12;
};

void finish_build(Run& run, const std::string& kind, const json& params, const BuildOpts& o) {
  ml_construction* raw = nullptr;
  check(ml_build(kind.c_str(), params.dump().c_str(), &raw));
  ConstructionPtr c(raw);
  char* s = nullptr;
  check(ml_construction_report(c.get(), &s));
  json out = {{"report", take_json(s)}};

  const bool has_complex = kind != "t3" || params.value("explicit", false);
  if (has_complex) {
    check(ml_construction_interface_check(c.get(), nullptr, o.tol, &s));
    json ic = take_json(s);
    ic.erase("offending");
    out["interface_check"] = ic;
    if (!ic.at("pass").get<bool>()) run.fail_check();
  }
  if (!o.regions.empty()) {
    check(ml_construction_regions(c.get(), &s));
    write_text(o.regions, take(s));
  }
  if (!o.out.empty()) {
    ml_field* fr = nullptr;
    check(ml_construction_rasterize(c.get(), o.grid, &fr));
    FieldPtr f(fr);
    check(ml_field_energy(f.get(), nullptr, o.eps, nullptr, &s));
    json raster = take_json(s);
    const json meta = {{"eps", o.eps}, {"raster_energy", raster}};
    check(ml_field_write(f.get(), o.out.c_str(), meta.dump().c_str()));
    out["raster"] = raster;
    out["raster"]["grid"] = o.grid;
    // Raster energies track the exact ones only once the finest layer spans a few cells.
    const double cells = o.grid * out["report"].value("finest_feature", 0.0);
    out["raster"]["cells_per_feature"] = cells;
    out["raster"]["resolved"] = cells >= 4.0;
    if (cells < 4.0) std::cerr << "warning: grid " << o.grid << " under-resolves the finest layer (" << fmt17(cells) << " cells)\n";
    run.record(o.out);
  }
  // The field file, when present, names the manifest.
  if (!o.regions.empty()) run.record(o.regions);
  run.extra["params"] = params;
  print(out);
}

void add_build_io(CLI::App* cmd, BuildOpts& o) {
  cmd->add_option("--eps", o.eps, "surface weight eps")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--out", o.out, "write the rasterized field (binary payload plus JSON sidecar)");
  cmd->add_option("--grid", o.grid, "raster resolution N_g per axis")->check(CLI::PositiveNumber);
  cmd->add_option("--emit-regions", o.regions, "dump the exact region complex as JSON");
  cmd->add_option("--tol", o.tol, "interface residual tolerance");
}

double field_eps(const ml_field* f, double given, bool set) {
  if (set) return given;
  const json info = field_info(f);
  const json& meta = info.at("meta");
  if (meta.contains("eps")) return meta.at("eps").get<double>();
  throw Failure{kExitValidation, "no --eps given and the field metadata carries none"};
}

int run_cli(std::vector<std::string> args);

int dispatch(Run& run) {
  CLI::App app{std::string("microlam: energies, constructions and scaling laws for A-free inclusions.\n") + kLiteralHelp, "microlam"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ml_version()));

  // build
  auto* build = app.add_subcommand("build", "build a construction")->require_subcommand(1);
  BuildOpts bo;
  int N = 0, dim = 3;
  double theta = 0.3, lambda = 0.5;
  std::string variant = "d_dim", A, B;
  auto* bb = build->add_subcommand("branching", "two-well branching construction");
  bb->add_option("--N", N, "number of top-level periods (default round(eps^{-1/3}))");
  bb->add_option("--theta", theta, "branching ratio in (0, 1/2)");
  bb->add_option("--lambda", lambda, "volume fraction of the B phase");
  bb->add_option("--dim", dim, "dimension (2 or 3)");
  bb->add_option("--variant", variant, "d_dim or upper")->check(CLI::IsMember({"d_dim", "upper"}));
  bb->add_option("--A", A, "first well (literal)");
  bb->add_option("--B", B, "second well (literal)");
  add_build_io(bb, bo);
  bb->callback([&] {
    json p = {{"theta", theta}, {"lambda", lambda}, {"d", dim}, {"variant", variant}, {"eps", bo.eps}};
    if (N > 0) p["N"] = N;
    if (!A.empty()) p["A"] = A;
    if (!B.empty()) p["B"] = B;
    finish_build(run, "branching", p, bo);
  });

  int m = 0;
  double r = 0.0;
  std::string F = "S3";
  auto* bt = build->add_subcommand("t3", "iterated laminate for the three-well set");
  bt->add_option("--m", m, "number of iterations (default: schedule from eps)");
  bt->add_option("--r", r, "base scale r");
  bt->add_option("--F", F, "boundary datum in the hull (literal)");
  add_build_io(bt, bo);
  bt->callback([&] {
    json p = {{"F", F}, {"eps", bo.eps}, {"explicit", !bo.regions.empty()}};
    if (m > 0) p["m"] = m;
    if (r > 0.0) p["r"] = r;
    if (m <= 0 && bo.eps <= 0.0) throw Failure{kExitValidation, "t3 needs --m or --eps"};
    finish_build(run, "t3", p, bo);
  });

  int periods = 1, axis = -1;
  std::string op_spec;
  auto* bl = build->add_subcommand("laminate", "simple laminate between two compatible wells");
  bl->add_option("--A", A, "first well (literal)")->required();
  bl->add_option("--B", B, "second well (literal)")->required();
  bl->add_option("--lambda", lambda, "volume fraction of B");
  bl->add_option("--periods", periods, "number of periods")->check(CLI::PositiveNumber);
  bl->add_option("--axis", axis, "lamination axis (default: from the wave cone)");
  bl->add_option("--op", op_spec, "operator JSON file (default: divergence)");
  add_build_io(bl, bo);
  bl->callback([&] {
    json p = {{"A", A}, {"B", B}, {"lambda", lambda}, {"periods", periods}, {"eps", bo.eps}};
    if (axis >= 0) p["axis"] = axis;
    if (!op_spec.empty()) p["op"] = json::parse(read_text(op_spec));
    finish_build(run, "laminate", p, bo);
  });

  // energy
  auto* energy = app.add_subcommand("energy", "energy evaluation")->require_subcommand(1);
  std::string field_path, op_name;
  double eps = 0.0;
  bool as_json = false;
  auto* ee = energy->add_subcommand("eval", "evaluate the energies of a field file with labels");
  ee->add_option("field", field_path, "field file")->required();
  auto* eps_opt = ee->add_option("--eps", eps, "surface weight (default: from the field metadata)");
  ee->add_option("--F", F, "boundary datum (default: from metadata, else the mean)");
  ee->add_option("--op", op_name, "operator name or JSON file (default: from metadata)");
  ee->add_flag("--json", as_json, "print JSON instead of the table");
  ee->callback([&] {
    FieldPtr f = load_field(field_path);
    const json info = field_info(f.get());
    OperatorPtr op;
    if (!op_name.empty()) {
      const auto shape = info.at("value_shape");
      op = load_operator(op_name, shape[0].get<int>(), info.at("d").get<int>());
    }
    const bool F_set = ee->count("--F") > 0;
    char* s = nullptr;
    check(ml_field_energy(f.get(), op.get(), field_eps(f.get(), eps, eps_opt->count() > 0), F_set ? F.c_str() : nullptr, &s));
    const json e = take_json(s);
    if (as_json) {
      print(e);
    } else {
      print_energy_table(e);
    }
  });

  // ops
  auto* ops = app.add_subcommand("ops", "operator queries")->require_subcommand(1);
  std::string op_arg = "div", mu;
  int rows = 3, samples = 200;
  double tol = 1e-10;
  unsigned long long seed = 1;
  auto add_op = [&](CLI::App* c) {
    c->add_option("--op", op_arg, "div, curl3, curlcurl2 or an operator JSON file");
    c->add_option("--rows", rows, "state rows for div");
    c->add_option("--dim", dim, "spatial dimension");
  };
  auto* wc = ops->add_subcommand("wave-cone", "wave-cone membership of a state");
  add_op(wc);
  wc->add_option("--mu", mu, "state (literal)")->required();
  wc->add_option("--tol", tol, "singular-value tolerance");
  wc->callback([&] {
    OperatorPtr op = load_operator(op_arg, rows, dim);
    char* s = nullptr;
    check(ml_wave_cone(op.get(), mu.c_str(), tol, &s));
    const json j = take_json(s);
    print(j);
    if (!j.at("member").get<bool>()) run.fail_check();
  });
  auto* rk = ops->add_subcommand("rank", "constant-rank check of the symbol");
  add_op(rk);
  rk->add_option("--samples", samples, "sphere samples")->check(CLI::PositiveNumber);
  rk->callback([&] {
    OperatorPtr op = load_operator(op_arg, rows, dim);
    char* s = nullptr;
    check(ml_constant_rank(op.get(), samples, &s));
    const json j = take_json(s);
    print(j);
    if (!j.at("constant").get<bool>()) run.fail_check();
  });
  auto* om = ops->add_subcommand("omega", "first-order reduction map");
  add_op(om);
  om->add_option("--seed", seed, "probe seed");
  om->callback([&] {
    OperatorPtr op = load_operator(op_arg, rows, dim);
    char* s = nullptr;
    check(ml_omega(op.get(), seed, &s));
    print(take_json(s));
    run.extra["seed"] = seed;
  });

  // hull
  auto* hull = app.add_subcommand("hull", "three-well hull queries")->require_subcommand(1);
  int depth = 2;
  auto* hc = hull->add_subcommand("check", "membership in the quasiconvex hull");
  hc->add_option("--F", F, "matrix (literal)")->required();
  hc->callback([&] {
    char* s = nullptr;
    check(ml_hull_check(F.c_str(), &s));
    const json j = take_json(s);
    print(j);
    if (!j.at("inside").get<bool>()) run.fail_check();
  });
  auto* hd = hull->add_subcommand("decompose", "laminate decomposition of a hull point");
  hd->add_option("--F", F, "matrix (literal)")->required();
  hd->add_option("--depth", depth, "splitting-tree depth to expand")->check(CLI::NonNegativeNumber);
  hd->callback([&] {
    char* s = nullptr;
    check(ml_hull_decompose(F.c_str(), depth, &s));
    print(take_json(s));
  });
  auto* hi = hull->add_subcommand("identities", "exact checks of the well identities");
  hi->callback([&] {
    char* s = nullptr;
    check(ml_verify_t3_identities(&s));
    const json j = take_json(s);
    print(j);
    if (!j.at("s_exact").get<bool>() || !j.at("hij_exact").get<bool>()) run.fail_check();
  });

  // rigidity
  auto* rig = app.add_subcommand("rigidity", "exact rigidity on small grids")->require_subcommand(1);
  int grid = 2;
  std::string wells = "t3", mode = "auto";
  auto* rs = rig->add_subcommand("search", "enumerate exactly stress-free grid fields");
  rs->add_option("--grid", grid, "cells per axis")->check(CLI::PositiveNumber);
  rs->add_option("--wells", wells, "t3 or a JSON array of literals");
  rs->add_option("--mode", mode, "auto, enumerate or search")->check(CLI::IsMember({"auto", "enumerate", "search"}));
  rs->callback([&] {
    char* s = nullptr;
    check(ml_rigidity_search(grid, wells.c_str(), mode.c_str(), &s));
    print(take_json(s));
  });

  // sweep
  std::string config, out;
  auto* sw = app.add_subcommand("sweep", "run an eps sweep");
  sw->add_option("--config", config, "sweep configuration JSON")->required()->check(CLI::ExistingFile);
  sw->add_option("--out", out, "CSV output")->required();
  sw->add_flag("--json", as_json, "also print the full table as JSON");
  sw->callback([&] {
    const json cfg = json::parse(read_text(config));
    char *csv = nullptr, *s = nullptr;
    check(ml_sweep(cfg.dump().c_str(), &csv, &s));
    write_text(out, take(csv));
    run.record(out);
    const json t = take_json(s);
    run.extra["config"] = t.at("config");
    bool ok = true;
    for (const auto& row : t.at("rows")) ok = ok && row.value("ok", false);
    if (as_json) print(t);
    std::cout << "rows " << t.at("rows").size() << (ok ? ", all ok" : ", some rows failed") << '\n';
    if (!ok) run.fail_check();
  });

  // fit
  std::string model = "algebraic", csv_path;
  auto* ft = app.add_subcommand("fit", "fit a scaling law to a sweep CSV");
  ft->add_option("--model", model, "algebraic or stretched")->check(CLI::IsMember({"algebraic", "stretched"}));
  ft->add_option("csv", csv_path, "sweep CSV")->required()->check(CLI::ExistingFile);
  ft->callback([&] {
    char* s = nullptr;
    check(ml_fit(read_text(csv_path).c_str(), model.c_str(), &s));
    print(take_json(s));
  });

  int p = 1;
  auto* bal = app.add_subcommand("balance", "exact exponent from the elastic/surface balance");
  bal->add_option("--p", p, "order")->check(CLI::PositiveNumber);
  bal->callback([&] {
    long long num = 0, den = 0;
    check(ml_exponent_balance(p, &num, &den));
    print({{"p", p}, {"exponent", std::to_string(num) + "/" + std::to_string(den)}, {"value", static_cast<double>(num) / den}});
  });

  // diagnose
  auto* dg = app.add_subcommand("diagnose", "Fourier diagnostics on labelled fields")->require_subcommand(1);
  int a = 0, b = 1, kmax = 5;
  double nu = 0.25, growth = 6.0, c_nu = 1.0, safety = 2.0;
  bool smooth = false;
  std::vector<double> mus = {2.0, 4.0, 8.0};
  std::string constants;
  auto F_or_null = [&](CLI::App* c) { return c->count("--F") > 0 ? F.c_str() : nullptr; };

  auto* dcal = dg->add_subcommand("calibrate", "calibrate the frequency-control constants on a reference field");
  dcal->add_option("field", field_path, "reference field")->required();
  dcal->add_option("--a", a, "first phase index");
  dcal->add_option("--b", b, "second phase index");
  dcal->add_option("--mu", mus, "cut-off radii")->expected(1, -1);
  dcal->add_option("--safety", safety, "safety factor");
  dcal->add_option("--out", out, "constants JSON")->required();
  dcal->callback([&] {
    FieldPtr f = load_field(field_path);
    char* s = nullptr;
    check(ml_calibrate_controls(f.get(), a, b, mus.data(), mus.size(), safety, &s));
    const json c = take_json(s);
    write_text(out, to_text(c) + "\n");
    run.record(out);
    run.extra["calibration"] = {{"reference", field_path}, {"constants", c}};
    print(c);
  });

  auto* dlb = dg->add_subcommand("lowerbound", "two-well lower-bound certificate");
  dlb->add_option("field", field_path, "field")->required();
  dlb->add_option("--a", a, "first phase index");
  dlb->add_option("--b", b, "second phase index");
  auto* lb_eps = dlb->add_option("--eps", eps, "surface weight");
  dlb->add_option("--F", F, "boundary datum (default: metadata, else mean)");
  dlb->add_option("--constants", constants, "constants JSON from diagnose calibrate");
  dlb->callback([&] {
    FieldPtr f = load_field(field_path);
    const std::string cj = constants.empty() ? std::string() : read_text(constants);
    char* s = nullptr;
    check(ml_lower_bound(f.get(), a, b, F_or_null(dlb), field_eps(f.get(), eps, lb_eps->count() > 0),
                         constants.empty() ? nullptr : cj.c_str(), &s));
    const json j = take_json(s);
    print(j);
    if (!j.at("respects").get<bool>()) run.fail_check();
  });

  auto* dre = dg->add_subcommand("rigidity-estimate", "log-stretched rigidity estimate");
  dre->add_option("field", field_path, "field")->required();
  auto* re_eps = dre->add_option("--eps", eps, "surface weight");
  dre->add_option("--F", F, "boundary datum (default: metadata, else mean)");
  dre->add_option("--c", c_nu, "constant c_nu");
  dre->add_option("--nu", nu, "exponent offset in (0, 1/2)");
  dre->callback([&] {
    FieldPtr f = load_field(field_path);
    char* s = nullptr;
    check(ml_rigidity_estimate(f.get(), F_or_null(dre), field_eps(f.get(), eps, re_eps->count() > 0), c_nu, nu, &s));
    const json j = take_json(s);
    print(j);
    if (!j.at("pass").get<bool>()) run.fail_check();
  });

  auto* dco = dg->add_subcommand("cones", "cone truncation profile");
  dco->add_option("field", field_path, "field")->required();
  auto* co_eps = dco->add_option("--eps", eps, "surface weight");
  dco->add_option("--F", F, "boundary datum (default: metadata, else mean)");
  dco->add_option("--nu", nu, "exponent offset in (0, 1/2)");
  dco->add_option("--kmax", kmax, "largest truncation index");
  dco->add_option("--growth", growth, "radius growth factor");
  dco->add_flag("--smooth", smooth, "smooth instead of sharp cut-offs");
  dco->callback([&] {
    FieldPtr f = load_field(field_path);
    char* s = nullptr;
    check(ml_cone_profile(f.get(), F_or_null(dco), field_eps(f.get(), eps, co_eps->count() > 0), nu, kmax, growth, smooth ? 1 : 0, &s));
    print(take_json(s));
  });

  // field
  auto* fld = app.add_subcommand("field", "field file utilities")->require_subcommand(1);
  auto* fi = fld->add_subcommand("info", "print the sidecar summary");
  fi->add_option("field", field_path, "field")->required();
  fi->callback([&] { print(field_info(load_field(field_path).get())); });
  auto* fc = fld->add_subcommand("copy", "read and re-write a field file");
  fc->add_option("field", field_path, "input field")->required();
  fc->add_option("--out", out, "output path")->required();
  fc->callback([&] {
    FieldPtr f = load_field(field_path);
    check(ml_field_write(f.get(), out.c_str(), nullptr));
    run.record(out);
  });

  // replay
  std::string manifest;
  auto* rp = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  rp->add_option("manifest", manifest, "manifest JSON")->required()->check(CLI::ExistingFile);
  rp->callback([&] {
    const json mj = json::parse(read_text(manifest));
    const auto recorded = mj.at("args").get<std::vector<std::string>>();
    if (!recorded.empty() && recorded.front() == "replay") throw Failure{kExitValidation, "manifest records a replay"};
    run.status = run_cli(recorded);
  });

  std::vector<std::string> rev(run.args.rbegin(), run.args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }
  return run.status;
}

int run_cli(std::vector<std::string> args) {
  Run run{std::move(args)};
  try {
    const int code = dispatch(run);
    if (code == kExitOk || code == kExitCheck) run.write_manifest();
    return code;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.exit_code;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace

int main(int argc, char** argv) { return run_cli(std::vector<std::string>(argv + 1, argv + argc)); }
