#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "microlam/microlam.h"

using nlohmann::json;

namespace {

// Takes ownership of a string returned by the library.
json take(char* s) {
  REQUIRE(s != nullptr);
  json j = json::parse(s);
  ml_string_free(s);
  return j;
}

struct Deleter {
  void operator()(ml_construction* c) const { ml_construction_free(c); }
  void operator()(ml_field* f) const { ml_field_free(f); }
  void operator()(ml_operator* o) const { ml_operator_free(o); }
};

}  // namespace

TEST_CASE("C API: status codes and last error") {
  char* out = nullptr;
  CHECK(ml_hull_check("2*Id", &out) == ML_OK);
  CHECK_FALSE(take(out).at("inside").get<bool>());
  CHECK(ml_hull_decompose("2*Id", 2, &out) == ML_ERR_MEMBERSHIP);
  CHECK(std::string(ml_last_error()).size() > 0);
  CHECK(ml_hull_decompose("A1", 2, &out) == ML_ERR_TRIVIAL_INPUT);
  CHECK(ml_parse_matrix("diag(1,", &out) == ML_ERR_INVALID_INPUT);
  CHECK(ml_build("foam", "{}", nullptr) == ML_ERR_INVALID_INPUT);
  ml_construction* c = nullptr;
  CHECK(ml_build("laminate", R"({"A":"A1","B":"A2"})", &c) == ML_ERR_COMPATIBILITY);
  CHECK(c == nullptr);
  CHECK(ml_build("laminate", "{not json", &c) == ML_ERR_INVALID_INPUT);
  CHECK(ml_fit("", "algebraic", &out) == ML_ERR_FIT);
  CHECK(std::string(ml_status_name(ML_ERR_TILING)) == "tiling");
  long long num = 0, den = 0;
  CHECK(ml_exponent_balance(2, &num, &den) == ML_OK);
  CHECK(num == 4);
  CHECK(den == 5);
}

TEST_CASE("C API: operators and symbols") {
  ml_operator* raw = nullptr;
  REQUIRE(ml_operator_builtin("div", 3, 3, &raw) == ML_OK);
  std::unique_ptr<ml_operator, Deleter> op(raw);
  const double xi[3] = {0.0, 1.0, 0.0};
  double sym[27] = {};
  REQUIRE(ml_symbol_eval(op.get(), xi, 3, sym, 27) == ML_OK);
  double small[2] = {};
  CHECK(ml_symbol_eval(op.get(), xi, 3, small, 2) == ML_ERR_DIMENSION_MISMATCH);
  char* out = nullptr;
  REQUIRE(ml_wave_cone(op.get(), "S1", 1e-12, &out) == ML_OK);
  CHECK(take(out).at("member").get<bool>());
  REQUIRE(ml_operator_to_json(op.get(), &out) == ML_OK);
  const std::string text = take(out).dump();
  ml_operator* back = nullptr;
  REQUIRE(ml_operator_from_json(text.c_str(), &back) == ML_OK);
  ml_operator_free(back);
}

TEST_CASE("C API: build, rasterize, write, read, energy") {
  ml_construction* raw = nullptr;
  REQUIRE(ml_build("branching", R"({"N":6,"eps":0.001})", &raw) == ML_OK);
  std::unique_ptr<ml_construction, Deleter> c(raw);
  char* out = nullptr;
  REQUIRE(ml_construction_interface_check(c.get(), nullptr, 0.0, &out) == ML_OK);
  CHECK(take(out).at("pass").get<bool>());
  ml_field* fraw = nullptr;
  REQUIRE(ml_construction_rasterize(c.get(), 32, &fraw) == ML_OK);
  std::unique_ptr<ml_field, Deleter> f(fraw);
  REQUIRE(ml_field_energy(f.get(), nullptr, 1e-3, nullptr, &out) == ML_OK);
  const json e1 = take(out);

  const auto path = std::filesystem::temp_directory_path() / "microlam_capi_roundtrip.mlf";
  REQUIRE(ml_field_write(f.get(), path.c_str(), R"({"note":"capi"})") == ML_OK);
  ml_field* graw = nullptr;
  REQUIRE(ml_field_read(path.c_str(), &graw) == ML_OK);
  std::unique_ptr<ml_field, Deleter> g(graw);
  REQUIRE(ml_field_energy(g.get(), nullptr, 1e-3, nullptr, &out) == ML_OK);
  const json e2 = take(out);
  for (const char* k : {"E_el_pair", "E_el_relaxed", "E_surf", "E_total"}) CHECK(e1.at(k).get<double>() == e2.at(k).get<double>());
  REQUIRE(ml_field_info(g.get(), &out) == ML_OK);
  CHECK(take(out).dump().find("capi") != std::string::npos);
  std::filesystem::remove(path);

  ml_field* missing = nullptr;
  CHECK(ml_field_read("/nonexistent/field.mlf", &missing) == ML_ERR_IO);
}

TEST_CASE("C API: T3 and rigidity") {
  ml_construction* raw = nullptr;
  REQUIRE(ml_build("t3", R"({"m":1,"r":[0.25],"explicit":true})", &raw) == ML_OK);
  std::unique_ptr<ml_construction, Deleter> c(raw);
  char* out = nullptr;
  REQUIRE(ml_construction_interface_check(c.get(), nullptr, 0.0, &out) == ML_OK);
  CHECK(take(out).at("pass").get<bool>());
  REQUIRE(ml_rigidity_search(2, "t3", "search", &out) == ML_OK);
  CHECK(take(out).at("count").get<int>() == 3);
  REQUIRE(ml_verify_t3_identities(&out) == ML_OK);
  const json id = take(out);
  CHECK(id.at("s_exact").get<bool>());
  CHECK(id.at("hij_exact").get<bool>());
}
