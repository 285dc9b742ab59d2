#include "microlam/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>

#include "microlam/errors.hpp"

namespace microlam {

void Grid::validate() const {
  require(d == 2 || d == 3, ErrorCode::invalid_input, "grid dimension must be 2 or 3");
  require(n >= 4 && n % 2 == 0, ErrorCode::invalid_input, "grid size must be even and at least 4");
}

std::size_t Grid::cells() const {
  std::size_t c = 1;
  for (int a = 0; a < d; ++a) c *= static_cast<std::size_t>(n);
  return c;
}

double Grid::cell_volume() const { return 1.0 / static_cast<double>(cells()); }

std::array<int, 3> Grid::coords(std::size_t idx) const {
  std::array<int, 3> c{0, 0, 0};
  for (int a = d - 1; a >= 0; --a) {
    c[static_cast<std::size_t>(a)] = static_cast<int>(idx % static_cast<std::size_t>(n));
    idx /= static_cast<std::size_t>(n);
  }
  return c;
}

std::size_t Grid::index(const std::array<int, 3>& c) const {
  std::size_t idx = 0;
  for (int a = 0; a < d; ++a) idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(c[static_cast<std::size_t>(a)]);
  return idx;
}

Vec3 Grid::center(std::size_t idx) const {
  const auto c = coords(idx);
  Vec3 x(0.5, 0.5, 0.5);
  for (int a = 0; a < d; ++a) x(a) = (c[static_cast<std::size_t>(a)] + 0.5) / n;
  return x;
}

std::array<int, 3> Grid::frequency(std::size_t idx) const {
  auto c = coords(idx);
  for (int a = 0; a < d; ++a) {
    int& k = c[static_cast<std::size_t>(a)];
    if (k >= n / 2) k -= n;
  }
  return c;
}

std::size_t Grid::neighbor(std::size_t idx, int axis) const {
  auto c = coords(idx);
  c[static_cast<std::size_t>(axis)] = (c[static_cast<std::size_t>(axis)] + 1) % n;
  return index(c);
}

Mat TensorField::at(std::size_t idx) const {
  Mat m(rows, cols);
  const double* p = data.data() + idx * static_cast<std::size_t>(rows * cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = p[i * cols + j];
  return m;
}

void TensorField::set(std::size_t idx, const Mat& v) {
  require(v.rows() == rows && v.cols() == cols, ErrorCode::dimension_mismatch, "tensor value shape mismatch");
  double* p = data.data() + idx * static_cast<std::size_t>(rows * cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) p[i * cols + j] = v(i, j);
}

std::vector<double> TensorField::component(int r, int c) const {
  std::vector<double> out(grid.cells());
  const std::size_t stride = static_cast<std::size_t>(rows * cols);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = data[i * stride + static_cast<std::size_t>(r * cols + c)];
  return out;
}

void PhaseField::validate() const {
  grid.validate();
  require(!wells.empty(), ErrorCode::invalid_input, "phase field without wells");
  require(labels.size() == grid.cells(), ErrorCode::dimension_mismatch, "label count does not match the grid");
  for (std::size_t i = 0; i < labels.size(); ++i)
    require(labels[i] >= 0 && labels[i] < static_cast<int>(wells.size()), ErrorCode::invalid_input,
            "label " + std::to_string(labels[i]) + " at cell " + std::to_string(i) + " is not a well index");
  for (const auto& w : wells)
    require(w.rows() == wells[0].rows() && w.cols() == wells[0].cols(), ErrorCode::dimension_mismatch, "wells differ in shape");
}

TensorField PhaseField::to_tensor() const {
  TensorField t(grid, static_cast<int>(wells[0].rows()), static_cast<int>(wells[0].cols()));
  for (std::size_t i = 0; i < labels.size(); ++i) t.set(i, value(i));
  return t;
}

std::vector<double> PhaseField::indicator(int well) const {
  std::vector<double> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] == well ? 1.0 : 0.0;
  return out;
}

std::vector<double> PhaseField::component(int r, int c) const {
  std::vector<double> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = value(i)(r, c);
  return out;
}

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void transform(const Grid& g, std::complex<double>* buf, int sign) {
  int dims[3] = {g.n, g.n, g.n};
  auto* p = reinterpret_cast<fftw_complex*>(buf);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft(g.d, dims, p, p, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

Spectrum dft(const Grid& g, std::span<const std::complex<double>> f) {
  g.validate();
  require(f.size() == g.cells(), ErrorCode::dimension_mismatch, "field size does not match the grid");
  Spectrum s(f.begin(), f.end());
  transform(g, s.data(), FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(g.cells());
  for (auto& x : s) x *= scale;
  return s;
}

Spectrum dft(const Grid& g, std::span<const double> f) {
  std::vector<std::complex<double>> c(f.begin(), f.end());
  return dft(g, std::span<const std::complex<double>>(c));
}

std::vector<std::complex<double>> idft(const Grid& g, const Spectrum& s) {
  g.validate();
  require(s.size() == g.cells(), ErrorCode::dimension_mismatch, "spectrum size does not match the grid");
  std::vector<std::complex<double>> f = s;
  transform(g, f.data(), FFTW_BACKWARD);
  return f;
}

std::vector<double> idft_real(const Grid& g, const Spectrum& s) {
  const auto c = idft(g, s);
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

double l2_norm_sq(const Grid& g, std::span<const double> f) {
  double s = 0.0;
  for (double x : f) s += x * x;
  return s * g.cell_volume();
}

double mean(const Grid& g, std::span<const double> f) {
  double s = 0.0;
  for (double x : f) s += x;
  return s / static_cast<double>(g.cells());
}

Mat mean(const TensorField& u) {
  Mat m = Mat::Zero(u.rows, u.cols);
  for (std::size_t i = 0; i < u.grid.cells(); ++i) m += u.at(i);
  return m / static_cast<double>(u.grid.cells());
}

void ConeSpec::validate() const {
  require(axis >= 0 && axis < 3, ErrorCode::invalid_input, "cone axis out of range");
  require(aperture > 0.0 && aperture <= 1.0, ErrorCode::invalid_input, "cone aperture must lie in (0, 1]");
  require(radius > 0.0, ErrorCode::invalid_input, "cone radius must be positive");
}

namespace {

// 1 on [0,1], 0 on [2, inf), quintic smoothstep in between.
double smooth_step_down(double t) {
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  const double x = t - 1.0;
  return 1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
}

}  // namespace

double cone_weight(const std::array<int, 3>& k, int d, const ConeSpec& cone, bool smooth) {
  double kk = 0.0;
  for (int a = 0; a < d; ++a) kk += static_cast<double>(k[static_cast<std::size_t>(a)]) * k[static_cast<std::size_t>(a)];
  const double kn = std::sqrt(kk);
  const double kj = std::abs(static_cast<double>(k[static_cast<std::size_t>(cone.axis)]));
  if (!smooth) return (kn <= cone.radius && kj <= cone.aperture * kn) ? 1.0 : 0.0;
  const double radial = smooth_step_down(kn / cone.radius);
  const double angular = kn == 0.0 ? 1.0 : smooth_step_down(kj / (cone.aperture * kn));
  return radial * angular;
}

std::vector<double> cone_multiplier(const Grid& g, std::span<const double> f, const ConeSpec& cone, bool smooth) {
  cone.validate();
  require(cone.axis < g.d, ErrorCode::invalid_input, "cone axis exceeds the grid dimension");
  Spectrum s = dft(g, f);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= cone_weight(g.frequency(i), g.d, cone, smooth);
  return idft_real(g, s);
}

Raster rasterize(const RegionComplex& rc, int n) {
  Grid g{rc.d, n};
  g.validate();
  require((rc.lo - Vec3::Zero()).norm() < 1e-15 && (rc.hi - Vec3::Ones()).norm() < 1e-15, ErrorCode::invalid_input,
          "rasterization needs the unit-cube domain");
  require(rc.geom.size() == rc.regions.size(), ErrorCode::invalid_input, "region complex not finalized");
  Raster r;
  r.grid = g;
  r.region.assign(g.cells(), -1);
  const double h = 1.0 / n;
  for (std::size_t ri = 0; ri < rc.regions.size(); ++ri) {
    const auto& geo = rc.geom[ri];
    std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < rc.d; ++a) {
      lo[static_cast<std::size_t>(a)] = std::max(0, static_cast<int>(std::ceil(geo.lo(a) / h - 0.5 - 1e-9)));
      hi[static_cast<std::size_t>(a)] = std::min(n - 1, static_cast<int>(std::floor(geo.hi(a) / h - 0.5 + 1e-9)));
    }
    const auto& shape = rc.regions[ri].shape;
    std::array<int, 3> c{0, 0, 0};
    for (c[0] = lo[0]; c[0] <= hi[0]; ++c[0])
      for (c[1] = lo[1]; c[1] <= hi[1]; ++c[1])
        for (c[2] = lo[2]; c[2] <= hi[2]; ++c[2]) {
          const std::size_t idx = g.index(c);
          if (r.region[idx] >= 0) continue;
          if (shape.contains(g.center(idx), 1e-12)) r.region[idx] = static_cast<int>(ri);
        }
  }
  const Mat& w0 = rc.wells[0];
  r.u = TensorField(g, static_cast<int>(w0.rows()), static_cast<int>(w0.cols()));
  r.chi.grid = g;
  r.chi.wells = rc.wells;
  r.chi.labels.resize(g.cells());
  for (std::size_t i = 0; i < g.cells(); ++i) {
    const int reg = r.region[i];
    if (reg < 0) {
      const Vec3 x = g.center(i);
      throw Error(ErrorCode::tiling, "cell center (" + fmt17(x(0)) + ", " + fmt17(x(1)) + ", " + fmt17(x(2)) +
                                         ") is not covered by any region");
    }
    r.u.set(i, rc.regions[static_cast<std::size_t>(reg)].u.at(g.center(i)));
    r.chi.labels[i] = rc.regions[static_cast<std::size_t>(reg)].chi;
  }
  return r;
}

namespace {

nlohmann::json mat_to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Mat mat_from_json(const nlohmann::json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  require(!rows.empty(), ErrorCode::io, "empty matrix in sidecar");
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == rows[0].size(), ErrorCode::io, "ragged matrix in sidecar");
    for (std::size_t k = 0; k < rows[i].size(); ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return m;
}

void to_little_endian(std::vector<double>& v) {
  if constexpr (std::endian::native == std::endian::big)
    for (auto& x : v) {
      auto bits = std::bit_cast<std::uint64_t>(x);
      bits = __builtin_bswap64(bits);
      x = std::bit_cast<double>(bits);
    }
}

}  // namespace

void write_field(const std::string& path, const TensorField& u, const PhaseField* chi, const nlohmann::json& meta) {
  u.grid.validate();
  const int comps = u.rows * u.cols + (chi ? 1 : 0);
  if (chi) require(chi->grid == u.grid, ErrorCode::dimension_mismatch, "phase and tensor grids differ");
  std::vector<double> payload;
  payload.reserve(u.grid.cells() * static_cast<std::size_t>(comps));
  const std::size_t stride = static_cast<std::size_t>(u.rows * u.cols);
  for (std::size_t i = 0; i < u.grid.cells(); ++i) {
    for (std::size_t c = 0; c < stride; ++c) payload.push_back(u.data[i * stride + c]);
    if (chi) payload.push_back(static_cast<double>(chi->labels[i]));
  }
  to_little_endian(payload);
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::io, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(double)));
  require(static_cast<bool>(out), ErrorCode::io, "write failed for '" + path + "'");

  nlohmann::json side;
  side["format"] = "microlam-field";
  side["version"] = 1;
  side["d"] = u.grid.d;
  side["N_g"] = u.grid.n;
  side["value_shape"] = {u.rows, u.cols};
  side["components"] = comps;
  if (chi) {
    side["label_component"] = u.rows * u.cols;
    side["wells"] = nlohmann::json::array();
    for (const auto& w : chi->wells) side["wells"].push_back(mat_to_json(w));
  }
  side["meta"] = meta;
  std::ofstream js(path + ".json");
  require(static_cast<bool>(js), ErrorCode::io, "cannot open sidecar for '" + path + "'");
  js << side.dump(2) << "\n";
}

FieldFile read_field(const std::string& path) {
  std::ifstream js(path + ".json");
  require(static_cast<bool>(js), ErrorCode::io, "missing sidecar '" + path + ".json'");
  nlohmann::json side;
  try {
    js >> side;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, std::string("bad sidecar: ") + e.what());
  }
  FieldFile ff;
  try {
    Grid g{side.at("d").get<int>(), side.at("N_g").get<int>()};
    g.validate();
    const auto shape = side.at("value_shape").get<std::vector<int>>();
    require(shape.size() == 2, ErrorCode::io, "value_shape must have two entries");
    const int comps = side.at("components").get<int>();
    const bool has_chi = side.contains("wells");
    require(comps == shape[0] * shape[1] + (has_chi ? 1 : 0), ErrorCode::io, "component count inconsistent with value_shape");
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::io, "cannot open '" + path + "'");
    std::vector<double> payload(g.cells() * static_cast<std::size_t>(comps));
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(double)));
    require(in.gcount() == static_cast<std::streamsize>(payload.size() * sizeof(double)), ErrorCode::io, "payload too short");
    to_little_endian(payload);
    ff.u = TensorField(g, shape[0], shape[1]);
    const std::size_t stride = static_cast<std::size_t>(shape[0] * shape[1]);
    if (has_chi) {
      PhaseField chi;
      chi.grid = g;
      for (const auto& w : side.at("wells")) chi.wells.push_back(mat_from_json(w));
      chi.labels.resize(g.cells());
      ff.chi = std::move(chi);
    }
    for (std::size_t i = 0; i < g.cells(); ++i) {
      for (std::size_t c = 0; c < stride; ++c) ff.u.data[i * stride + c] = payload[i * static_cast<std::size_t>(comps) + c];
      if (has_chi) ff.chi->labels[i] = static_cast<int>(payload[i * static_cast<std::size_t>(comps) + stride]);
    }
    if (ff.chi) ff.chi->validate();
    ff.meta = side.value("meta", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, std::string("bad sidecar: ") + e.what());
  }
  return ff;
}

}  // namespace microlam
