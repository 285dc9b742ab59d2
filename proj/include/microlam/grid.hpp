#pragma once

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "microlam/complex.hpp"
#include "microlam/linalg.hpp"

namespace microlam {

// Periodic grid on [0,1)^d with n cells per axis; cell index (i0 * n + i1) * n + i2, axis 0 slowest.
struct Grid {
  int d = 3;
  int n = 4;

  void validate() const;
  std::size_t cells() const;
  double cell_volume() const;
  std::array<int, 3> coords(std::size_t idx) const;
  std::size_t index(const std::array<int, 3>& c) const;
  Vec3 center(std::size_t idx) const;  // x3 = 1/2 when d = 2
  // Signed integer frequency of a DFT index (Nyquist maps to -n/2).
  std::array<int, 3> frequency(std::size_t idx) const;
  std::size_t neighbor(std::size_t idx, int axis) const;  // +1 along axis, periodic
  friend bool operator==(const Grid&, const Grid&) = default;
};

struct TensorField {
  Grid grid;
  int rows = 1, cols = 1;
  std::vector<double> data;  // cell-major, component fastest

  TensorField() = default;
  TensorField(const Grid& g, int r, int c) : grid(g), rows(r), cols(c), data(g.cells() * static_cast<std::size_t>(r * c), 0.0) {}
  Mat at(std::size_t idx) const;
  void set(std::size_t idx, const Mat& v);
  std::vector<double> component(int r, int c) const;
};

struct PhaseField {
  Grid grid;
  std::vector<Mat> wells;
  std::vector<int> labels;

  void validate() const;
  const Mat& value(std::size_t idx) const { return wells[static_cast<std::size_t>(labels[idx])]; }
  TensorField to_tensor() const;
  std::vector<double> indicator(int well) const;
  std::vector<double> component(int r, int c) const;
};

using Spectrum = std::vector<std::complex<double>>;

// Forward transform normalized by 1/n^d, so coefficient 0 is the mean and sum |f^|^2 = mean |f|^2.
Spectrum dft(const Grid& g, std::span<const double> f);
Spectrum dft(const Grid& g, std::span<const std::complex<double>> f);
std::vector<std::complex<double>> idft(const Grid& g, const Spectrum& s);
std::vector<double> idft_real(const Grid& g, const Spectrum& s);

double l2_norm_sq(const Grid& g, std::span<const double> f);  // cell-volume weighted
double mean(const Grid& g, std::span<const double> f);
Mat mean(const TensorField& u);

struct ConeSpec {
  int axis = 0;        // 0-based
  double aperture = 1;  // |k_axis| <= aperture |k|
  double radius = 1;    // |k| <= radius
  void validate() const;
};

double cone_weight(const std::array<int, 3>& k, int d, const ConeSpec& cone, bool smooth);
std::vector<double> cone_multiplier(const Grid& g, std::span<const double> f, const ConeSpec& cone, bool smooth);

struct Raster {
  Grid grid;
  std::vector<int> region;  // region index per cell
  TensorField u;
  PhaseField chi;
};

// Cell-center sampling; ties go to the smallest region index. Uncovered centers raise a tiling error.
Raster rasterize(const RegionComplex& rc, int n);

// Field files: <path> holds little-endian f64 payload, <path>.json the sidecar.
void write_field(const std::string& path, const TensorField& u, const PhaseField* chi, const nlohmann::json& meta);

struct FieldFile {
  TensorField u;
  std::optional<PhaseField> chi;
  nlohmann::json meta;
};

FieldFile read_field(const std::string& path);

}  // namespace microlam
