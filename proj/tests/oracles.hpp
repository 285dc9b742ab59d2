// Independent reference computations used by the unit and acceptance tests.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "microlam/energy.hpp"
#include "microlam/grid.hpp"
#include "microlam/symbol.hpp"

namespace oracle {

using microlam::Grid;
using microlam::Mat;
using microlam::PhaseField;
using microlam::Vec;

// Direct O(n^2d) unitary DFT with the same sign and normalization as the library.
inline std::vector<std::complex<double>> naive_dft(const Grid& g, const std::vector<double>& f) {
  const std::size_t n = g.cells();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto kc = g.coords(k);
    std::complex<double> s = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      const auto xc = g.coords(x);
      double phase = 0.0;
      for (int a = 0; a < g.d; ++a) phase += static_cast<double>(kc[static_cast<std::size_t>(a)]) * xc[static_cast<std::size_t>(a)];
      s += f[x] * std::polar(1.0, -2.0 * std::numbers::pi * phase / g.n);
    }
    out[k] = s / static_cast<double>(n);
  }
  return out;
}

// Relaxed divergence energy from the naive DFT: sum_{k != 0} |chi^(k) k/|k||^2 + |chi^(0) - F|^2.
inline double relaxed_divergence(const PhaseField& chi, const Mat& F) {
  const Grid& g = chi.grid;
  const int rows = static_cast<int>(chi.wells.front().rows());
  const int cols = static_cast<int>(chi.wells.front().cols());
  std::vector<std::vector<std::complex<double>>> hat(static_cast<std::size_t>(rows * cols));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) hat[static_cast<std::size_t>(r * cols + c)] = naive_dft(g, chi.component(r, c));
  double e = 0.0;
  for (std::size_t k = 0; k < g.cells(); ++k) {
    const auto kf = g.frequency(k);
    double kk = 0.0;
    for (int a = 0; a < g.d; ++a) kk += static_cast<double>(kf[static_cast<std::size_t>(a)]) * kf[static_cast<std::size_t>(a)];
    for (int r = 0; r < rows; ++r) {
      if (kk == 0.0) {
        for (int c = 0; c < cols; ++c) e += std::norm(hat[static_cast<std::size_t>(r * cols + c)][k] - F(r, c));
        continue;
      }
      std::complex<double> s = 0.0;
      for (int c = 0; c < cols && c < g.d; ++c) s += hat[static_cast<std::size_t>(r * cols + c)][k] * static_cast<double>(kf[static_cast<std::size_t>(c)]);
      e += std::norm(s) / kk;
    }
  }
  return e;
}

// Random labels on a grid.
inline PhaseField random_phase(const Grid& g, std::vector<Mat> wells, std::mt19937_64& rng, double p_first = 0.5) {
  PhaseField chi;
  chi.grid = g;
  chi.labels.resize(g.cells());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick(1, static_cast<int>(wells.size()) - 1);
  for (auto& l : chi.labels) l = u(rng) < p_first ? 0 : pick(rng);
  chi.wells = std::move(wells);
  return chi;
}

// Laminate of two wells along axis with the given number of periods and fraction of the first well.
inline PhaseField laminate_phase(const Grid& g, const Mat& A, const Mat& B, int axis, int periods, double frac_A) {
  PhaseField chi;
  chi.grid = g;
  chi.wells = {A, B};
  chi.labels.resize(g.cells());
  for (std::size_t i = 0; i < g.cells(); ++i) {
    const double x = g.center(i)(axis) * periods;
    chi.labels[i] = (x - std::floor(x)) < frac_A ? 0 : 1;
  }
  return chi;
}

inline Mat diag3(double a, double b, double c) {
  Mat m = Mat::Zero(3, 3);
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return m;
}

}  // namespace oracle
