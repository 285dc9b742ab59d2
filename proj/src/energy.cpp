#include "microlam/energy.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <atomic>
#include <cmath>

#include "microlam/errors.hpp"
#include "microlam/parallel.hpp"

namespace microlam {

namespace {

using Spectra = std::vector<Spectrum>;  // one spectrum per flattened state component

Spectra component_spectra(const PhaseField& chi) {
  chi.validate();
  const Grid& g = chi.grid;
  const auto rows = chi.wells[0].rows(), cols = chi.wells[0].cols();
  const std::size_t comps = static_cast<std::size_t>(rows * cols);
  Spectra out(comps, Spectrum(g.cells(), {0.0, 0.0}));
  for (std::size_t w = 0; w < chi.wells.size(); ++w) {
    const Vec val = flatten(chi.wells[w]);
    if (val.norm() == 0.0) continue;
    const auto ind = chi.indicator(static_cast<int>(w));
    const Spectrum s = dft(g, std::span<const double>(ind));
    for (std::size_t c = 0; c < comps; ++c) {
      const double a = val(static_cast<Eigen::Index>(c));
      if (a == 0.0) continue;
      for (std::size_t i = 0; i < s.size(); ++i) out[c][i] += a * s[i];
    }
  }
  return out;
}

Spectra component_spectra(const TensorField& f) {
  f.grid.validate();
  Spectra out;
  for (int r = 0; r < f.rows; ++r)
    for (int c = 0; c < f.cols; ++c) {
      const auto comp = f.component(r, c);
      out.push_back(dft(f.grid, std::span<const double>(comp)));
    }
  return out;
}

Vec unit_frequency(const Grid& g, std::size_t idx, double& norm) {
  const auto k = g.frequency(idx);
  Vec xi(g.d);
  for (int a = 0; a < g.d; ++a) xi(a) = k[static_cast<std::size_t>(a)];
  norm = xi.norm();
  if (norm > 0.0) xi /= norm;
  return xi;
}

double mean_term(const Spectra& s, const Mat& F) {
  const Vec f = flatten(F);
  double t = 0.0;
  for (std::size_t c = 0; c < s.size(); ++c) t += std::norm(s[c][0] - f(static_cast<Eigen::Index>(c)));
  return t;
}

RelaxedEnergy relaxed_from_spectra(const Grid& g, const Spectra& s, int rows, int cols, const Mat& F, const OperatorSpec& op,
                                   bool keep_spectrum) {
  require(op.d() == g.d, ErrorCode::dimension_mismatch,
          "operator acts in dimension " + std::to_string(op.d()) + " but the grid has dimension " + std::to_string(g.d));
  require(rows * cols == op.n(), ErrorCode::dimension_mismatch,
          "state has " + std::to_string(rows * cols) + " components but the operator expects " + std::to_string(op.n()));
  require(F.rows() == rows && F.cols() == cols, ErrorCode::dimension_mismatch, "boundary datum F has the wrong shape");

  RelaxedEnergy out;
  out.mean_term = mean_term(s, F);
  const std::size_t cells = g.cells();
  if (keep_spectrum) out.per_mode.assign(cells, 0.0);
  const bool div = op.is_divergence() && cols == g.d;
  const auto cr = constant_rank_check(op);
  out.generic_rank = cr.max_rank;
  const int generic = cr.max_rank;

  std::atomic<std::size_t> skipped{0};
  const int workers = std::max(1, thread_count());
  std::vector<double> partial(static_cast<std::size_t>(workers) * 64, 0.0);
  std::atomic<int> slot{0};
  parallel_for(cells, [&](std::size_t b, std::size_t e) {
    const int my = slot.fetch_add(1);
    double acc = 0.0;
    std::size_t skip = 0;
    for (std::size_t i = std::max<std::size_t>(b, 1); i < e; ++i) {
      double kn = 0.0;
      const Vec xi = unit_frequency(g, i, kn);
      double mode = 0.0;
      if (div) {
        for (int r = 0; r < rows; ++r) {
          std::complex<double> dot{0.0, 0.0};
          for (int a = 0; a < cols; ++a) dot += s[static_cast<std::size_t>(r * cols + a)][i] * xi(a);
          mode += std::norm(dot);
        }
      } else {
        const Mat sym = symbol_eval(op, xi);
        Eigen::JacobiSVD<Mat> svd(sym, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double smax = sv.size() > 0 ? sv(0) : 0.0;
        int rank = 0;
        for (Eigen::Index l = 0; l < sv.size(); ++l)
          if (sv(l) > 1e-9 * std::max(smax, 1e-300)) ++rank;
        if (rank != generic) {
          ++skip;
          continue;
        }
        const Mat& V = svd.matrixV();
        for (int l = 0; l < rank; ++l) {
          std::complex<double> dot{0.0, 0.0};
          for (int c = 0; c < op.n(); ++c) dot += s[static_cast<std::size_t>(c)][i] * V(c, l);
          mode += std::norm(dot);
        }
      }
      if (keep_spectrum) out.per_mode[i] = mode;
      acc += mode;
    }
    partial[static_cast<std::size_t>(my)] = acc;
    skipped += skip;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  out.skipped_modes = skipped.load();
  out.value = total + out.mean_term;
  if (keep_spectrum) out.per_mode[0] = out.mean_term;
  return out;
}

}  // namespace

RelaxedEnergy elastic_energy_relaxed(const PhaseField& chi, const Mat& F, const OperatorSpec& op, bool keep_spectrum) {
  const auto s = component_spectra(chi);
  return relaxed_from_spectra(chi.grid, s, static_cast<int>(chi.wells[0].rows()), static_cast<int>(chi.wells[0].cols()), F, op,
                              keep_spectrum);
}

RelaxedEnergy elastic_energy_relaxed(const TensorField& f, const Mat& F, const OperatorSpec& op, bool keep_spectrum) {
  const auto s = component_spectra(f);
  return relaxed_from_spectra(f.grid, s, f.rows, f.cols, F, op, keep_spectrum);
}

double elastic_energy_relaxed_diagonal(const PhaseField& chi, const Mat& F) {
  chi.validate();
  const Grid& g = chi.grid;
  for (const auto& w : chi.wells) {
    require(w.rows() == g.d && w.cols() == g.d, ErrorCode::dimension_mismatch, "diagonal formula needs d x d wells");
    require((w - Mat(w.diagonal().asDiagonal())).norm() == 0.0, ErrorCode::invalid_input, "diagonal formula needs diagonal wells");
  }
  const auto s = component_spectra(chi);
  double total = 0.0;
  for (std::size_t i = 1; i < g.cells(); ++i) {
    double kn = 0.0;
    const Vec xi = unit_frequency(g, i, kn);
    for (int a = 0; a < g.d; ++a) total += xi(a) * xi(a) * std::norm(s[static_cast<std::size_t>(a * g.d + a)][i]);
  }
  return total + mean_term(s, F);
}

double elastic_energy_pair(const TensorField& u, const PhaseField& chi) {
  require(u.grid == chi.grid, ErrorCode::dimension_mismatch, "field and phase grids differ");
  chi.validate();
  require(chi.wells[0].rows() == u.rows && chi.wells[0].cols() == u.cols, ErrorCode::dimension_mismatch,
          "field and well shapes differ");
  double total = 0.0;
  for (std::size_t i = 0; i < u.grid.cells(); ++i) total += (u.at(i) - chi.value(i)).squaredNorm();
  return total * u.grid.cell_volume();
}

double surface_energy(const PhaseField& chi) {
  chi.validate();
  const Grid& g = chi.grid;
  const std::size_t nw = chi.wells.size();
  std::vector<double> jump(nw * nw, 0.0);
  for (std::size_t p = 0; p < nw; ++p)
    for (std::size_t q = 0; q < nw; ++q) jump[p * nw + q] = (chi.wells[p] - chi.wells[q]).norm();
  const double face = std::pow(1.0 / g.n, g.d - 1);
  double total = 0.0;
  for (std::size_t i = 0; i < g.cells(); ++i)
    for (int a = 0; a < g.d; ++a) {
      const std::size_t j = g.neighbor(i, a);
      total += jump[static_cast<std::size_t>(chi.labels[i]) * nw + static_cast<std::size_t>(chi.labels[j])];
    }
  return total * face;
}

double surface_energy(const Grid& g, std::span<const double> f) {
  require(f.size() == g.cells(), ErrorCode::dimension_mismatch, "field size does not match the grid");
  const double face = std::pow(1.0 / g.n, g.d - 1);
  double total = 0.0;
  for (std::size_t i = 0; i < g.cells(); ++i)
    for (int a = 0; a < g.d; ++a) total += std::abs(f[g.neighbor(i, a)] - f[i]);
  return total * face;
}

nlohmann::json EnergyReport::to_json() const {
  return {{"eps", eps},         {"E_el_pair", pair}, {"E_el_relaxed", relaxed}, {"E_surf", surface},
          {"E_total", total},   {"skipped_modes", skipped_modes}};
}

EnergyReport evaluate_energy(const TensorField& u, const PhaseField& chi, const OperatorSpec& op, double eps,
                             const std::optional<Mat>& F) {
  require(eps >= 0.0, ErrorCode::invalid_input, "eps must be nonnegative");
  EnergyReport r;
  r.eps = eps;
  r.pair = elastic_energy_pair(u, chi);
  const auto rel = elastic_energy_relaxed(chi, F ? *F : mean(u), op);
  r.relaxed = rel.value;
  r.skipped_modes = rel.skipped_modes;
  r.surface = surface_energy(chi);
  r.total = r.pair + eps * r.surface;
  return r;
}

double multiplier_energy(const Grid& g, std::span<const double> f, const Mat& M) {
  require(M.cols() == g.d, ErrorCode::dimension_mismatch, "multiplier must have d columns");
  const Spectrum s = dft(g, f);
  double total = std::norm(s[0]);
  for (std::size_t i = 1; i < s.size(); ++i) {
    double kn = 0.0;
    const Vec xi = unit_frequency(g, i, kn);
    total += (M * xi).squaredNorm() * std::norm(s[i]);
  }
  return total;
}

ControlCheck low_freq_control_check(const Grid& g, std::span<const double> f, const Mat& M, double mu, double C) {
  require(mu > 1.0, ErrorCode::invalid_input, "low-frequency check needs mu > 1");
  require(M.cols() == g.d, ErrorCode::dimension_mismatch, "multiplier must have d columns");
  const Mat ker = null_space(M);
  const Spectrum s = dft(g, f);
  ControlCheck c;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto k = g.frequency(i);
    Vec kv(g.d);
    for (int a = 0; a < g.d; ++a) kv(a) = k[static_cast<std::size_t>(a)];
    const double proj = ker.cols() > 0 ? (ker.transpose() * kv).norm() : 0.0;
    if (proj <= mu) c.lhs += std::norm(s[i]);
  }
  c.rhs = C * mu * mu * multiplier_energy(g, f, M);
  c.pass = c.lhs <= c.rhs;
  return c;
}

ControlCheck high_freq_control_check(const Grid& g, std::span<const double> f, double mu, double C) {
  require(mu > 0.0, ErrorCode::invalid_input, "high-frequency check needs mu > 0");
  const Spectrum s = dft(g, f);
  ControlCheck c;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto k = g.frequency(i);
    double kk = 0.0;
    for (int a = 0; a < g.d; ++a) kk += static_cast<double>(k[static_cast<std::size_t>(a)]) * k[static_cast<std::size_t>(a)];
    if (std::sqrt(kk) >= mu) c.lhs += std::norm(s[i]);
  }
  c.rhs = C / mu * (surface_energy(g, f) + 2.0 * g.d);
  c.pass = c.lhs <= c.rhs;
  return c;
}

double calibrate_low_freq(const Grid& g, std::span<const double> f, const Mat& M, std::span<const double> mus, double safety) {
  double worst = 0.0;
  for (double mu : mus) worst = std::max(worst, low_freq_control_check(g, f, M, mu, 1.0).ratio());
  require(std::isfinite(worst) && worst > 0.0, ErrorCode::degenerate_parameters, "reference field does not calibrate the constant");
  return safety * worst;
}

double calibrate_high_freq(const Grid& g, std::span<const double> f, std::span<const double> mus, double safety) {
  double worst = 0.0;
  for (double mu : mus) worst = std::max(worst, high_freq_control_check(g, f, mu, 1.0).ratio());
  require(std::isfinite(worst) && worst > 0.0, ErrorCode::degenerate_parameters, "reference field does not calibrate the constant");
  return safety * worst;
}

std::vector<double> two_phase_scalar(const PhaseField& chi, int a, int b) {
  chi.validate();
  std::size_t na = 0;
  for (int l : chi.labels) na += (l == a);
  const double lambda = static_cast<double>(na) / static_cast<double>(chi.labels.size());
  std::vector<double> f(chi.labels.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (chi.labels[i] == a) f[i] = 1.0 - lambda;
    else if (chi.labels[i] == b) f[i] = -lambda;
  }
  return f;
}

}  // namespace microlam
