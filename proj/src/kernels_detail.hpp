#pragma once

// Per-element bodies shared by the serial and parallel kernel builds.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "veplab/kernels.hpp"

namespace veplab::kernels::detail {

inline double gram_entry(std::span<const double> s, int lag_a, int lag_b) {
  const long n = static_cast<long>(s.size());
  const long lo = std::max({0L, static_cast<long>(lag_a), static_cast<long>(lag_b)});
  const long hi = std::min({n, n + lag_a, n + lag_b});
  double acc = 0.0;
  for (long t = lo; t < hi; ++t) acc += s[t - lag_a] * s[t - lag_b];
  return acc;
}

inline double cross_entry(std::span<const double> s, std::span<const double> r, int lag) {
  const long n = static_cast<long>(s.size());
  const long lo = std::max(0L, static_cast<long>(lag));
  const long hi = std::min(n, n + lag);
  double acc = 0.0;
  for (long t = lo; t < hi; ++t) acc += s[t - lag] * r[t];
  return acc;
}

inline double filter_sample(std::span<const double> s, std::span<const double> coeffs, int lag_min,
                            long t) {
  const long n = static_cast<long>(s.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    const long idx = t - lag_min - static_cast<long>(j);
    if (idx >= 0 && idx < n) acc += coeffs[j] * s[idx];
  }
  return acc;
}

inline double scatter_entry(const std::vector<RowMatrix>& blocks, Eigen::Index a, Eigen::Index b) {
  double acc = 0.0;
  for (const auto& block : blocks) {
    const double* ra = block.row(a).data();
    const double* rb = block.row(b).data();
    double partial = 0.0;
    for (Eigen::Index t = 0; t < block.cols(); ++t) partial += ra[t] * rb[t];
    acc += partial;
  }
  return acc;
}

// Mean-removed copy of each row over the first `window` samples plus its L2 norm
// (0 for flat rows).
struct CenteredRows {
  RowMatrix values;
  std::vector<double> norms;
};

inline CenteredRows center_rows(const RowMatrix& m, Eigen::Index window) {
  CenteredRows out;
  out.values.resize(m.rows(), window);
  out.norms.assign(static_cast<std::size_t>(m.rows()), 0.0);
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    const std::span<const double> row(m.row(k).data(), static_cast<std::size_t>(window));
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(window);
    double ss = 0.0;
    for (Eigen::Index t = 0; t < window; ++t) {
      const double c = row[static_cast<std::size_t>(t)] - mean;
      out.values(k, t) = c;
      ss += c * c;
    }
    out.norms[static_cast<std::size_t>(k)] = is_flat(row) ? 0.0 : std::sqrt(ss);
  }
  return out;
}

inline double score_pair(const CenteredRows& trial, const CenteredRows& tmpl) {
  double score = 0.0;
  for (Eigen::Index k = 0; k < trial.values.rows(); ++k) {
    const double nx = trial.norms[static_cast<std::size_t>(k)];
    const double ny = tmpl.norms[static_cast<std::size_t>(k)];
    if (nx == 0.0 || ny == 0.0) continue;
    const double* x = trial.values.row(k).data();
    const double* y = tmpl.values.row(k).data();
    double dot = 0.0;
    for (Eigen::Index t = 0; t < trial.values.cols(); ++t) dot += x[t] * y[t];
    score += dot / (nx * ny);
  }
  return score;
}

inline bool all_flat(const CenteredRows& rows) {
  return std::all_of(rows.norms.begin(), rows.norms.end(), [](double n) { return n == 0.0; });
}

}  // namespace veplab::kernels::detail
