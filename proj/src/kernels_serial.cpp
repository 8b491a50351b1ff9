#include <cmath>

#include "kernels_detail.hpp"
#include "veplab/error.hpp"

namespace veplab::kernels {

bool is_flat(std::span<const double> x) noexcept {
  if (x.empty()) return true;
  double mean = 0.0;
  double energy = 0.0;
  for (double v : x) {
    mean += v;
    energy += v * v;
  }
  if (energy == 0.0) return true;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss <= 1e-20 * energy;
}

double pearson(std::span<const double> x, std::span<const double> y) noexcept {
  if (x.size() != y.size() || is_flat(x) || is_flat(y)) return 0.0;
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / (std::sqrt(sxx) * std::sqrt(syy));
}

namespace serial {

void lagged_gram(std::span<const double> stimulus, std::span<const double> response, int lag_min,
                 int n_lags, Eigen::MatrixXd& sts, Eigen::VectorXd& str) {
  for (int a = 0; a < n_lags; ++a) {
    for (int b = a; b < n_lags; ++b) {
      const double v = detail::gram_entry(stimulus, lag_min + a, lag_min + b);
      sts(a, b) += v;
      if (b != a) sts(b, a) += v;
    }
    str(a) += detail::cross_entry(stimulus, response, lag_min + a);
  }
}

void lagged_filter(std::span<const double> stimulus, std::span<const double> coeffs, int lag_min,
                   std::span<double> out) {
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = detail::filter_sample(stimulus, coeffs, lag_min, static_cast<long>(t));
  }
}

Eigen::MatrixXd scatter(const std::vector<RowMatrix>& blocks) {
  if (blocks.empty()) return {};
  const Eigen::Index rows = blocks.front().rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, rows);
  for (Eigen::Index a = 0; a < rows; ++a) {
    for (Eigen::Index b = a; b < rows; ++b) {
      out(a, b) = out(b, a) = detail::scatter_entry(blocks, a, b);
    }
  }
  return out;
}

ScoreTable correlation_scores(const std::vector<RowMatrix>& filtered_trials,
                              const std::vector<RowMatrix>& templates, Eigen::Index window) {
  std::vector<detail::CenteredRows> centered_templates;
  centered_templates.reserve(templates.size());
  for (const auto& t : templates) centered_templates.push_back(detail::center_rows(t, window));

  ScoreTable table;
  const auto n_trials = static_cast<Eigen::Index>(filtered_trials.size());
  table.scores.resize(n_trials, static_cast<Eigen::Index>(templates.size()));
  table.degenerate.assign(filtered_trials.size(), 0);
  for (Eigen::Index i = 0; i < n_trials; ++i) {
    const auto trial = detail::center_rows(filtered_trials[static_cast<std::size_t>(i)], window);
    table.degenerate[static_cast<std::size_t>(i)] = detail::all_flat(trial) ? 1 : 0;
    for (std::size_t c = 0; c < centered_templates.size(); ++c) {
      table.scores(i, static_cast<Eigen::Index>(c)) = detail::score_pair(trial, centered_templates[c]);
    }
  }
  return table;
}

}  // namespace serial
}  // namespace veplab::kernels
