#include <omp.h>

#include "kernels_detail.hpp"

namespace veplab::kernels {

void set_thread_count(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

namespace parallel {

void lagged_gram(std::span<const double> stimulus, std::span<const double> response, int lag_min,
                 int n_lags, Eigen::MatrixXd& sts, Eigen::VectorXd& str) {
#pragma omp parallel for schedule(dynamic, 4)
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
  const auto n = static_cast<long>(out.size());
#pragma omp parallel for schedule(static)
  for (long t = 0; t < n; ++t) {
    out[static_cast<std::size_t>(t)] = detail::filter_sample(stimulus, coeffs, lag_min, t);
  }
}

Eigen::MatrixXd scatter(const std::vector<RowMatrix>& blocks) {
  if (blocks.empty()) return {};
  const Eigen::Index rows = blocks.front().rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, rows);
#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index a = 0; a < rows; ++a) {
    for (Eigen::Index b = a; b < rows; ++b) {
      out(a, b) = out(b, a) = detail::scatter_entry(blocks, a, b);
    }
  }
  return out;
}

ScoreTable correlation_scores(const std::vector<RowMatrix>& filtered_trials,
                              const std::vector<RowMatrix>& templates, Eigen::Index window) {
  std::vector<detail::CenteredRows> centered_templates(templates.size());
  const auto n_templates = static_cast<long>(templates.size());
#pragma omp parallel for schedule(static)
  for (long c = 0; c < n_templates; ++c) {
    centered_templates[static_cast<std::size_t>(c)] =
        detail::center_rows(templates[static_cast<std::size_t>(c)], window);
  }

  ScoreTable table;
  const auto n_trials = static_cast<Eigen::Index>(filtered_trials.size());
  table.scores.resize(n_trials, static_cast<Eigen::Index>(templates.size()));
  table.degenerate.assign(filtered_trials.size(), 0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n_trials; ++i) {
    const auto trial = detail::center_rows(filtered_trials[static_cast<std::size_t>(i)], window);
    table.degenerate[static_cast<std::size_t>(i)] = detail::all_flat(trial) ? 1 : 0;
    for (std::size_t c = 0; c < centered_templates.size(); ++c) {
      table.scores(i, static_cast<Eigen::Index>(c)) = detail::score_pair(trial, centered_templates[c]);
    }
  }
  return table;
}

}  // namespace parallel
}  // namespace veplab::kernels
