#pragma once

// Hot loops of the toolkit, each in two builds with identical signatures:
//   kernels::serial    plain reference loops, kept for testing and benchmarking
//   kernels::parallel  OpenMP versions used by the library
// Every output element is produced by one thread with the same summation order as
// the serial loop, so both builds agree bit-for-bit regardless of thread count.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "veplab/signal.hpp"

namespace veplab::kernels {

// Per-trial Pearson scores against every class template, summed over components.
struct ScoreTable {
  Eigen::MatrixXd scores;              // n_trials x n_classes
  std::vector<std::uint8_t> degenerate;  // 1 when every filtered component is flat
};

// True when `x` has no variance relative to its energy.
bool is_flat(std::span<const double> x) noexcept;

// Pearson correlation; 0 when either side is flat.
double pearson(std::span<const double> x, std::span<const double> y) noexcept;

namespace serial {

// Adds S^T S and S^T r of the lag design matrix (lags lag_min .. lag_min + n_lags - 1)
// into `sts` and `str`.
void lagged_gram(std::span<const double> stimulus, std::span<const double> response, int lag_min,
                 int n_lags, Eigen::MatrixXd& sts, Eigen::VectorXd& str);

// out[t] = sum_j coeffs[j] * stimulus[t - lag_min - j], zero outside the stimulus.
void lagged_filter(std::span<const double> stimulus, std::span<const double> coeffs, int lag_min,
                   std::span<double> out);

// Sum of D_i D_i^T over row-major blocks of equal shape.
Eigen::MatrixXd scatter(const std::vector<RowMatrix>& blocks);

// Scores over the first `window` samples of every trial and template.
ScoreTable correlation_scores(const std::vector<RowMatrix>& filtered_trials,
                              const std::vector<RowMatrix>& templates, Eigen::Index window);

}  // namespace serial

namespace parallel {

void lagged_gram(std::span<const double> stimulus, std::span<const double> response, int lag_min,
                 int n_lags, Eigen::MatrixXd& sts, Eigen::VectorXd& str);
void lagged_filter(std::span<const double> stimulus, std::span<const double> coeffs, int lag_min,
                   std::span<double> out);
Eigen::MatrixXd scatter(const std::vector<RowMatrix>& blocks);
ScoreTable correlation_scores(const std::vector<RowMatrix>& filtered_trials,
                              const std::vector<RowMatrix>& templates, Eigen::Index window);

}  // namespace parallel

// Threads used by parallel kernels; 0 leaves the OpenMP default.
void set_thread_count(int threads);
int thread_count();

}  // namespace veplab::kernels
