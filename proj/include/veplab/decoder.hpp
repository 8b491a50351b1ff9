#pragma once

// Simplified task-discriminant component analysis: one spatial filter bank from the
// Fisher criterion on between/within-class scatter, then template matching by
// summed per-component Pearson correlation.

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "veplab/kernels.hpp"
#include "veplab/recording.hpp"

namespace veplab {

struct ScatterMatrices {
  Eigen::MatrixXd between;  // S_b = H_b H_b^T
  Eigen::MatrixXd within;   // S_w = H_w H_w^T
};

// H_b stacks (class mean - grand mean) / sqrt(N_classes); H_w stacks
// (trial - its class mean) / sqrt(N_trials). `window_samples` = 0 uses whole trials.
ScatterMatrices scatter_matrices(const Recording& recording, std::size_t window_samples = 0);

struct DecoderModel {
  Eigen::MatrixXd weights;           // n_channels x n_components, descending eigenvalue
  std::vector<double> eigenvalues;   // generalized eigenvalues of the kept components
  std::vector<int> class_ids;        // ascending
  std::vector<RowMatrix> templates;  // per class, n_components x window_samples
  int n_components = 0;
  double shrinkage_gamma = 0.0;
  std::size_t window_samples = 0;
  double sample_rate_hz = 0.0;

  std::size_t n_channels() const { return static_cast<std::size_t>(weights.rows()); }
  std::size_t index_of(int class_id) const;
  // Same filters, templates pruned to `class_ids`.
  DecoderModel restricted(std::span<const int> class_ids) const;
  std::vector<double> component_weights(int component = 0) const;
};

inline constexpr int kDefaultComponents = 8;
inline constexpr double kDefaultShrinkage = 0.01;

// W = leading generalized eigenvectors of (S_b, S_w + gamma * tr(S_w)/N_ch * I).
// When tr(S_w) is 0 the shrinkage level falls back to tr(S_b)/N_ch (then 1).
DecoderModel train_tdca(const Recording& recording, int n_components = kDefaultComponents,
                        double shrinkage_gamma = kDefaultShrinkage,
                        std::optional<double> window_s = std::nullopt);

struct Classification {
  int class_id = 0;
  std::vector<double> scores;  // aligned with model.class_ids
  bool degenerate = false;     // every filtered component flat; lowest class returned
};

std::size_t window_to_samples(const DecoderModel& model, double window_s, std::size_t trial_samples);

Classification classify(const DecoderModel& model, const Recording::TrialView& trial, double window_s);

// Filtered trials (W^T X over the window) scored against every template.
kernels::ScoreTable score_trials(const DecoderModel& model, const Recording& recording,
                                 std::size_t window_samples);

struct Evaluation {
  double accuracy = 0.0;
  std::vector<int> class_ids;      // confusion row/column order
  Eigen::MatrixXd confusion;       // rows: true class, row-normalized
  std::vector<int> predicted;      // per trial
  std::size_t n_trials = 0;
};

Evaluation evaluate(const DecoderModel& model, const Recording& recording, double window_s);

// Leave-one-block-out: train on all blocks but one, test on it, pool the predictions.
Evaluation cross_validate(const Recording& recording, std::size_t n_blocks, int n_components,
                          double shrinkage_gamma, double window_s);

// Mean per-component Pearson correlation between the recording's filtered class means.
Eigen::MatrixXd class_correlation_matrix(const DecoderModel& model, const Recording& recording,
                                         double window_s);

double fisher_objective(const Eigen::MatrixXd& weights, const ScatterMatrices& scatter);

struct ItrParams {
  int n_classes = 0;
  double accuracy = 0.0;
  double stim_time_s = 0.0;
  double gaze_time_s = 0.0;
};

struct ItrResult {
  double bits_per_trial = 0.0;
  double itr_bpm = 0.0;       // includes gaze-shift time
  double itr_star_bps = 0.0;  // stimulation time only
  ItrParams params;
};

ItrResult itr(int n_classes, double accuracy, double stim_time_s, double gaze_time_s);

}  // namespace veplab
