#pragma once

// Two-stage code-set design. Group stage: simulated annealing over subsets of a
// code pool, maximizing the minimum pairwise Euclidean distance between
// TRF-predicted responses. Personal stage: random subsets of the group set scored
// by decoding accuracy under one shared spatial filter.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "veplab/decoder.hpp"
#include "veplab/encoder.hpp"
#include "veplab/recording.hpp"
#include "veplab/stimgen.hpp"

namespace veplab {

struct SaConfig {
  int iterations = 20000;
  // Unset: standard deviation of pairwise distances over a random subset sample.
  std::optional<double> initial_temp;
  double cooling = 0.995;
  int restarts = 4;
  std::uint64_t seed = 0;
  std::size_t select_size = 40;
};

void validate(const SaConfig& config, std::size_t pool_size);

struct SaStep {
  double objective = 0.0;  // current state after the step
  bool accepted = false;
  double temperature = 0.0;
  double best_objective = 0.0;  // running best, non-decreasing
};

struct RestartTrace {
  double initial_temp = 0.0;
  std::vector<SaStep> steps;
  double best_objective = 0.0;
  std::vector<std::size_t> best_subset;  // pool row indices, ascending
};

struct OptimizationTrace {
  std::vector<RestartTrace> restarts;
  std::size_t best_restart = 0;
  double best_objective = 0.0;
  std::vector<std::size_t> best_subset;
};

// One predicted single-component response per pool code (rows), at the TRF rate.
Eigen::MatrixXd estimate_group_responses(const Trf& trf, const CodeSet& pool);

// Minimum Euclidean distance over unordered pairs of the selected rows.
double min_pairwise_distance(const Eigen::MatrixXd& responses, std::span<const std::size_t> rows);

// Every row when `rows` is empty.
double min_pairwise_distance(const Eigen::MatrixXd& responses);

// Swap-move annealing from a random subset; T <- cooling * T per iteration.
// Restarts run on independent streams (seed, restart); ties keep the lowest restart.
OptimizationTrace sa_optimize(const Eigen::MatrixXd& responses, const SaConfig& config);

// Codes of `pool` at the given row indices as a new set.
CodeSet select_codes(const CodeSet& pool, std::span<const std::size_t> rows, CodeStage stage,
                     std::optional<double> objective);

struct PersonalSelection {
  std::vector<int> class_ids;  // ascending
  double accuracy = 0.0;
  std::size_t sample_index = 0;             // first sample reaching the best accuracy
  std::vector<double> sampled_accuracies;   // in sampling order
};

// Accuracy of `model` on the trials of `class_ids` with templates restricted to them.
// `scores` must come from score_trials() on the same model and recording.
double restricted_accuracy(const DecoderModel& model, const Recording& recording,
                           const kernels::ScoreTable& scores, std::span<const int> class_ids);

// Draws n_samples uniform subsets of model classes (stream (seed, sample)); keeps the
// most accurate, ties to the earliest sample. W is never refit.
PersonalSelection personal_optimize(const DecoderModel& model, const Recording& recording,
                                    std::size_t subset_size, std::size_t n_samples,
                                    std::uint64_t seed, std::optional<double> window_s = std::nullopt);

}  // namespace veplab
