#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "veplab/signal.hpp"

namespace veplab {

// Epoched multichannel data, stored trial-major, then channel, then sample.
class Recording {
 public:
  using TrialView = Eigen::Map<const RowMatrix>;
  using MutableTrialView = Eigen::Map<RowMatrix>;

  Recording() = default;
  Recording(std::size_t n_trials, std::size_t n_channels, std::size_t n_samples, double sample_rate_hz);

  std::size_t n_trials() const { return n_trials_; }
  std::size_t n_channels() const { return n_channels_; }
  std::size_t n_samples() const { return n_samples_; }
  double sample_rate_hz() const { return sample_rate_hz_; }
  double latency_offset_s() const { return latency_offset_s_; }
  void set_latency_offset_s(double seconds);

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  std::span<const std::uint32_t> labels() const { return labels_; }
  std::span<std::uint32_t> labels() { return labels_; }

  TrialView trial(std::size_t i) const;
  MutableTrialView trial(std::size_t i);

  // Single-component trace w^T X for trial i.
  std::vector<double> component(std::size_t i, std::span<const double> weights) const;

  // Sorted distinct labels.
  std::vector<int> class_ids() const;
  std::vector<std::size_t> trials_of(int class_id) const;

  Recording subset(std::span<const std::size_t> trial_indices) const;
  Recording filter_classes(std::span<const int> class_ids) const;

  // Throws InvalidParam when sizes or labels are inconsistent.
  void validate() const;

 private:
  std::size_t n_trials_ = 0;
  std::size_t n_channels_ = 0;
  std::size_t n_samples_ = 0;
  double sample_rate_hz_ = 0.0;
  double latency_offset_s_ = 0.0;
  std::vector<std::uint32_t> labels_;
  std::vector<double> data_;
};

// Trial index ranges of `n_blocks` consecutive equal blocks.
std::vector<std::vector<std::size_t>> block_partition(std::size_t n_trials, std::size_t n_blocks);

}  // namespace veplab
