#include "veplab/recording.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "veplab/error.hpp"

namespace veplab {

Recording::Recording(std::size_t n_trials, std::size_t n_channels, std::size_t n_samples,
                     double sample_rate_hz)
    : n_trials_(n_trials),
      n_channels_(n_channels),
      n_samples_(n_samples),
      sample_rate_hz_(sample_rate_hz),
      labels_(n_trials, 0),
      data_(n_trials * n_channels * n_samples, 0.0) {
  if (!(sample_rate_hz > 0.0)) fail(Errc::InvalidParam, "sample rate must be positive");
}

void Recording::set_latency_offset_s(double seconds) {
  if (!(seconds >= 0.0)) fail(Errc::InvalidParam, "latency offset must be non-negative");
  latency_offset_s_ = seconds;
}

Recording::TrialView Recording::trial(std::size_t i) const {
  return TrialView(data_.data() + i * n_channels_ * n_samples_, static_cast<Eigen::Index>(n_channels_),
                   static_cast<Eigen::Index>(n_samples_));
}

Recording::MutableTrialView Recording::trial(std::size_t i) {
  return MutableTrialView(data_.data() + i * n_channels_ * n_samples_,
                          static_cast<Eigen::Index>(n_channels_), static_cast<Eigen::Index>(n_samples_));
}

std::vector<double> Recording::component(std::size_t i, std::span<const double> weights) const {
  if (weights.size() != n_channels_) {
    fail(Errc::InvalidParam, "component weights have " + std::to_string(weights.size()) +
                                 " entries for " + std::to_string(n_channels_) + " channels");
  }
  std::vector<double> out(n_samples_, 0.0);
  const double* base = data_.data() + i * n_channels_ * n_samples_;
  for (std::size_t c = 0; c < n_channels_; ++c) {
    const double w = weights[c];
    const double* row = base + c * n_samples_;
    for (std::size_t t = 0; t < n_samples_; ++t) out[t] += w * row[t];
  }
  return out;
}

std::vector<int> Recording::class_ids() const {
  std::set<int> ids(labels_.begin(), labels_.end());
  return {ids.begin(), ids.end()};
}

std::vector<std::size_t> Recording::trials_of(int class_id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n_trials_; ++i) {
    if (static_cast<int>(labels_[i]) == class_id) out.push_back(i);
  }
  return out;
}

Recording Recording::subset(std::span<const std::size_t> trial_indices) const {
  Recording out(trial_indices.size(), n_channels_, n_samples_, sample_rate_hz_);
  out.latency_offset_s_ = latency_offset_s_;
  const std::size_t stride = n_channels_ * n_samples_;
  for (std::size_t k = 0; k < trial_indices.size(); ++k) {
    const std::size_t i = trial_indices[k];
    if (i >= n_trials_) fail(Errc::InvalidParam, "trial index out of range");
    out.labels_[k] = labels_[i];
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(i * stride), stride,
                out.data_.begin() + static_cast<std::ptrdiff_t>(k * stride));
  }
  return out;
}

Recording Recording::filter_classes(std::span<const int> class_ids) const {
  const std::set<int> keep(class_ids.begin(), class_ids.end());
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < n_trials_; ++i) {
    if (keep.contains(static_cast<int>(labels_[i]))) indices.push_back(i);
  }
  return subset(indices);
}

void Recording::validate() const {
  if (labels_.size() != n_trials_) fail(Errc::InvalidParam, "label count differs from trial count");
  if (data_.size() != n_trials_ * n_channels_ * n_samples_) {
    fail(Errc::InvalidParam, "payload size inconsistent with dimensions");
  }
  if (!(sample_rate_hz_ > 0.0)) fail(Errc::InvalidParam, "sample rate must be positive");
}

std::vector<std::vector<std::size_t>> block_partition(std::size_t n_trials, std::size_t n_blocks) {
  if (n_blocks == 0 || n_trials % n_blocks != 0) {
    fail(Errc::InvalidParam, std::to_string(n_trials) + " trials do not split into " +
                                 std::to_string(n_blocks) + " equal blocks");
  }
  const std::size_t per_block = n_trials / n_blocks;
  std::vector<std::vector<std::size_t>> blocks(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    for (std::size_t k = 0; k < per_block; ++k) blocks[b].push_back(b * per_block + k);
  }
  return blocks;
}

}  // namespace veplab
