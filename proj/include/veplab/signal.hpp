#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace veplab {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One real-valued sampled sequence with its rate.
struct Signal {
  std::vector<double> samples;
  double sample_rate_hz = 0.0;

  std::size_t size() const { return samples.size(); }
};

// Rates are compared with a relative tolerance of 1e-9.
bool same_rate(double a_hz, double b_hz) noexcept;

}  // namespace veplab
