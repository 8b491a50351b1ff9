#pragma once

// Synthetic forward model with known ground truth:
//   component = conv(h_true, stimulus) + gain * (clean^2 - mean(clean^2))
//   channels  = mixing * component + 1/f^alpha background + alpha oscillator + sensor noise

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "veplab/encoder.hpp"
#include "veplab/recording.hpp"
#include "veplab/stimgen.hpp"

namespace veplab {

struct AlphaOscillator {
  double freq_hz = 10.0;
  double amplitude = 0.0;
  // Spatial pattern of the oscillator; empty means uniform 1/sqrt(n_channels).
  std::vector<double> topography;
};

struct SimConfig {
  Trf trf_true;
  std::vector<double> mixing;  // unit L2 norm, one weight per channel
  double colored_sigma = 0.0;  // standard deviation of the 1/f^alpha background per channel
  double noise_alpha_exponent = 1.0;
  AlphaOscillator alpha_osc;
  double sensor_noise_sigma = 0.0;
  double nonlinearity_gain = 0.0;
  int n_blocks = 1;
  double sample_rate_hz = 240.0;
  double epoch_s = 1.0;
  std::uint64_t seed = 0;

  std::size_t n_channels() const { return mixing.size(); }
  std::size_t n_samples() const;
};

// Throws InvalidConfig on broken invariants (unit mixing norm, non-negative amplitudes, rates).
void validate(const SimConfig& config);

// Noise for one trial: stream (seed, trial_index). Shape n_channels x n_samples.
RowMatrix generate_noise(const SimConfig& config, std::size_t n_samples, std::uint64_t trial_index);

struct GroundTruth {
  std::vector<std::vector<double>> linear;     // per trial
  std::vector<std::vector<double>> nonlinear;  // per trial
  std::vector<RowMatrix> noise;                // per trial
};

struct Simulation {
  Recording recording;
  GroundTruth truth;
};

// Trials are ordered block by block, each block holding every code once in set order.
Simulation simulate_recording(const SimConfig& config, const CodeSet& codes);

}  // namespace veplab

namespace veplab {

// Damped-oscillation impulse response resembling a visual evoked potential:
// h(tau) = gain * (tau/tau0) * exp(1 - tau/tau0) * sin(2*pi*f*tau), tau in [0, duration].
Trf vep_like_trf(double sample_rate_hz, double duration_s = 0.3, double freq_hz = 8.0,
                 double tau0_s = 0.06, double gain = 1.0);

// Smooth unit-norm spatial pattern peaking at channel `peak`.
std::vector<double> gaussian_topography(std::size_t n_channels, double peak, double width);

}  // namespace veplab
