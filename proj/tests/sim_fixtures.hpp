#pragma once

#include <cmath>

#include "veplab/simulator.hpp"

namespace veplab::testing {

// Multichannel VEP-like simulation at 240 Hz with 0.5 s epochs. `noise_scale`
// multiplies every noise amplitude.
inline SimConfig vep_config(std::size_t n_channels, double noise_scale, int n_blocks, std::uint64_t seed) {
  SimConfig c;
  c.sample_rate_hz = 240.0;
  c.epoch_s = 0.5;
  c.trf_true = vep_like_trf(240.0, 0.3);
  const double n = static_cast<double>(n_channels);
  c.mixing = gaussian_topography(n_channels, 0.6 * (n - 1.0), std::max(1.0, n / 4.0));
  c.colored_sigma = 0.4 * noise_scale;
  c.alpha_osc.amplitude = 0.3 * noise_scale;
  c.alpha_osc.topography = gaussian_topography(n_channels, 0.2 * (n - 1.0), std::max(1.0, n / 3.0));
  c.sensor_noise_sigma = 0.3 * noise_scale;
  c.n_blocks = n_blocks;
  c.seed = seed;
  return c;
}

}  // namespace veplab::testing
