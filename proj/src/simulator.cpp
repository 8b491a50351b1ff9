#include "veplab/simulator.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "veplab/error.hpp"
#include "veplab/rng.hpp"
#include "veplab/spectral.hpp"

namespace veplab {

std::size_t SimConfig::n_samples() const {
  return static_cast<std::size_t>(std::lround(epoch_s * sample_rate_hz));
}

void validate(const SimConfig& config) {
  if (!(config.sample_rate_hz > 0.0) || !(config.epoch_s > 0.0)) {
    fail(Errc::InvalidConfig, "sample rate and epoch length must be positive");
  }
  if (config.n_samples() < 2) fail(Errc::InvalidConfig, "epoch shorter than two samples");
  if (config.n_blocks < 1) fail(Errc::InvalidConfig, "n_blocks must be positive");
  if (config.mixing.empty()) fail(Errc::InvalidConfig, "mixing needs at least one channel");
  double norm_sq = 0.0;
  for (double m : config.mixing) norm_sq += m * m;
  if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-9) fail(Errc::InvalidConfig, "mixing must have unit L2 norm");
  if (!config.alpha_osc.topography.empty() && config.alpha_osc.topography.size() != config.mixing.size()) {
    fail(Errc::InvalidConfig, "oscillator topography length differs from channel count");
  }
  if (config.colored_sigma < 0.0 || config.sensor_noise_sigma < 0.0 || config.alpha_osc.amplitude < 0.0 ||
      config.nonlinearity_gain < 0.0) {
    fail(Errc::InvalidConfig, "amplitudes must be non-negative");
  }
  if (config.noise_alpha_exponent < 0.0) fail(Errc::InvalidConfig, "noise exponent must be non-negative");
  if (config.trf_true.coeffs.empty()) fail(Errc::InvalidConfig, "trf_true has no coefficients");
  if (!same_rate(config.trf_true.sample_rate_hz, config.sample_rate_hz)) {
    fail(Errc::InvalidConfig, "trf_true sample rate differs from the simulation rate");
  }
}

namespace {

// White Gaussian shaped by |f|^(-alpha/2), scaled to unit expected variance.
std::vector<double> colored_noise(CounterRng& rng, std::size_t n, double alpha, double rate) {
  std::vector<double> white(n);
  for (double& v : white) v = rng.normal();
  if (alpha == 0.0) return white;
  auto spectrum = dft(white);
  double weight_sq_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = static_cast<double>(std::min(k, n - k)) * rate / static_cast<double>(n);
    const double w = k == 0 ? 0.0 : std::pow(f, -alpha / 2.0);
    spectrum[k] *= w;
    weight_sq_sum += w * w;
  }
  auto shaped = idft_real(spectrum);
  const double scale = 1.0 / std::sqrt(weight_sq_sum / static_cast<double>(n));
  for (double& v : shaped) v *= scale;
  return shaped;
}

}  // namespace

RowMatrix generate_noise(const SimConfig& config, std::size_t n_samples, std::uint64_t trial_index) {
  if (n_samples < 2) fail(Errc::InvalidConfig, "noise needs at least two samples");
  const auto n_ch = config.n_channels();
  if (n_ch == 0) fail(Errc::InvalidConfig, "no channels");
  RowMatrix noise = RowMatrix::Zero(static_cast<Eigen::Index>(n_ch), static_cast<Eigen::Index>(n_samples));
  CounterRng rng(config.seed, trial_index);

  if (config.colored_sigma > 0.0) {
    for (std::size_t c = 0; c < n_ch; ++c) {
      const auto bg = colored_noise(rng, n_samples, config.noise_alpha_exponent, config.sample_rate_hz);
      for (std::size_t t = 0; t < n_samples; ++t) {
        noise(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) += config.colored_sigma * bg[t];
      }
    }
  }
  if (config.alpha_osc.amplitude > 0.0) {
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    std::vector<double> topo = config.alpha_osc.topography;
    if (topo.empty()) topo.assign(n_ch, 1.0 / std::sqrt(static_cast<double>(n_ch)));
    for (std::size_t t = 0; t < n_samples; ++t) {
      const double time = static_cast<double>(t) / config.sample_rate_hz;
      const double v = config.alpha_osc.amplitude *
                       std::sin(2.0 * std::numbers::pi * config.alpha_osc.freq_hz * time + phase);
      for (std::size_t c = 0; c < n_ch; ++c) noise(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) += topo[c] * v;
    }
  }
  if (config.sensor_noise_sigma > 0.0) {
    for (std::size_t c = 0; c < n_ch; ++c) {
      for (std::size_t t = 0; t < n_samples; ++t) {
        noise(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) += config.sensor_noise_sigma * rng.normal();
      }
    }
  }
  return noise;
}

Simulation simulate_recording(const SimConfig& config, const CodeSet& codes) {
  validate(config);
  validate(codes, true);
  if (codes.codes.empty()) fail(Errc::InvalidParam, "empty code set");
  const std::size_t n = config.n_samples();
  const std::size_t n_codes = codes.size();
  const std::size_t n_trials = n_codes * static_cast<std::size_t>(config.n_blocks);

  std::vector<Signal> stimuli;
  for (const auto& code : codes.codes) {
    const auto up = upsample_to_signal(code, config.sample_rate_hz);
    if (up.size() > n) fail(Errc::InvalidParam, "epoch shorter than the code duration");
    stimuli.push_back(stimulus_epoch(code, config.sample_rate_hz, n));
  }
  std::vector<std::vector<double>> clean(n_codes);
  for (std::size_t k = 0; k < n_codes; ++k) clean[k] = predict_response(config.trf_true, stimuli[k]).samples;

  Simulation sim;
  sim.recording = Recording(n_trials, config.n_channels(), n, config.sample_rate_hz);
  sim.truth.linear.resize(n_trials);
  sim.truth.nonlinear.resize(n_trials);
  sim.truth.noise.resize(n_trials);

  const auto total = static_cast<long>(n_trials);
#pragma omp parallel for schedule(static)
  for (long ti = 0; ti < total; ++ti) {
    const auto i = static_cast<std::size_t>(ti);
    const std::size_t k = i % n_codes;
    sim.recording.labels()[i] = static_cast<std::uint32_t>(codes.codes[k].class_id);
    const auto& linear = clean[k];
    std::vector<double> nonlinear(n, 0.0);
    if (config.nonlinearity_gain > 0.0) {
      double mean_sq = 0.0;
      for (double v : linear) mean_sq += v * v;
      mean_sq /= static_cast<double>(n);
      for (std::size_t t = 0; t < n; ++t) nonlinear[t] = config.nonlinearity_gain * (linear[t] * linear[t] - mean_sq);
    }
    RowMatrix noise = generate_noise(config, n, i);
    auto trial = sim.recording.trial(i);
    for (std::size_t c = 0; c < config.n_channels(); ++c) {
      for (std::size_t t = 0; t < n; ++t) {
        trial(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) =
            config.mixing[c] * (linear[t] + nonlinear[t]) + noise(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t));
      }
    }
    sim.truth.linear[i] = linear;
    sim.truth.nonlinear[i] = std::move(nonlinear);
    sim.truth.noise[i] = std::move(noise);
  }
  return sim;
}

}  // namespace veplab

namespace veplab {

Trf vep_like_trf(double sample_rate_hz, double duration_s, double freq_hz, double tau0_s, double gain) {
  if (!(sample_rate_hz > 0.0) || !(duration_s > 0.0) || !(tau0_s > 0.0)) {
    fail(Errc::InvalidParam, "invalid TRF shape parameters");
  }
  Trf trf;
  trf.sample_rate_hz = sample_rate_hz;
  trf.lag_min = 0;
  const auto n = static_cast<std::size_t>(std::lround(duration_s * sample_rate_hz)) + 1;
  trf.coeffs.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double tau = static_cast<double>(j) / sample_rate_hz;
    trf.coeffs[j] = gain * (tau / tau0_s) * std::exp(1.0 - tau / tau0_s) * std::sin(2.0 * std::numbers::pi * freq_hz * tau);
  }
  trf.fit_length = n;
  return trf;
}

std::vector<double> gaussian_topography(std::size_t n_channels, double peak, double width) {
  std::vector<double> topo(n_channels);
  double norm_sq = 0.0;
  for (std::size_t c = 0; c < n_channels; ++c) {
    const double d = (static_cast<double>(c) - peak) / width;
    topo[c] = std::exp(-0.5 * d * d);
    norm_sq += topo[c] * topo[c];
  }
  for (double& v : topo) v /= std::sqrt(norm_sq);
  return topo;
}

}  // namespace veplab
