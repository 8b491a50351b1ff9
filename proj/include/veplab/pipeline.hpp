#pragma once

// End-to-end synthetic run: preliminary (simulate, fit TRF, both capacity bounds),
// offline (train and evaluate JFPM and WN paradigms over decoding windows),
// optimization (group annealing, then personal sampling) and the ITR tables.

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace veplab {

struct PipelineConfig {
  static constexpr int kSchemaVersion = 1;

  std::uint64_t seed = 7;

  struct Simulation {
    double sample_rate_hz = 240.0;
    double epoch_s = 0.5;
    std::size_t n_channels = 8;
    int n_blocks = 6;
    double signal_gain = 1.0;
    double colored_sigma = 0.4;
    double noise_alpha_exponent = 1.0;
    double alpha_amplitude = 0.3;
    double alpha_freq_hz = 10.0;
    double sensor_noise_sigma = 0.3;
    double nonlinearity_gain = 0.0;
  } simulation;

  struct Stimulus {
    double frame_rate_hz = 60.0;
    double duration_s = 0.5;
    int wn_pool_size = 160;
    int jfpm_targets = 40;
    double jfpm_f0_hz = 8.0;
    double jfpm_delta_f_hz = 0.2;
    double jfpm_phi0_rad = 0.0;
    double jfpm_delta_phi_rad = 0.35 * std::numbers::pi;
  } stimulus;

  struct Encoder {
    double lag_min_s = 0.0;
    double lag_max_s = 0.3;
    std::optional<double> ridge_lambda;
  } encoder;

  struct Capacity {
    double band_lo_hz = 1.0;
    double band_hi_hz = 30.0;
    double snr_max = 1e6;
    std::optional<double> wiener_lambda;  // default 1e-3 * max |H|^2
  } capacity;

  struct Decoder {
    int n_components = 1;  // the simulator has a single source
    double gamma = 0.01;
    std::vector<double> windows_s{0.1, 0.2, 0.3, 0.4, 0.5};
    double gaze_time_s = 0.5;
  } decoder;

  struct Optimizer {
    std::size_t group_select = 80;
    int iterations = 20000;
    int restarts = 4;
    double cooling = 0.995;
    std::optional<double> initial_temp;
    std::size_t personal_subset = 40;
    std::size_t personal_samples = 10000;
  } optimizer;
};

// Unknown keys anywhere in the document are rejected with InvalidConfig.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& config);

struct PipelineReport {
  nlohmann::json bundle;  // contents of bundle.json
  double upper_bits = 0.0;
  double lower_bits = 0.0;
};

// Writes every artifact under `out_dir` and returns the bundle index. A failing stage
// rethrows its error prefixed with the stage name; earlier artifacts stay on disk.
PipelineReport run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir);

}  // namespace veplab
