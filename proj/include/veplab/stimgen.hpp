#pragma once

// Stimulus code generation: narrowband joint frequency-phase modulation (JFPM)
// sinusoids and broadband uniform white-noise (WN) sequences at a display frame rate.

#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "veplab/signal.hpp"

namespace veplab {

enum class CodeKind { Jfpm, WhiteNoise };
enum class CodeStage { RawPool, GroupOptimized, Personal };

std::string_view to_string(CodeKind kind) noexcept;
std::string_view to_string(CodeStage stage) noexcept;
CodeKind parse_code_kind(std::string_view text);
CodeStage parse_code_stage(std::string_view text);

struct StimulusCode {
  int class_id = 0;
  double frame_rate_hz = 60.0;
  std::vector<double> values;
  CodeKind kind = CodeKind::WhiteNoise;
  std::optional<std::uint64_t> seed;

  double duration_s() const { return static_cast<double>(values.size()) / frame_rate_hz; }
};

struct CodeSet {
  std::vector<StimulusCode> codes;
  CodeStage stage = CodeStage::RawPool;
  std::optional<double> objective;
  // Free-form provenance: generator parameters, optimizer seeds, iteration counts.
  nlohmann::json params = nlohmann::json::object();

  std::size_t size() const { return codes.size(); }
  std::size_t length() const { return codes.empty() ? 0 : codes.front().values.size(); }
  double frame_rate_hz() const { return codes.empty() ? 0.0 : codes.front().frame_rate_hz; }
  const StimulusCode& by_class(int class_id) const;
  std::vector<int> class_ids() const;
};

// Throws InvalidParam when the set breaks a CodeSet invariant (shared rate and
// length, unique class ids, values in [0,1] unless `allow_raw`).
void validate(const CodeSet& set, bool allow_raw = false);

// round(duration * rate); warns when the duration is not a whole number of frames.
std::size_t frame_count(double duration_s, double frame_rate_hz);

struct JfpmParams {
  int n_targets = 40;
  double f0_hz = 8.0;
  double delta_f_hz = 0.2;
  double phi0_rad = 0.0;
  double delta_phi_rad = 0.35 * std::numbers::pi;
  double frame_rate_hz = 60.0;
  double duration_s = 1.0;
};

// Raw sinusoid sin(2*pi*f_n*k/rate + phi_n) for 1-based target n at frame k, in [-1, 1].
double jfpm_raw_value(const JfpmParams& params, int target, std::size_t frame);

// Codes hold the luminance-mapped value 0.5 * (1 + raw). With `raw` set, values are
// the unmapped sinusoid and the set no longer satisfies the [0,1] invariant.
CodeSet generate_jfpm(const JfpmParams& params, bool raw = false);

double white_noise_value(std::uint64_t seed, int class_id, std::size_t frame);
CodeSet generate_white_noise(int n_classes, double frame_rate_hz, double duration_s,
                             std::uint64_t seed);

// Zero-order hold from the frame rate to an integer multiple of it.
Signal upsample_to_signal(const StimulusCode& code, double sample_rate_hz);

// Upsampled code cut or zero-padded to exactly `n_samples`.
Signal stimulus_epoch(const StimulusCode& code, double sample_rate_hz, std::size_t n_samples);

}  // namespace veplab
