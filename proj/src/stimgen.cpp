#include "veplab/stimgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "veplab/error.hpp"
#include "veplab/rng.hpp"

namespace veplab {

bool same_rate(double a_hz, double b_hz) noexcept {
  return std::abs(a_hz - b_hz) <= 1e-9 * std::max(std::abs(a_hz), std::abs(b_hz));
}

std::string_view to_string(CodeKind kind) noexcept {
  return kind == CodeKind::Jfpm ? "JFPM" : "WHITE_NOISE";
}

std::string_view to_string(CodeStage stage) noexcept {
  switch (stage) {
    case CodeStage::RawPool: return "RAW_POOL";
    case CodeStage::GroupOptimized: return "GROUP_OPTIMIZED";
    case CodeStage::Personal: return "PERSONAL";
  }
  return "RAW_POOL";
}

CodeKind parse_code_kind(std::string_view text) {
  if (text == "JFPM") return CodeKind::Jfpm;
  if (text == "WHITE_NOISE") return CodeKind::WhiteNoise;
  fail(Errc::InvalidConfig, "unknown code kind '" + std::string(text) + "'");
}

CodeStage parse_code_stage(std::string_view text) {
  if (text == "RAW_POOL") return CodeStage::RawPool;
  if (text == "GROUP_OPTIMIZED") return CodeStage::GroupOptimized;
  if (text == "PERSONAL") return CodeStage::Personal;
  fail(Errc::InvalidConfig, "unknown code stage '" + std::string(text) + "'");
}

const StimulusCode& CodeSet::by_class(int class_id) const {
  for (const auto& code : codes) {
    if (code.class_id == class_id) return code;
  }
  fail(Errc::UnknownClass, "class " + std::to_string(class_id) + " not in code set");
}

std::vector<int> CodeSet::class_ids() const {
  std::vector<int> ids;
  ids.reserve(codes.size());
  for (const auto& code : codes) ids.push_back(code.class_id);
  return ids;
}

void validate(const CodeSet& set, bool allow_raw) {
  std::set<int> seen;
  for (const auto& code : set.codes) {
    if (code.class_id < 0) fail(Errc::InvalidParam, "negative class id");
    if (!seen.insert(code.class_id).second) {
      fail(Errc::InvalidParam, "duplicate class id " + std::to_string(code.class_id));
    }
    if (code.values.empty()) fail(Errc::InvalidParam, "empty stimulus code");
    if (!same_rate(code.frame_rate_hz, set.frame_rate_hz())) {
      fail(Errc::InvalidParam, "codes disagree on frame rate");
    }
    if (code.values.size() != set.length()) fail(Errc::InvalidParam, "codes disagree on length");
    if (code.kind == CodeKind::WhiteNoise && !code.seed) {
      fail(Errc::InvalidParam, "white-noise code without seed");
    }
    if (!allow_raw) {
      for (double v : code.values) {
        if (!(v >= 0.0 && v <= 1.0)) fail(Errc::InvalidParam, "code value outside [0,1]");
      }
    }
  }
}

std::size_t frame_count(double duration_s, double frame_rate_hz) {
  if (!(duration_s > 0.0) || !(frame_rate_hz > 0.0)) {
    fail(Errc::InvalidParam, "duration and frame rate must be positive");
  }
  const double exact = duration_s * frame_rate_hz;
  const double rounded = std::round(exact);
  if (rounded < 1.0) fail(Errc::InvalidParam, "duration shorter than one frame");
  if (std::abs(exact - rounded) > 1e-9 * std::max(1.0, exact)) {
    warn("duration " + std::to_string(duration_s) + " s is not a whole number of frames; using " +
         std::to_string(static_cast<long long>(rounded)) + " frames");
  }
  return static_cast<std::size_t>(rounded);
}

double jfpm_raw_value(const JfpmParams& p, int target, std::size_t frame) {
  const double freq = p.f0_hz + (target - 1) * p.delta_f_hz;
  const double phase = p.phi0_rad + (target - 1) * p.delta_phi_rad;
  const double t = static_cast<double>(frame) / p.frame_rate_hz;
  return std::sin(2.0 * std::numbers::pi * freq * t + phase);
}

CodeSet generate_jfpm(const JfpmParams& p, bool raw) {
  if (p.n_targets < 1) fail(Errc::InvalidParam, "n_targets must be >= 1");
  if (!(p.frame_rate_hz > 0.0)) fail(Errc::InvalidParam, "frame rate must be positive");
  const double f_high = p.f0_hz + (p.n_targets - 1) * p.delta_f_hz;
  const double f_low = std::min(p.f0_hz, f_high);
  if (f_low < 0.0) fail(Errc::InvalidParam, "negative target frequency");
  if (std::max(p.f0_hz, f_high) >= p.frame_rate_hz / 2.0) {
    fail(Errc::NyquistViolation, "highest target frequency " + std::to_string(f_high) +
                                     " Hz reaches the Nyquist limit of the frame rate");
  }
  const std::size_t length = frame_count(p.duration_s, p.frame_rate_hz);

  CodeSet set;
  set.stage = CodeStage::RawPool;
  set.codes.reserve(static_cast<std::size_t>(p.n_targets));
  for (int n = 1; n <= p.n_targets; ++n) {
    StimulusCode code;
    code.class_id = n - 1;
    code.frame_rate_hz = p.frame_rate_hz;
    code.kind = CodeKind::Jfpm;
    code.values.resize(length);
    for (std::size_t k = 0; k < length; ++k) {
      const double x = jfpm_raw_value(p, n, k);
      code.values[k] = raw ? x : 0.5 * (1.0 + x);
    }
    set.codes.push_back(std::move(code));
  }
  set.params = {{"n_targets", p.n_targets},       {"f0_hz", p.f0_hz},
                {"delta_f_hz", p.delta_f_hz},     {"phi0_rad", p.phi0_rad},
                {"delta_phi_rad", p.delta_phi_rad}, {"duration_s", p.duration_s},
                {"mapping", raw ? "raw" : "luminance"}};
  return set;
}

double white_noise_value(std::uint64_t seed, int class_id, std::size_t frame) {
  const auto key = stream_key(seed, static_cast<std::uint64_t>(class_id));
  return to_unit_interval(counter_word(key, frame));
}

CodeSet generate_white_noise(int n_classes, double frame_rate_hz, double duration_s,
                             std::uint64_t seed) {
  if (n_classes < 1) fail(Errc::InvalidParam, "n_classes must be >= 1");
  const std::size_t length = frame_count(duration_s, frame_rate_hz);

  CodeSet set;
  set.stage = CodeStage::RawPool;
  set.codes.resize(static_cast<std::size_t>(n_classes));
  for (int c = 0; c < n_classes; ++c) {
    auto& code = set.codes[static_cast<std::size_t>(c)];
    code.class_id = c;
    code.frame_rate_hz = frame_rate_hz;
    code.kind = CodeKind::WhiteNoise;
    code.seed = seed;
    code.values.resize(length);
    const auto key = stream_key(seed, static_cast<std::uint64_t>(c));
    for (std::size_t k = 0; k < length; ++k) code.values[k] = to_unit_interval(counter_word(key, k));
  }
  set.params = {{"n_classes", n_classes}, {"duration_s", duration_s}, {"seed", seed}};
  return set;
}

Signal upsample_to_signal(const StimulusCode& code, double sample_rate_hz) {
  if (!(code.frame_rate_hz > 0.0) || !(sample_rate_hz > 0.0)) {
    fail(Errc::InvalidParam, "rates must be positive");
  }
  const double ratio = sample_rate_hz / code.frame_rate_hz;
  const double whole = std::round(ratio);
  if (whole < 1.0 || std::abs(ratio - whole) > 1e-9) {
    fail(Errc::InvalidParam, "sample rate " + std::to_string(sample_rate_hz) +
                                 " Hz is not an integer multiple of frame rate " +
                                 std::to_string(code.frame_rate_hz) + " Hz");
  }
  const auto hold = static_cast<std::size_t>(whole);
  Signal out;
  out.sample_rate_hz = sample_rate_hz;
  out.samples.reserve(code.values.size() * hold);
  for (double v : code.values) out.samples.insert(out.samples.end(), hold, v);
  return out;
}

Signal stimulus_epoch(const StimulusCode& code, double sample_rate_hz, std::size_t n_samples) {
  Signal out = upsample_to_signal(code, sample_rate_hz);
  out.samples.resize(n_samples, 0.0);
  return out;
}

}  // namespace veplab
