#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "support.hpp"
#include "veplab/rng.hpp"
#include "veplab/spectral.hpp"
#include "veplab/stimgen.hpp"

using namespace veplab;
using veplab::testing::error_code_of;
using veplab::testing::WarningCapture;

namespace {

double sample_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("jfpm onset frame is mid-grey") {
  JfpmParams p;
  CHECK(jfpm_raw_value(p, 1, 0) == 0.0);
  CHECK(generate_jfpm(p).codes[0].values[0] == 0.5);
}

TEST_CASE("jfpm first target, second frame matches high-precision values") {
  // sin(2*pi*8/60) evaluated with 30-digit arithmetic.
  JfpmParams p;
  const auto set = generate_jfpm(p);
  CHECK(jfpm_raw_value(p, 1, 1) == doctest::Approx(0.743144825477394235).epsilon(1e-15));
  CHECK(set.codes[0].values[1] == doctest::Approx(0.871572412738697118).epsilon(1e-15));
  CHECK(generate_jfpm(p, true).codes[0].values[1] == doctest::Approx(0.743144825477394235).epsilon(1e-15));
}

TEST_CASE("jfpm second target uses 8.2 Hz and a 0.35 pi phase offset") {
  JfpmParams p;
  // sin(2*pi*8.2*3/60 + 0.35*pi) with 30-digit arithmetic.
  CHECK(jfpm_raw_value(p, 2, 3) == doctest::Approx(-0.509041415750371300).epsilon(1e-14));
  const auto set = generate_jfpm(p);
  CHECK(set.codes[1].values[3] == doctest::Approx(0.245479292124814350).epsilon(1e-14));
  for (std::size_t k = 0; k < 60; ++k) {
    const double expected = std::sin(2.0 * std::numbers::pi * 8.2 * static_cast<double>(k) / 60.0 + 0.35 * std::numbers::pi);
    CHECK(jfpm_raw_value(p, 2, k) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("jfpm set layout and determinism") {
  JfpmParams p;
  const auto a = generate_jfpm(p);
  const auto b = generate_jfpm(p);
  REQUIRE(a.size() == 40);
  CHECK(a.length() == 60);
  CHECK(a.stage == CodeStage::RawPool);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.codes[i].class_id == static_cast<int>(i));
    CHECK(a.codes[i].kind == CodeKind::Jfpm);
    CHECK(a.codes[i].values == b.codes[i].values);
    for (double v : a.codes[i].values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  CHECK_NOTHROW(validate(a));
}

TEST_CASE("jfpm spectrum peaks at the design frequency") {
  JfpmParams p;
  p.duration_s = 5.0;  // 0.2 Hz bins
  const auto set = generate_jfpm(p);
  const double bin_hz = 1.0 / p.duration_s;
  for (int n = 1; n <= p.n_targets; ++n) {
    const auto centered = remove_mean(set.codes[n - 1].values);
    const auto spectrum = dft(centered);
    std::size_t peak = 1;
    for (std::size_t k = 1; k <= spectrum.size() / 2; ++k) {
      if (std::abs(spectrum[k]) > std::abs(spectrum[peak])) peak = k;
    }
    const double design = p.f0_hz + (n - 1) * p.delta_f_hz;
    CHECK(std::abs(static_cast<double>(peak) - design / bin_hz) <= 1.0);
  }
}

TEST_CASE("jfpm rejects frequencies at or above Nyquist") {
  JfpmParams p;
  p.f0_hz = 25.0;  // 25 + 39 * 0.2 = 32.8 Hz
  CHECK(error_code_of([&] { generate_jfpm(p); }) == Errc::NyquistViolation);
  p.n_targets = 1;
  p.f0_hz = 30.0;
  CHECK(error_code_of([&] { generate_jfpm(p); }) == Errc::NyquistViolation);
  p.f0_hz = 29.9;
  CHECK_NOTHROW(generate_jfpm(p));
}

TEST_CASE("jfpm rejects bad parameters") {
  JfpmParams p;
  p.duration_s = 0.0;
  CHECK(error_code_of([&] { generate_jfpm(p); }) == Errc::InvalidParam);
  p = {};
  p.frame_rate_hz = -60.0;
  CHECK(error_code_of([&] { generate_jfpm(p); }) == Errc::InvalidParam);
  p = {};
  p.n_targets = 0;
  CHECK(error_code_of([&] { generate_jfpm(p); }) == Errc::InvalidParam);
}

TEST_CASE("frame quantization rounds and warns") {
  WarningCapture warnings;
  CHECK(frame_count(0.51, 60.0) == 31);
  CHECK(warnings.messages.size() == 1);
  CHECK(frame_count(0.5, 60.0) == 30);
  CHECK(warnings.messages.size() == 1);
}

TEST_CASE("white noise generator matches the documented counter construction") {
  // Words computed independently from the documented algorithm with Python integers.
  CHECK(counter_word(stream_key(0, 0), 0) == 0xf05b41569c46c0c4ULL);
  CHECK(counter_word(stream_key(42, 3), 5) == 0xfac8ef2d1632b6faULL);
  CHECK(white_noise_value(0, 0, 0) == 0.9388924442721658);
  CHECK(white_noise_value(42, 3, 5) == 0.9796285138201692);
  CHECK(white_noise_value(7, 159, 59) == 0.9403309493798134);
  const auto set = generate_white_noise(160, 60.0, 1.0, 7);
  CHECK(set.codes[159].values[59] == 0.9403309493798134);
}

TEST_CASE("white noise pool layout and determinism") {
  const auto a = generate_white_noise(160, 60.0, 1.0, 11);
  const auto b = generate_white_noise(160, 60.0, 1.0, 11);
  const auto c = generate_white_noise(160, 60.0, 1.0, 12);
  REQUIRE(a.size() == 160);
  CHECK(a.length() == 60);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.codes[i].values == b.codes[i].values);
    CHECK(a.codes[i].values != c.codes[i].values);
    CHECK(a.codes[i].seed == std::optional<std::uint64_t>(11));
    CHECK(a.codes[i].kind == CodeKind::WhiteNoise);
  }
  CHECK_NOTHROW(validate(a));
  CHECK(error_code_of([] { generate_white_noise(0, 60.0, 1.0, 1); }) == Errc::InvalidParam);
}

TEST_CASE("white noise long-run mean") {
  const auto set = generate_white_noise(1, 100.0, 10000.0, 3);
  REQUIRE(set.length() == 1000000);
  double sum = 0.0;
  for (double v : set.codes[0].values) sum += v;
  CHECK(std::abs(sum / 1e6 - 0.5) < 0.01);
}

TEST_CASE("white noise codes of different classes are uncorrelated") {
  const auto set = generate_white_noise(20, 60.0, 100.0, 5);
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t j = i + 1; j < set.size(); ++j) {
      CHECK(std::abs(sample_pearson(set.codes[i].values, set.codes[j].values)) < 0.1);
    }
  }
}

TEST_CASE("zero-order hold upsampling") {
  StimulusCode code;
  code.frame_rate_hz = 60.0;
  code.values = {0.0, 1.0};
  CHECK(upsample_to_signal(code, 60.0).samples == code.values);
  CHECK(upsample_to_signal(code, 120.0).samples == std::vector<double>{0, 0, 1, 1});
  CHECK(upsample_to_signal(code, 120.0).sample_rate_hz == 120.0);
  code.values.assign(30, 0.5);
  CHECK(error_code_of([&] { upsample_to_signal(code, 1000.0); }) == Errc::InvalidParam);
  CHECK(error_code_of([&] { upsample_to_signal(code, 30.0); }) == Errc::InvalidParam);
}

TEST_CASE("stimulus epochs are padded or cut") {
  StimulusCode code;
  code.frame_rate_hz = 60.0;
  code.values = {0.25, 0.75};
  CHECK(stimulus_epoch(code, 120.0, 6).samples == std::vector<double>{0.25, 0.25, 0.75, 0.75, 0, 0});
  CHECK(stimulus_epoch(code, 120.0, 3).samples == std::vector<double>{0.25, 0.25, 0.75});
}

TEST_CASE("code set validation") {
  auto set = generate_white_noise(3, 60.0, 1.0, 1);
  set.codes[2].class_id = 0;
  CHECK(error_code_of([&] { validate(set); }) == Errc::InvalidParam);
  set = generate_white_noise(3, 60.0, 1.0, 1);
  set.codes[1].values.pop_back();
  CHECK(error_code_of([&] { validate(set); }) == Errc::InvalidParam);
  const auto raw = generate_jfpm(JfpmParams{}, true);
  CHECK(error_code_of([&] { validate(raw); }) == Errc::InvalidParam);
  CHECK_NOTHROW(validate(raw, true));
  CHECK(error_code_of([&] { set.by_class(99); }) == Errc::UnknownClass);
}

TEST_CASE("enum names round trip") {
  for (auto k : {CodeKind::Jfpm, CodeKind::WhiteNoise}) CHECK(parse_code_kind(to_string(k)) == k);
  for (auto s : {CodeStage::RawPool, CodeStage::GroupOptimized, CodeStage::Personal}) CHECK(parse_code_stage(to_string(s)) == s);
  CHECK(to_string(CodeKind::WhiteNoise) == "WHITE_NOISE");
  CHECK(to_string(CodeStage::GroupOptimized) == "GROUP_OPTIMIZED");
}
