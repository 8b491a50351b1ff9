#include "veplab/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "veplab/error.hpp"
#include "veplab/rng.hpp"

namespace veplab::io {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[offset + static_cast<std::size_t>(b)]) << (8 * b);
  return v;
}

double get_f64(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes[offset + static_cast<std::size_t>(b)]) << (8 * b);
  return std::bit_cast<double>(v);
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFULL) fail(Errc::InvalidParam, std::string(what) + " does not fit the VEPR header");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_recording(const Recording& recording) {
  recording.validate();
  std::vector<std::uint8_t> out;
  out.reserve(kRecordingHeaderBytes + 4 * recording.n_trials() + 8 * recording.data().size());
  for (char ch : {'V', 'E', 'P', 'R'}) out.push_back(static_cast<std::uint8_t>(ch));
  put_u32(out, kRecordingVersion);
  put_u32(out, checked_u32(recording.n_trials(), "n_trials"));
  put_u32(out, checked_u32(recording.n_channels(), "n_channels"));
  put_u32(out, checked_u32(recording.n_samples(), "n_samples"));
  put_f64(out, recording.sample_rate_hz());
  for (auto label : recording.labels()) put_u32(out, label);
  for (double v : recording.data()) put_f64(out, v);
  return out;
}

Recording decode_recording(std::span<const std::uint8_t> bytes) {
  constexpr std::array<std::uint8_t, 4> magic{'V', 'E', 'P', 'R'};
  for (std::size_t i = 0; i < magic.size(); ++i) {
    if (i >= bytes.size()) fail(Errc::TruncatedPayload, "file ends at byte offset " + std::to_string(bytes.size()) + " inside the magic");
    if (bytes[i] != magic[i]) fail(Errc::BadMagic, "expected \"VEPR\" at byte offset 0 (mismatch at offset " + std::to_string(i) + ")");
  }
  if (bytes.size() < kRecordingHeaderBytes) {
    fail(Errc::TruncatedPayload, "header truncated at byte offset " + std::to_string(bytes.size()) +
                                     " (needs " + std::to_string(kRecordingHeaderBytes) + ")");
  }
  const auto version = get_u32(bytes, 4);
  if (version != kRecordingVersion) {
    fail(Errc::VersionUnsupported, "version " + std::to_string(version) + " at byte offset 4");
  }
  const std::size_t n_trials = get_u32(bytes, 8);
  const std::size_t n_channels = get_u32(bytes, 12);
  const std::size_t n_samples = get_u32(bytes, 16);
  const double rate = get_f64(bytes, 20);
  const std::size_t label_bytes = 4 * n_trials;
  const std::size_t payload_values = n_trials * n_channels * n_samples;
  const std::size_t expected = kRecordingHeaderBytes + label_bytes + 8 * payload_values;
  if (bytes.size() < expected) {
    fail(Errc::TruncatedPayload, "data ends at byte offset " + std::to_string(bytes.size()) +
                                     ", expected " + std::to_string(expected) + " bytes");
  }
  if (bytes.size() > expected) {
    fail(Errc::TruncatedPayload, "unexpected trailing data after byte offset " + std::to_string(expected));
  }
  if (!(rate > 0.0)) fail(Errc::InvalidParam, "non-positive sample rate at byte offset 20");

  Recording rec(n_trials, n_channels, n_samples, rate);
  std::size_t offset = kRecordingHeaderBytes;
  for (std::size_t i = 0; i < n_trials; ++i, offset += 4) rec.labels()[i] = get_u32(bytes, offset);
  auto data = rec.data();
  for (std::size_t i = 0; i < payload_values; ++i, offset += 8) data[i] = get_f64(bytes, offset);
  return rec;
}

void write_recording(const Recording& recording, const std::filesystem::path& path) {
  const auto bytes = encode_recording(recording);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::IoFailure, "write failed for " + path.string());
}

Recording read_recording(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoFailure, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_recording(bytes);
}

std::string format_double(double value, int significant_digits) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general,
                                 significant_digits);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    fail(Errc::InvalidParam, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) fail(Errc::IoFailure, "write failed for " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoFailure, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail(Errc::InvalidConfig, path.string() + ": " + e.what());
  }
}

void write_json(const Json& j, const std::filesystem::path& path) { write_text(j.dump(2) + "\n", path); }

void reject_unknown_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view context) {
  if (!j.is_object()) fail(Errc::InvalidConfig, std::string(context) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) fail(Errc::InvalidConfig, "unknown key '" + key + "' in " + std::string(context));
  }
}

void write_codeset(const CodeSet& set, const std::filesystem::path& csv_path) {
  validate(set, true);
  std::string text = "class_id,frame_index,value\n";
  for (const auto& code : set.codes) {
    for (std::size_t k = 0; k < code.values.size(); ++k) {
      text += std::to_string(code.class_id);
      text += ',';
      text += std::to_string(k);
      text += ',';
      text += format_double(code.values[k]);
      text += '\n';
    }
  }
  write_text(text, csv_path);

  const bool wn = !set.codes.empty() && set.codes.front().kind == CodeKind::WhiteNoise;
  Json side;
  side["kind"] = set.codes.empty() ? "WHITE_NOISE" : std::string(to_string(set.codes.front().kind));
  side["frame_rate_hz"] = set.frame_rate_hz();
  side["seed"] = wn && set.codes.front().seed ? Json(*set.codes.front().seed) : Json(nullptr);
  side["stage"] = std::string(to_string(set.stage));
  side["objective"] = set.objective ? Json(*set.objective) : Json(nullptr);
  side["generator_name"] = wn ? kGeneratorName : "jfpm-sine";
  side["params"] = set.params;
  write_json(side, sidecar_path(csv_path));
}

CodeSet read_codeset(const std::filesystem::path& csv_path) {
  const Json side = read_json(sidecar_path(csv_path));
  reject_unknown_keys(side, {"kind", "frame_rate_hz", "seed", "stage", "objective", "generator_name", "params"},
                      "code-set sidecar");
  CodeSet set;
  const CodeKind kind = parse_code_kind(side.at("kind").get<std::string>());
  const double rate = side.at("frame_rate_hz").get<double>();
  std::optional<std::uint64_t> seed;
  if (side.contains("seed") && !side["seed"].is_null()) seed = side["seed"].get<std::uint64_t>();
  set.stage = parse_code_stage(side.at("stage").get<std::string>());
  if (side.contains("objective") && !side["objective"].is_null()) set.objective = side["objective"].get<double>();
  if (side.contains("params")) set.params = side["params"];

  std::ifstream in(csv_path);
  if (!in) fail(Errc::IoFailure, "cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line) || line != "class_id,frame_index,value") {
    fail(Errc::InvalidParam, csv_path.string() + ": expected header 'class_id,frame_index,value'");
  }
  std::map<int, std::size_t> slot;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      fail(Errc::InvalidParam, csv_path.string() + ":" + std::to_string(line_no) + ": malformed row");
    }
    const std::string_view view(line);
    int class_id = 0;
    std::size_t frame = 0;
    const auto r1 = std::from_chars(view.data(), view.data() + c1, class_id);
    const auto r2 = std::from_chars(view.data() + c1 + 1, view.data() + c2, frame);
    if (r1.ec != std::errc() || r2.ec != std::errc()) {
      fail(Errc::InvalidParam, csv_path.string() + ":" + std::to_string(line_no) + ": malformed index");
    }
    const double value = parse_double(view.substr(c2 + 1));
    auto [it, inserted] = slot.try_emplace(class_id, set.codes.size());
    if (inserted) {
      StimulusCode code;
      code.class_id = class_id;
      code.frame_rate_hz = rate;
      code.kind = kind;
      code.seed = seed;
      set.codes.push_back(std::move(code));
    }
    auto& values = set.codes[it->second].values;
    if (frame != values.size()) {
      fail(Errc::InvalidParam, csv_path.string() + ":" + std::to_string(line_no) + ": frames out of order");
    }
    values.push_back(value);
  }
  const bool raw = set.params.is_object() && set.params.value("mapping", "") == "raw";
  validate(set, raw);
  return set;
}

Json to_json(const Trf& trf) {
  Json j;
  j["sample_rate_hz"] = trf.sample_rate_hz;
  j["lag_min_s"] = trf.lag_min / trf.sample_rate_hz;
  j["lag_max_s"] = trf.lag_max() / trf.sample_rate_hz;
  j["ridge_lambda"] = trf.ridge_lambda;
  j["coeffs"] = trf.coeffs;
  j["fit_length"] = trf.fit_length;
  if (!trf.fit_source.empty()) j["fit_source"] = trf.fit_source;
  return j;
}

Trf trf_from_json(const Json& j) {
  reject_unknown_keys(j, {"sample_rate_hz", "lag_min_s", "lag_max_s", "ridge_lambda", "coeffs", "fit_length", "fit_source"},
                      "TRF");
  Trf trf;
  try {
    trf.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    trf.coeffs = j.at("coeffs").get<std::vector<double>>();
    trf.ridge_lambda = j.value("ridge_lambda", 0.0);
    if (!(trf.sample_rate_hz > 0.0)) fail(Errc::InvalidConfig, "TRF sample rate must be positive");
    trf.lag_min = static_cast<int>(std::lround(j.at("lag_min_s").get<double>() * trf.sample_rate_hz));
    const auto lag_max = static_cast<int>(std::lround(j.at("lag_max_s").get<double>() * trf.sample_rate_hz));
    if (trf.coeffs.empty() || lag_max - trf.lag_min + 1 != static_cast<int>(trf.coeffs.size())) {
      fail(Errc::InvalidConfig, "TRF lag range does not match the coefficient count");
    }
    trf.fit_length = j.value("fit_length", trf.coeffs.size());
    trf.fit_source = j.value("fit_source", "");
  } catch (const Json::exception& e) {
    fail(Errc::InvalidConfig, std::string("TRF: ") + e.what());
  }
  return trf;
}

namespace {

Json row_major(const Eigen::MatrixXd& m) {
  Json arr = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  }
  return arr;
}

}  // namespace

Json to_json(const DecoderModel& model) {
  Json j;
  j["n_components"] = model.n_components;
  j["gamma"] = model.shrinkage_gamma;
  j["n_channels"] = model.n_channels();
  j["weights"] = row_major(model.weights);
  j["eigenvalues"] = model.eigenvalues;
  Json templates = Json::array();
  for (std::size_t c = 0; c < model.class_ids.size(); ++c) {
    templates.push_back({{"class_id", model.class_ids[c]}, {"data", row_major(model.templates[c])}});
  }
  j["templates"] = templates;
  j["window"] = {{"samples", model.window_samples},
                 {"sample_rate_hz", model.sample_rate_hz},
                 {"window_s", static_cast<double>(model.window_samples) / model.sample_rate_hz}};
  return j;
}

DecoderModel model_from_json(const Json& j) {
  reject_unknown_keys(j, {"n_components", "gamma", "n_channels", "weights", "eigenvalues", "templates", "window"},
                      "decoder model");
  DecoderModel model;
  try {
    model.n_components = j.at("n_components").get<int>();
    model.shrinkage_gamma = j.at("gamma").get<double>();
    const auto n_ch = j.at("n_channels").get<std::size_t>();
    const auto w = j.at("weights").get<std::vector<double>>();
    const auto k = static_cast<std::size_t>(model.n_components);
    if (k < 1 || w.size() != n_ch * k) fail(Errc::InvalidConfig, "weights size differs from n_channels x n_components");
    model.weights.resize(static_cast<Eigen::Index>(n_ch), model.n_components);
    for (std::size_t r = 0; r < n_ch; ++r) {
      for (std::size_t c = 0; c < k; ++c) model.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = w[r * k + c];
    }
    model.eigenvalues = j.value("eigenvalues", std::vector<double>{});
    const auto& win = j.at("window");
    model.window_samples = win.at("samples").get<std::size_t>();
    model.sample_rate_hz = win.at("sample_rate_hz").get<double>();
    std::vector<std::pair<int, RowMatrix>> templates;
    for (const auto& t : j.at("templates")) {
      const auto data = t.at("data").get<std::vector<double>>();
      if (data.size() != k * model.window_samples) fail(Errc::InvalidConfig, "template size differs from components x window");
      RowMatrix m = Eigen::Map<const RowMatrix>(data.data(), static_cast<Eigen::Index>(k),
                                                static_cast<Eigen::Index>(model.window_samples));
      templates.emplace_back(t.at("class_id").get<int>(), std::move(m));
    }
    std::sort(templates.begin(), templates.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [id, m] : templates) {
      if (!model.class_ids.empty() && model.class_ids.back() == id) fail(Errc::InvalidConfig, "duplicate template class");
      model.class_ids.push_back(id);
      model.templates.push_back(std::move(m));
    }
  } catch (const Json::exception& e) {
    fail(Errc::InvalidConfig, std::string("decoder model: ") + e.what());
  }
  return model;
}

Json to_json(const SimConfig& c) {
  Json j;
  j["trf_true"] = to_json(c.trf_true);
  j["mixing"] = c.mixing;
  j["colored_sigma"] = c.colored_sigma;
  j["noise_alpha_exponent"] = c.noise_alpha_exponent;
  j["alpha_osc"] = {{"freq_hz", c.alpha_osc.freq_hz},
                    {"amplitude", c.alpha_osc.amplitude},
                    {"topography", c.alpha_osc.topography}};
  j["sensor_noise_sigma"] = c.sensor_noise_sigma;
  j["nonlinearity_gain"] = c.nonlinearity_gain;
  j["n_blocks"] = c.n_blocks;
  j["sample_rate_hz"] = c.sample_rate_hz;
  j["epoch_s"] = c.epoch_s;
  j["seed"] = c.seed;
  return j;
}

SimConfig sim_config_from_json(const Json& j) {
  reject_unknown_keys(j, {"trf_true", "mixing", "colored_sigma", "noise_alpha_exponent", "alpha_osc", "sensor_noise_sigma",
                          "nonlinearity_gain", "n_blocks", "sample_rate_hz", "epoch_s", "seed"},
                      "simulator config");
  SimConfig c;
  try {
    c.trf_true = trf_from_json(j.at("trf_true"));
    c.mixing = j.at("mixing").get<std::vector<double>>();
    c.colored_sigma = j.value("colored_sigma", c.colored_sigma);
    c.noise_alpha_exponent = j.value("noise_alpha_exponent", c.noise_alpha_exponent);
    if (j.contains("alpha_osc")) {
      const auto& a = j["alpha_osc"];
      reject_unknown_keys(a, {"freq_hz", "amplitude", "topography"}, "alpha_osc");
      c.alpha_osc.freq_hz = a.value("freq_hz", c.alpha_osc.freq_hz);
      c.alpha_osc.amplitude = a.value("amplitude", c.alpha_osc.amplitude);
      c.alpha_osc.topography = a.value("topography", std::vector<double>{});
    }
    c.sensor_noise_sigma = j.value("sensor_noise_sigma", c.sensor_noise_sigma);
    c.nonlinearity_gain = j.value("nonlinearity_gain", c.nonlinearity_gain);
    c.n_blocks = j.value("n_blocks", c.n_blocks);
    c.sample_rate_hz = j.value("sample_rate_hz", c.sample_rate_hz);
    c.epoch_s = j.value("epoch_s", c.epoch_s);
    c.seed = j.value("seed", c.seed);
  } catch (const Json::exception& e) {
    fail(Errc::InvalidConfig, std::string("simulator config: ") + e.what());
  }
  validate(c);
  return c;
}

Json to_json(const SpectralSnr& snr, const InfoReport& info) {
  Json j;
  j["method"] = std::string(to_string(snr.method));
  j["band"] = {snr.band.lo_hz, snr.band.hi_hz};
  j["bits_per_second"] = info.bits_per_second;
  j["n_trials_m"] = snr.n_trials_m;
  j["capped_bins"] = snr.capped_bins;
  j["zero_noise_bins"] = snr.zero_noise_bins;
  j["freqs"] = snr.freqs_hz;
  j["snr"] = snr.snr;
  return j;
}

Json truth_to_json(const SimConfig& config, const GroundTruth& truth) {
  Json clean = Json::array();
  for (std::size_t i = 0; i < truth.linear.size(); ++i) {
    std::vector<double> sum(truth.linear[i].size());
    for (std::size_t t = 0; t < sum.size(); ++t) sum[t] = truth.linear[i][t] + truth.nonlinear[i][t];
    clean.push_back(sum);
  }
  Json j;
  j["clean"] = clean;
  j["linear"] = truth.linear;
  j["nonlinear"] = truth.nonlinear;
  j["noise_psd_params"] = {{"colored_sigma", config.colored_sigma},
                           {"noise_alpha_exponent", config.noise_alpha_exponent},
                           {"alpha_freq_hz", config.alpha_osc.freq_hz},
                           {"alpha_amplitude", config.alpha_osc.amplitude},
                           {"sensor_noise_sigma", config.sensor_noise_sigma}};
  j["trf_true"] = to_json(config.trf_true);
  return j;
}

Json to_json(const OptimizationTrace& trace) {
  Json restarts = Json::array();
  for (const auto& r : trace.restarts) {
    Json objective = Json::array(), accepted = Json::array(), temperature = Json::array(), best = Json::array();
    for (const auto& s : r.steps) {
      objective.push_back(s.objective);
      accepted.push_back(s.accepted);
      temperature.push_back(s.temperature);
      best.push_back(s.best_objective);
    }
    restarts.push_back({{"initial_temp", r.initial_temp},
                        {"best_objective", r.best_objective},
                        {"best_subset", r.best_subset},
                        {"objective", objective},
                        {"accepted", accepted},
                        {"temperature", temperature},
                        {"best", best}});
  }
  return {{"best_restart", trace.best_restart},
          {"best_objective", trace.best_objective},
          {"best_subset", trace.best_subset},
          {"restarts", restarts}};
}

Json to_json(const PersonalSelection& selection) {
  return {{"class_ids", selection.class_ids},
          {"accuracy", selection.accuracy},
          {"sample_index", selection.sample_index},
          {"sampled_accuracies", selection.sampled_accuracies}};
}

}  // namespace veplab::io
