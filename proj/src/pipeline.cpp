#include "veplab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "veplab/capacity.hpp"
#include "veplab/decoder.hpp"
#include "veplab/encoder.hpp"
#include "veplab/error.hpp"
#include "veplab/io.hpp"
#include "veplab/optimizer.hpp"
#include "veplab/rng.hpp"
#include "veplab/simulator.hpp"
#include "veplab/stimgen.hpp"

namespace veplab {

using io::Json;

namespace {

template <typename T>
void read_key(const Json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

template <typename T>
void read_key(const Json& j, const char* key, std::optional<T>& target) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    target.reset();
  } else {
    target = j.at(key).get<T>();
  }
}

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

PipelineConfig pipeline_config_from_json(const Json& j) {
  io::reject_unknown_keys(j, {"schema_version", "seed", "simulation", "stimulus", "encoder", "capacity", "decoder", "optimizer"},
                          "pipeline config");
  PipelineConfig c;
  try {
    const int version = j.value("schema_version", PipelineConfig::kSchemaVersion);
    if (version != PipelineConfig::kSchemaVersion) {
      fail(Errc::InvalidConfig, "unsupported schema_version " + std::to_string(version));
    }
    read_key(j, "seed", c.seed);
    if (j.contains("simulation")) {
      const auto& s = j["simulation"];
      io::reject_unknown_keys(s, {"sample_rate_hz", "epoch_s", "n_channels", "n_blocks", "signal_gain", "colored_sigma",
                                  "noise_alpha_exponent", "alpha_amplitude", "alpha_freq_hz", "sensor_noise_sigma",
                                  "nonlinearity_gain"},
                              "simulation");
      auto& d = c.simulation;
      read_key(s, "sample_rate_hz", d.sample_rate_hz);
      read_key(s, "epoch_s", d.epoch_s);
      read_key(s, "n_channels", d.n_channels);
      read_key(s, "n_blocks", d.n_blocks);
      read_key(s, "signal_gain", d.signal_gain);
      read_key(s, "colored_sigma", d.colored_sigma);
      read_key(s, "noise_alpha_exponent", d.noise_alpha_exponent);
      read_key(s, "alpha_amplitude", d.alpha_amplitude);
      read_key(s, "alpha_freq_hz", d.alpha_freq_hz);
      read_key(s, "sensor_noise_sigma", d.sensor_noise_sigma);
      read_key(s, "nonlinearity_gain", d.nonlinearity_gain);
    }
    if (j.contains("stimulus")) {
      const auto& s = j["stimulus"];
      io::reject_unknown_keys(s, {"frame_rate_hz", "duration_s", "wn_pool_size", "jfpm_targets", "jfpm_f0_hz",
                                  "jfpm_delta_f_hz", "jfpm_phi0_rad", "jfpm_delta_phi_rad"},
                              "stimulus");
      auto& d = c.stimulus;
      read_key(s, "frame_rate_hz", d.frame_rate_hz);
      read_key(s, "duration_s", d.duration_s);
      read_key(s, "wn_pool_size", d.wn_pool_size);
      read_key(s, "jfpm_targets", d.jfpm_targets);
      read_key(s, "jfpm_f0_hz", d.jfpm_f0_hz);
      read_key(s, "jfpm_delta_f_hz", d.jfpm_delta_f_hz);
      read_key(s, "jfpm_phi0_rad", d.jfpm_phi0_rad);
      read_key(s, "jfpm_delta_phi_rad", d.jfpm_delta_phi_rad);
    }
    if (j.contains("encoder")) {
      const auto& s = j["encoder"];
      io::reject_unknown_keys(s, {"lag_min_s", "lag_max_s", "ridge_lambda"}, "encoder");
      read_key(s, "lag_min_s", c.encoder.lag_min_s);
      read_key(s, "lag_max_s", c.encoder.lag_max_s);
      read_key(s, "ridge_lambda", c.encoder.ridge_lambda);
    }
    if (j.contains("capacity")) {
      const auto& s = j["capacity"];
      io::reject_unknown_keys(s, {"band", "snr_max", "wiener_lambda"}, "capacity");
      if (s.contains("band")) {
        const auto band = s["band"].get<std::vector<double>>();
        if (band.size() != 2) fail(Errc::InvalidConfig, "capacity.band needs [lo, hi]");
        c.capacity.band_lo_hz = band[0];
        c.capacity.band_hi_hz = band[1];
      }
      read_key(s, "snr_max", c.capacity.snr_max);
      read_key(s, "wiener_lambda", c.capacity.wiener_lambda);
    }
    if (j.contains("decoder")) {
      const auto& s = j["decoder"];
      io::reject_unknown_keys(s, {"n_components", "gamma", "windows_s", "gaze_time_s"}, "decoder");
      read_key(s, "n_components", c.decoder.n_components);
      read_key(s, "gamma", c.decoder.gamma);
      read_key(s, "windows_s", c.decoder.windows_s);
      read_key(s, "gaze_time_s", c.decoder.gaze_time_s);
    }
    if (j.contains("optimizer")) {
      const auto& s = j["optimizer"];
      io::reject_unknown_keys(s, {"group_select", "iterations", "restarts", "cooling", "initial_temp", "personal_subset",
                                  "personal_samples"},
                              "optimizer");
      auto& d = c.optimizer;
      read_key(s, "group_select", d.group_select);
      read_key(s, "iterations", d.iterations);
      read_key(s, "restarts", d.restarts);
      read_key(s, "cooling", d.cooling);
      read_key(s, "initial_temp", d.initial_temp);
      read_key(s, "personal_subset", d.personal_subset);
      read_key(s, "personal_samples", d.personal_samples);
    }
  } catch (const Json::exception& e) {
    fail(Errc::InvalidConfig, std::string("pipeline config: ") + e.what());
  }
  if (c.simulation.n_blocks < 2) fail(Errc::InvalidConfig, "simulation.n_blocks must be at least 2");
  if (c.decoder.windows_s.empty()) fail(Errc::InvalidConfig, "decoder.windows_s is empty");
  return c;
}

Json to_json(const PipelineConfig& c) {
  Json j;
  j["schema_version"] = PipelineConfig::kSchemaVersion;
  j["seed"] = c.seed;
  const auto& s = c.simulation;
  j["simulation"] = {{"sample_rate_hz", s.sample_rate_hz},
                     {"epoch_s", s.epoch_s},
                     {"n_channels", s.n_channels},
                     {"n_blocks", s.n_blocks},
                     {"signal_gain", s.signal_gain},
                     {"colored_sigma", s.colored_sigma},
                     {"noise_alpha_exponent", s.noise_alpha_exponent},
                     {"alpha_amplitude", s.alpha_amplitude},
                     {"alpha_freq_hz", s.alpha_freq_hz},
                     {"sensor_noise_sigma", s.sensor_noise_sigma},
                     {"nonlinearity_gain", s.nonlinearity_gain}};
  const auto& st = c.stimulus;
  j["stimulus"] = {{"frame_rate_hz", st.frame_rate_hz},
                   {"duration_s", st.duration_s},
                   {"wn_pool_size", st.wn_pool_size},
                   {"jfpm_targets", st.jfpm_targets},
                   {"jfpm_f0_hz", st.jfpm_f0_hz},
                   {"jfpm_delta_f_hz", st.jfpm_delta_f_hz},
                   {"jfpm_phi0_rad", st.jfpm_phi0_rad},
                   {"jfpm_delta_phi_rad", st.jfpm_delta_phi_rad}};
  j["encoder"] = {{"lag_min_s", c.encoder.lag_min_s},
                  {"lag_max_s", c.encoder.lag_max_s},
                  {"ridge_lambda", optional_json(c.encoder.ridge_lambda)}};
  j["capacity"] = {{"band", {c.capacity.band_lo_hz, c.capacity.band_hi_hz}},
                   {"snr_max", c.capacity.snr_max},
                   {"wiener_lambda", optional_json(c.capacity.wiener_lambda)}};
  j["decoder"] = {{"n_components", c.decoder.n_components},
                  {"gamma", c.decoder.gamma},
                  {"windows_s", c.decoder.windows_s},
                  {"gaze_time_s", c.decoder.gaze_time_s}};
  const auto& o = c.optimizer;
  j["optimizer"] = {{"group_select", o.group_select},
                    {"iterations", o.iterations},
                    {"restarts", o.restarts},
                    {"cooling", o.cooling},
                    {"initial_temp", optional_json(o.initial_temp)},
                    {"personal_subset", o.personal_subset},
                    {"personal_samples", o.personal_samples}};
  return j;
}

namespace {

template <typename Fn>
auto run_stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), "stage '" + name + "': " + e.detail());
  }
}

SimConfig base_sim_config(const PipelineConfig& c, std::uint64_t seed) {
  const auto& s = c.simulation;
  SimConfig sim;
  sim.trf_true = vep_like_trf(s.sample_rate_hz, 0.3, 8.0, 0.06, s.signal_gain);
  const auto n_ch = static_cast<double>(s.n_channels);
  sim.mixing = gaussian_topography(s.n_channels, 0.6 * (n_ch - 1.0), std::max(1.0, n_ch / 4.0));
  sim.colored_sigma = s.colored_sigma;
  sim.noise_alpha_exponent = s.noise_alpha_exponent;
  sim.alpha_osc.freq_hz = s.alpha_freq_hz;
  sim.alpha_osc.amplitude = s.alpha_amplitude;
  sim.alpha_osc.topography = gaussian_topography(s.n_channels, 0.2 * (n_ch - 1.0), std::max(1.0, n_ch / 3.0));
  sim.sensor_noise_sigma = s.sensor_noise_sigma;
  sim.nonlinearity_gain = s.nonlinearity_gain;
  sim.n_blocks = s.n_blocks;
  sim.sample_rate_hz = s.sample_rate_hz;
  sim.epoch_s = s.epoch_s;
  sim.seed = seed;
  return sim;
}

struct HalfSplit {
  Recording train;
  Recording test;
};

HalfSplit split_blocks(const Recording& rec, int n_blocks) {
  const auto blocks = block_partition(rec.n_trials(), static_cast<std::size_t>(n_blocks));
  std::vector<std::size_t> train, test;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto& dst = b < blocks.size() / 2 ? train : test;
    dst.insert(dst.end(), blocks[b].begin(), blocks[b].end());
  }
  return {rec.subset(train), rec.subset(test)};
}

Json itr_table(const std::vector<std::pair<double, double>>& window_accuracy, int n_classes, double gaze_s,
               std::string& csv) {
  Json rows = Json::array();
  csv = "Time (s),Acc,ITR (bpm),ITR*(bps)\n";
  for (const auto& [window, acc] : window_accuracy) {
    const auto r = itr(n_classes, acc, window, gaze_s);
    rows.push_back({{"time_s", window}, {"accuracy", acc}, {"itr_bpm", r.itr_bpm}, {"itr_star_bps", r.itr_star_bps}});
    char line[128];
    std::snprintf(line, sizeof(line), "%.2f,%.2f%%,%.2f,%.2f\n", window, 100.0 * acc, r.itr_bpm, r.itr_star_bps);
    csv += line;
  }
  return rows;
}

}  // namespace

PipelineReport run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto& sim_cfg = config.simulation;
  const auto& dec = config.decoder;
  const int n_components = std::min<int>(dec.n_components, static_cast<int>(sim_cfg.n_channels));
  Json artifacts = Json::object();
  auto path_of = [&](const std::string& name) {
    artifacts[name] = name;
    return out_dir / name;
  };
  io::write_json(to_json(config), path_of("resolved_config.json"));

  const Json seeds = {{"master", config.seed},
                      {"wn_pool", stream_key(config.seed, 0)},
                      {"preliminary", stream_key(config.seed, 1)},
                      {"jfpm", stream_key(config.seed, 2)},
                      {"group", stream_key(config.seed, 3)},
                      {"personal_eval", stream_key(config.seed, 4)},
                      {"annealing", stream_key(config.seed, 5)},
                      {"personal_sampling", stream_key(config.seed, 6)}};

  // Stimuli.
  const auto [pool, jfpm] = run_stage("stimulus", [&] {
    const auto& st = config.stimulus;
    auto wn = generate_white_noise(st.wn_pool_size, st.frame_rate_hz, st.duration_s, seeds["wn_pool"].get<std::uint64_t>());
    JfpmParams jp;
    jp.n_targets = st.jfpm_targets;
    jp.f0_hz = st.jfpm_f0_hz;
    jp.delta_f_hz = st.jfpm_delta_f_hz;
    jp.phi0_rad = st.jfpm_phi0_rad;
    jp.delta_phi_rad = st.jfpm_delta_phi_rad;
    jp.frame_rate_hz = st.frame_rate_hz;
    jp.duration_s = st.duration_s;
    auto jf = generate_jfpm(jp);
    io::write_codeset(wn, path_of("codes_wn_pool.csv"));
    artifacts["codes_wn_pool.json"] = "codes_wn_pool.json";
    io::write_codeset(jf, path_of("codes_jfpm.csv"));
    artifacts["codes_jfpm.json"] = "codes_jfpm.json";
    return std::make_pair(std::move(wn), std::move(jf));
  });

  // Preliminary phase: responses to the raw WN pool.
  const auto preliminary = run_stage("simulate", [&] {
    auto sim = simulate_recording(base_sim_config(config, seeds["preliminary"].get<std::uint64_t>()), pool);
    io::write_recording(sim.recording, path_of("preliminary.veprec"));
    return std::move(sim.recording);
  });
  const auto prelim_split = split_blocks(preliminary, sim_cfg.n_blocks);

  const auto [prelim_model, trf] = run_stage("fit-trf", [&] {
    auto model = train_tdca(prelim_split.train, n_components, dec.gamma);
    io::write_json(io::to_json(model), path_of("model_preliminary.json"));
    const auto weights = model.component_weights(0);
    std::vector<TrainingPair> pairs;
    for (std::size_t i = 0; i < prelim_split.train.n_trials(); ++i) {
      const auto& code = pool.by_class(static_cast<int>(prelim_split.train.labels()[i]));
      pairs.push_back({stimulus_epoch(code, sim_cfg.sample_rate_hz, prelim_split.train.n_samples()),
                       Signal{prelim_split.train.component(i, weights), sim_cfg.sample_rate_hz}});
    }
    const auto lags = LagWindow::from_seconds(config.encoder.lag_min_s, config.encoder.lag_max_s, sim_cfg.sample_rate_hz);
    Trf fitted = fit_trf(pairs, lags, config.encoder.ridge_lambda);
    fitted.fit_source = recording_fingerprint(prelim_split.train);
    io::write_json(io::to_json(fitted), path_of("trf.json"));
    return std::make_pair(std::move(model), std::move(fitted));
  });

  PipelineReport report;
  run_stage("capacity", [&] {
    CapacityOptions opts;
    opts.band = {config.capacity.band_lo_hz, config.capacity.band_hi_hz};
    opts.snr_max = config.capacity.snr_max;
    const auto weights = prelim_model.component_weights(0);
    const auto upper = upper_bound_snr(prelim_split.test, weights, opts);
    const auto upper_info = mutual_information(upper);
    double lambda = 0.0;
    if (config.capacity.wiener_lambda) {
      lambda = *config.capacity.wiener_lambda;
    } else {
      double peak = 0.0;
      for (const auto& h : trf.frequency_response(prelim_split.test.n_samples())) peak = std::max(peak, std::norm(h));
      lambda = 1e-3 * peak;
    }
    const auto lower = lower_bound_snr(prelim_split.test, pool, trf, weights, lambda, opts);
    const auto lower_info = mutual_information(lower);
    auto upper_json = io::to_json(upper, upper_info);
    auto lower_json = io::to_json(lower, lower_info);
    lower_json["wiener_lambda"] = lambda;
    io::write_json(upper_json, path_of("capacity_upper.json"));
    io::write_json(lower_json, path_of("capacity_lower.json"));
    report.upper_bits = upper_info.bits_per_second;
    report.lower_bits = lower_info.bits_per_second;
    return 0;
  });

  auto sweep_windows = [&](const Recording& rec) {
    std::vector<std::pair<double, double>> out;
    for (double w : dec.windows_s) {
      out.emplace_back(w, cross_validate(rec, static_cast<std::size_t>(sim_cfg.n_blocks), n_components, dec.gamma, w).accuracy);
    }
    return out;
  };
  auto window_csv = [](const std::vector<std::pair<double, double>>& rows) {
    std::string csv = "window_s,accuracy\n";
    for (const auto& [w, a] : rows) csv += io::format_double(w) + "," + io::format_double(a) + "\n";
    return csv;
  };

  // Offline phase: both paradigms, leave-one-block-out over decoding windows.
  const auto [jfpm_acc, wn_pool_acc] = run_stage("evaluate", [&] {
    auto jfpm_sim = simulate_recording(base_sim_config(config, seeds["jfpm"].get<std::uint64_t>()), jfpm);
    io::write_recording(jfpm_sim.recording, path_of("jfpm.veprec"));
    auto jf = sweep_windows(jfpm_sim.recording);
    auto wn = sweep_windows(preliminary);
    io::write_text(window_csv(jf), path_of("evaluate_jfpm.csv"));
    io::write_text(window_csv(wn), path_of("evaluate_wn_pool.csv"));
    return std::make_pair(std::move(jf), std::move(wn));
  });

  const auto group = run_stage("optimize-group", [&] {
    const auto responses = estimate_group_responses(trf, pool);
    SaConfig sa;
    sa.iterations = config.optimizer.iterations;
    sa.initial_temp = config.optimizer.initial_temp;
    sa.cooling = config.optimizer.cooling;
    sa.restarts = config.optimizer.restarts;
    sa.seed = seeds["annealing"].get<std::uint64_t>();
    sa.select_size = config.optimizer.group_select;
    const auto trace = sa_optimize(responses, sa);
    auto selected = select_codes(pool, trace.best_subset, CodeStage::GroupOptimized, trace.best_objective);
    selected.params["annealing"] = {{"seed", sa.seed}, {"iterations", sa.iterations}, {"restarts", sa.restarts},
                                    {"cooling", sa.cooling}};
    io::write_codeset(selected, path_of("codes_group.csv"));
    artifacts["codes_group.json"] = "codes_group.json";
    io::write_text(io::to_json(trace).dump() + "\n", path_of("group_trace.json"));
    return selected;
  });

  const auto personal = run_stage("optimize-personal", [&] {
    auto sim = simulate_recording(base_sim_config(config, seeds["group"].get<std::uint64_t>()), group);
    io::write_recording(sim.recording, path_of("group.veprec"));
    const auto split = split_blocks(sim.recording, sim_cfg.n_blocks);
    const auto model = train_tdca(split.train, n_components, dec.gamma);
    io::write_json(io::to_json(model), path_of("model_group.json"));
    const auto sel = personal_optimize(model, split.test, config.optimizer.personal_subset,
                                       config.optimizer.personal_samples, seeds["personal_sampling"].get<std::uint64_t>());
    CodeSet chosen;
    chosen.stage = CodeStage::Personal;
    chosen.objective = sel.accuracy;
    chosen.params = group.params;
    chosen.params["personal"] = {{"samples", config.optimizer.personal_samples},
                                 {"seed", seeds["personal_sampling"]},
                                 {"sample_index", sel.sample_index}};
    for (int id : sel.class_ids) chosen.codes.push_back(group.by_class(id));
    io::write_codeset(chosen, path_of("codes_personal.csv"));
    artifacts["codes_personal.json"] = "codes_personal.json";
    io::write_text(io::to_json(sel).dump() + "\n", path_of("personal_trace.json"));
    return chosen;
  });

  run_stage("itr", [&] {
    auto sim = simulate_recording(base_sim_config(config, seeds["personal_eval"].get<std::uint64_t>()), personal);
    io::write_recording(sim.recording, path_of("personal.veprec"));
    const auto wn_acc = sweep_windows(sim.recording);
    io::write_text(window_csv(wn_acc), path_of("evaluate_wn_personal.csv"));
    std::string jfpm_csv, wn_csv;
    const auto jfpm_rows = itr_table(jfpm_acc, static_cast<int>(jfpm.size()), dec.gaze_time_s, jfpm_csv);
    const auto wn_rows = itr_table(wn_acc, static_cast<int>(personal.size()), dec.gaze_time_s, wn_csv);
    io::write_text(jfpm_csv, path_of("itr_jfpm.csv"));
    io::write_text(wn_csv, path_of("itr_wn.csv"));
    report.bundle["itr"] = {{"jfpm", jfpm_rows}, {"wn", wn_rows}};
    return 0;
  });

  Json wn_pool_rows = Json::array();
  for (const auto& [w, a] : wn_pool_acc) wn_pool_rows.push_back({{"window_s", w}, {"accuracy", a}});
  report.bundle["schema_version"] = PipelineConfig::kSchemaVersion;
  report.bundle["seeds"] = seeds;
  report.bundle["capacity"] = {{"upper_bits_per_second", report.upper_bits},
                               {"lower_bits_per_second", report.lower_bits},
                               {"lower_within_upper_5pct", report.lower_bits <= 1.05 * report.upper_bits}};
  report.bundle["wn_pool_accuracy"] = wn_pool_rows;
  report.bundle["group_objective"] = group.objective.value_or(0.0);
  report.bundle["personal_accuracy"] = personal.objective.value_or(0.0);
  artifacts["bundle.json"] = "bundle.json";
  report.bundle["artifacts"] = artifacts;
  io::write_json(report.bundle, out_dir / "bundle.json");
  return report;
}

}  // namespace veplab
