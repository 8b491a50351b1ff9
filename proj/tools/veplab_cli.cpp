#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "veplab/capacity.hpp"
#include "veplab/decoder.hpp"
#include "veplab/encoder.hpp"
#include "veplab/error.hpp"
#include "veplab/io.hpp"
#include "veplab/kernels.hpp"
#include "veplab/optimizer.hpp"
#include "veplab/pipeline.hpp"
#include "veplab/simulator.hpp"
#include "veplab/stimgen.hpp"

namespace fs = std::filesystem;
using namespace veplab;
using io::Json;

namespace {

// "lo:hi" in Hz.
Band parse_band(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) fail(Errc::InvalidParam, "band must look like lo:hi, got '" + text + "'");
  try {
    return {io::parse_double(text.substr(0, colon)), io::parse_double(text.substr(colon + 1))};
  } catch (const Error&) {
    fail(Errc::InvalidParam, "band must look like lo:hi, got '" + text + "'");
  }
}

std::vector<double> model_weights(const fs::path& model_path, int component) {
  return io::model_from_json(io::read_json(model_path)).component_weights(component);
}

std::vector<TrainingPair> training_pairs(const Recording& rec, const CodeSet& codes, std::span<const double> weights) {
  std::vector<TrainingPair> pairs;
  pairs.reserve(rec.n_trials());
  for (std::size_t i = 0; i < rec.n_trials(); ++i) {
    const auto& code = codes.by_class(static_cast<int>(rec.labels()[i]));
    pairs.push_back({stimulus_epoch(code, rec.sample_rate_hz(), rec.n_samples()),
                     Signal{rec.component(i, weights), rec.sample_rate_hz()}});
  }
  return pairs;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
  } else {
    io::write_text(text, out);
  }
}

void emit_json(const Json& j, const std::string& out) { emit(j.dump(2) + "\n", out); }

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void configure_threads(int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("VEPLAB_THREADS"); env != nullptr && *env != '\0') {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        fail(Errc::InvalidConfig, std::string("VEPLAB_THREADS is not an integer: ") + env);
      }
      if (threads <= 0) fail(Errc::InvalidConfig, "VEPLAB_THREADS must be positive");
    }
  }
  if (threads > 0) kernels::set_thread_count(threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"veplab: visual evoked potential channel toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (falls back to VEPLAB_THREADS)")->check(CLI::PositiveNumber);

  // gen-jfpm
  JfpmParams jfpm;
  bool jfpm_raw = false;
  std::string jfpm_out;
  auto* gen_jfpm = app.add_subcommand("gen-jfpm", "Joint frequency-phase modulated codes");
  gen_jfpm->add_option("--targets", jfpm.n_targets);
  gen_jfpm->add_option("--f0", jfpm.f0_hz, "Base frequency (Hz)");
  gen_jfpm->add_option("--df", jfpm.delta_f_hz, "Frequency step (Hz)");
  gen_jfpm->add_option("--phi0", jfpm.phi0_rad, "Base phase (rad)");
  gen_jfpm->add_option("--dphi", jfpm.delta_phi_rad, "Phase step (rad)");
  gen_jfpm->add_option("--frame-rate", jfpm.frame_rate_hz);
  gen_jfpm->add_option("--duration", jfpm.duration_s);
  gen_jfpm->add_flag("--raw", jfpm_raw, "Write sin values in [-1, 1] instead of luminance");
  gen_jfpm->add_option("--out", jfpm_out, "Code CSV path")->required();

  // gen-wn
  std::size_t wn_n = 160;
  double wn_rate = 60.0, wn_duration = 1.0;
  std::uint64_t wn_seed = 0;
  std::string wn_out;
  auto* gen_wn = app.add_subcommand("gen-wn", "Uniform white-noise codes");
  gen_wn->add_option("--n", wn_n, "Number of codes");
  gen_wn->add_option("--frame-rate", wn_rate);
  gen_wn->add_option("--duration", wn_duration);
  gen_wn->add_option("--seed", wn_seed);
  gen_wn->add_option("--out", wn_out)->required();

  // simulate
  std::string sim_config, sim_codes, sim_out, sim_truth;
  auto* simulate = app.add_subcommand("simulate", "Synthetic recording from a SimConfig");
  simulate->add_option("--config", sim_config, "SimConfig JSON")->required();
  simulate->add_option("--codes", sim_codes)->required();
  simulate->add_option("--out", sim_out, "Recording path")->required();
  simulate->add_option("--truth", sim_truth, "Ground-truth JSON path");

  // fit-trf
  std::string fit_rec, fit_codes, fit_weights, fit_out;
  int fit_component = 0;
  double fit_lag_min = 0.0, fit_lag_max = 0.3;
  std::optional<double> fit_lambda;
  auto* fit = app.add_subcommand("fit-trf", "Ridge TRF from a recording and its codes");
  fit->add_option("--rec", fit_rec)->required();
  fit->add_option("--codes", fit_codes)->required();
  fit->add_option("--weights", fit_weights, "Model JSON supplying the spatial filter")->required();
  fit->add_option("--component", fit_component);
  fit->add_option("--lag-min", fit_lag_min, "Seconds");
  fit->add_option("--lag-max", fit_lag_max, "Seconds");
  fit->add_option("--lambda", fit_lambda, "Ridge parameter (default relative 1e-3)");
  fit->add_option("--out", fit_out)->required();

  // predict
  std::string pred_trf, pred_codes, pred_out;
  std::size_t pred_samples = 0;
  auto* predict = app.add_subcommand("predict", "TRF-predicted responses per code");
  predict->add_option("--trf", pred_trf)->required();
  predict->add_option("--codes", pred_codes)->required();
  predict->add_option("--samples", pred_samples, "Epoch length (default: code duration)");
  predict->add_option("--out", pred_out, "CSV path (default stdout)");

  // reconstruct
  std::string rec_trf, rec_rec, rec_weights, rec_out, rec_band;
  int rec_component = 0;
  double rec_lambda = 0.0;
  auto* reconstruct = app.add_subcommand("reconstruct", "Wiener stimulus reconstruction per trial");
  reconstruct->add_option("--trf", rec_trf)->required();
  reconstruct->add_option("--rec", rec_rec)->required();
  reconstruct->add_option("--weights", rec_weights)->required();
  reconstruct->add_option("--component", rec_component);
  reconstruct->add_option("--lambda", rec_lambda);
  reconstruct->add_option("--band", rec_band, "lo:hi, bins checked for invertibility");
  reconstruct->add_option("--out", rec_out);

  // decompose
  std::string dec_trf, dec_rec, dec_codes, dec_weights, dec_out;
  int dec_component = 0;
  auto* decompose = app.add_subcommand("decompose", "Split responses into linear and nonlinear parts");
  decompose->add_option("--trf", dec_trf)->required();
  decompose->add_option("--rec", dec_rec)->required();
  decompose->add_option("--codes", dec_codes)->required();
  decompose->add_option("--weights", dec_weights)->required();
  decompose->add_option("--component", dec_component);
  decompose->add_option("--out", dec_out);

  // capacity
  std::string cap_method = "upper", cap_band = "1:30", cap_rec, cap_weights, cap_trf, cap_codes, cap_out;
  int cap_component = 0;
  double cap_snr_max = 1e6;
  std::optional<double> cap_lambda;
  bool cap_same_data = false;
  auto* capacity = app.add_subcommand("capacity", "Upper or lower bound on mutual information");
  capacity->add_option("--method", cap_method)->check(CLI::IsMember({"upper", "lower"}));
  capacity->add_option("--band", cap_band, "lo:hi in Hz");
  capacity->add_option("--rec", cap_rec)->required();
  capacity->add_option("--weights", cap_weights, "Model JSON")->required();
  capacity->add_option("--component", cap_component);
  capacity->add_option("--trf", cap_trf, "TRF JSON (lower)");
  capacity->add_option("--codes", cap_codes, "Code CSV (lower)");
  capacity->add_option("--lambda", cap_lambda, "Wiener lambda (default 1e-3 max|H|^2)");
  capacity->add_option("--snr-max", cap_snr_max);
  capacity->add_flag("--allow-same-data", cap_same_data, "Accept a TRF fitted on this recording");
  capacity->add_option("--out", cap_out);

  // train
  std::string train_rec, train_out;
  int train_components = kDefaultComponents;
  double train_gamma = kDefaultShrinkage;
  std::optional<double> train_window;
  auto* train = app.add_subcommand("train", "Fit the spatial filters and templates");
  train->add_option("--rec", train_rec)->required();
  train->add_option("--components", train_components);
  train->add_option("--gamma", train_gamma);
  train->add_option("--window", train_window, "Seconds (default whole trial)");
  train->add_option("--out", train_out)->required();

  // classify
  std::string cls_model, cls_rec, cls_out;
  double cls_window = 0.0;
  auto* classify_cmd = app.add_subcommand("classify", "Predict the class of every trial");
  classify_cmd->add_option("--model", cls_model)->required();
  classify_cmd->add_option("--rec", cls_rec)->required();
  classify_cmd->add_option("--window", cls_window, "Seconds (default model window)");
  classify_cmd->add_option("--out", cls_out);

  // evaluate
  std::string ev_model, ev_rec, ev_out;
  double ev_window = 0.0;
  std::size_t ev_blocks = 0;
  int ev_components = kDefaultComponents;
  double ev_gamma = kDefaultShrinkage;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Accuracy and confusion matrix");
  evaluate_cmd->add_option("--model", ev_model, "Trained model (omit with --cv-blocks)");
  evaluate_cmd->add_option("--rec", ev_rec)->required();
  evaluate_cmd->add_option("--window", ev_window, "Seconds");
  evaluate_cmd->add_option("--cv-blocks", ev_blocks, "Leave-one-block-out instead of a fixed model");
  evaluate_cmd->add_option("--components", ev_components);
  evaluate_cmd->add_option("--gamma", ev_gamma);
  evaluate_cmd->add_option("--out", ev_out);

  // itr
  int itr_classes = 40;
  std::vector<double> itr_acc, itr_time;
  double itr_gaze = 0.5;
  auto* itr_cmd = app.add_subcommand("itr", "Information transfer rate table");
  itr_cmd->add_option("--classes", itr_classes);
  itr_cmd->add_option("--accuracy", itr_acc, "One or more accuracies in [0, 1]")->required();
  itr_cmd->add_option("--time", itr_time, "Stimulation time(s) in seconds")->required();
  itr_cmd->add_option("--gaze", itr_gaze, "Gaze-shift time in seconds");

  // optimize-group
  std::string og_pool, og_trf, og_out, og_trace;
  SaConfig sa;
  std::optional<double> og_t0;
  auto* opt_group = app.add_subcommand("optimize-group", "Annealed subset with maximal minimum distance");
  opt_group->add_option("--pool", og_pool)->required();
  opt_group->add_option("--trf", og_trf)->required();
  opt_group->add_option("--select", sa.select_size);
  opt_group->add_option("--iters", sa.iterations);
  opt_group->add_option("--restarts", sa.restarts);
  opt_group->add_option("--cooling", sa.cooling);
  opt_group->add_option("--t0", og_t0, "Initial temperature");
  opt_group->add_option("--seed", sa.seed);
  opt_group->add_option("--out", og_out)->required();
  opt_group->add_option("--trace", og_trace, "Trace JSON (default next to --out)");

  // optimize-personal
  std::string op_rec, op_model, op_codes, op_out, op_trace;
  std::size_t op_subset = 40, op_samples = 10000;
  std::uint64_t op_seed = 0;
  std::optional<double> op_window;
  auto* opt_personal = app.add_subcommand("optimize-personal", "Best random subset by decoding accuracy");
  opt_personal->add_option("--rec", op_rec)->required();
  opt_personal->add_option("--model", op_model)->required();
  opt_personal->add_option("--codes", op_codes, "Group code set the model was trained on")->required();
  opt_personal->add_option("--subset", op_subset);
  opt_personal->add_option("--samples", op_samples);
  opt_personal->add_option("--seed", op_seed);
  opt_personal->add_option("--window", op_window);
  opt_personal->add_option("--out", op_out)->required();
  opt_personal->add_option("--trace", op_trace);

  // run
  std::string run_config, run_out;
  auto* run = app.add_subcommand("run", "End-to-end pipeline");
  run->add_option("--config", run_config, "Pipeline config JSON (default: built-in)");
  run->add_option("--out", run_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(Errc::InvalidConfig);
  }

  try {
    configure_threads(threads);

    if (*gen_jfpm) {
      io::write_codeset(generate_jfpm(jfpm, jfpm_raw), jfpm_out);
    } else if (*gen_wn) {
      io::write_codeset(generate_white_noise(wn_n, wn_rate, wn_duration, wn_seed), wn_out);
    } else if (*simulate) {
      const auto config = io::sim_config_from_json(io::read_json(sim_config));
      const auto sim = simulate_recording(config, io::read_codeset(sim_codes));
      io::write_recording(sim.recording, sim_out);
      if (!sim_truth.empty()) io::write_json(io::truth_to_json(config, sim.truth), sim_truth);
    } else if (*fit) {
      const auto rec = io::read_recording(fit_rec);
      const auto pairs = training_pairs(rec, io::read_codeset(fit_codes), model_weights(fit_weights, fit_component));
      auto trf = fit_trf(pairs, LagWindow::from_seconds(fit_lag_min, fit_lag_max, rec.sample_rate_hz()), fit_lambda);
      trf.fit_source = recording_fingerprint(rec);
      io::write_json(io::to_json(trf), fit_out);
    } else if (*predict) {
      const auto trf = io::trf_from_json(io::read_json(pred_trf));
      const auto codes = io::read_codeset(pred_codes);
      std::string csv = "class_id,sample_index,value\n";
      for (const auto& code : codes.codes) {
        const std::size_t n = pred_samples > 0 ? pred_samples
                                               : static_cast<std::size_t>(std::llround(
                                                     code.values.size() * trf.sample_rate_hz / code.frame_rate_hz));
        const auto r = predict_response(trf, stimulus_epoch(code, trf.sample_rate_hz, n));
        for (std::size_t t = 0; t < r.samples.size(); ++t) {
          csv += std::to_string(code.class_id) + "," + std::to_string(t) + "," + io::format_double(r.samples[t]) + "\n";
        }
      }
      emit(csv, pred_out);
    } else if (*reconstruct) {
      const auto trf = io::trf_from_json(io::read_json(rec_trf));
      const auto rec = io::read_recording(rec_rec);
      const auto weights = model_weights(rec_weights, rec_component);
      std::optional<std::pair<double, double>> band;
      if (!rec_band.empty()) {
        const auto b = parse_band(rec_band);
        band = std::make_pair(b.lo_hz, b.hi_hz);
      }
      std::string csv = "trial,class_id,sample_index,value\n";
      for (std::size_t i = 0; i < rec.n_trials(); ++i) {
        const auto s = reconstruct_stimulus(trf, Signal{rec.component(i, weights), rec.sample_rate_hz()}, rec_lambda, band);
        for (std::size_t t = 0; t < s.samples.size(); ++t) {
          csv += std::to_string(i) + "," + std::to_string(rec.labels()[i]) + "," + std::to_string(t) + "," +
                 io::format_double(s.samples[t]) + "\n";
        }
      }
      emit(csv, rec_out);
    } else if (*decompose) {
      const auto trf = io::trf_from_json(io::read_json(dec_trf));
      const auto rec = io::read_recording(dec_rec);
      const auto pairs = training_pairs(rec, io::read_codeset(dec_codes), model_weights(dec_weights, dec_component));
      std::string csv = "trial,sample_index,full,linear,nonlinear\n";
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto d = decompose_response(trf, pairs[i].stimulus, pairs[i].response);
        for (std::size_t t = 0; t < d.linear.samples.size(); ++t) {
          csv += std::to_string(i) + "," + std::to_string(t) + "," + io::format_double(pairs[i].response.samples[t]) + "," +
                 io::format_double(d.linear.samples[t]) + "," + io::format_double(d.nonlinear.samples[t]) + "\n";
        }
      }
      emit(csv, dec_out);
    } else if (*capacity) {
      const auto rec = io::read_recording(cap_rec);
      const auto weights = model_weights(cap_weights, cap_component);
      CapacityOptions opts;
      opts.band = parse_band(cap_band);
      opts.snr_max = cap_snr_max;
      opts.allow_same_data = cap_same_data;
      Json report;
      if (parse_bound_method(cap_method) == BoundMethod::Upper) {
        const auto snr = upper_bound_snr(rec, weights, opts);
        report = io::to_json(snr, mutual_information(snr));
      } else {
        if (cap_trf.empty() || cap_codes.empty()) fail(Errc::InvalidConfig, "lower bound needs --trf and --codes");
        const auto trf = io::trf_from_json(io::read_json(cap_trf));
        double lambda = 0.0;
        if (cap_lambda) {
          lambda = *cap_lambda;
        } else {
          for (const auto& h : trf.frequency_response(rec.n_samples())) lambda = std::max(lambda, std::norm(h));
          lambda *= 1e-3;
        }
        const auto snr = lower_bound_snr(rec, io::read_codeset(cap_codes), trf, weights, lambda, opts);
        report = io::to_json(snr, mutual_information(snr));
        report["wiener_lambda"] = lambda;
      }
      emit_json(report, cap_out);
    } else if (*train) {
      const auto model = train_tdca(io::read_recording(train_rec), train_components, train_gamma, train_window);
      io::write_json(io::to_json(model), train_out);
    } else if (*classify_cmd) {
      const auto model = io::model_from_json(io::read_json(cls_model));
      const auto rec = io::read_recording(cls_rec);
      const double window = cls_window > 0.0 ? cls_window : model.window_samples / model.sample_rate_hz;
      std::string csv = "trial,true_class,predicted_class,degenerate\n";
      for (std::size_t i = 0; i < rec.n_trials(); ++i) {
        const auto c = classify(model, rec.trial(i), window);
        csv += std::to_string(i) + "," + std::to_string(rec.labels()[i]) + "," + std::to_string(c.class_id) + "," +
               (c.degenerate ? "1" : "0") + "\n";
      }
      emit(csv, cls_out);
    } else if (*evaluate_cmd) {
      const auto rec = io::read_recording(ev_rec);
      Evaluation ev;
      if (ev_blocks > 0) {
        const double window = ev_window > 0.0 ? ev_window : rec.n_samples() / rec.sample_rate_hz();
        ev = cross_validate(rec, ev_blocks, ev_components, ev_gamma, window);
      } else {
        if (ev_model.empty()) fail(Errc::InvalidConfig, "evaluate needs --model or --cv-blocks");
        const auto model = io::model_from_json(io::read_json(ev_model));
        ev = evaluate(model, rec, ev_window > 0.0 ? ev_window : model.window_samples / model.sample_rate_hz);
      }
      Json confusion = Json::array();
      for (Eigen::Index r = 0; r < ev.confusion.rows(); ++r) {
        std::vector<double> row(ev.confusion.cols());
        for (Eigen::Index c = 0; c < ev.confusion.cols(); ++c) row[c] = ev.confusion(r, c);
        confusion.push_back(row);
      }
      emit_json({{"accuracy", ev.accuracy},
                 {"n_trials", ev.n_trials},
                 {"class_ids", ev.class_ids},
                 {"confusion", confusion},
                 {"predicted", ev.predicted}},
                ev_out);
    } else if (*itr_cmd) {
      if (itr_acc.size() != itr_time.size() && itr_acc.size() != 1 && itr_time.size() != 1) {
        fail(Errc::InvalidParam, "--accuracy and --time must have equal counts (or one of them a single value)");
      }
      const std::size_t rows = std::max(itr_acc.size(), itr_time.size());
      std::cout << "Time (s)\tAcc\tITR (bpm)\tITR*(bps)\n";
      for (std::size_t i = 0; i < rows; ++i) {
        const double p = itr_acc[itr_acc.size() == 1 ? 0 : i];
        const double t = itr_time[itr_time.size() == 1 ? 0 : i];
        const auto r = itr(itr_classes, p, t, itr_gaze);
        std::cout << fixed2(t) << '\t' << fixed2(100.0 * p) << "%\t" << fixed2(r.itr_bpm) << '\t' << fixed2(r.itr_star_bps)
                  << '\n';
      }
    } else if (*opt_group) {
      sa.initial_temp = og_t0;
      const auto pool = io::read_codeset(og_pool);
      const auto trf = io::trf_from_json(io::read_json(og_trf));
      const auto trace = sa_optimize(estimate_group_responses(trf, pool), sa);
      auto selected = select_codes(pool, trace.best_subset, CodeStage::GroupOptimized, trace.best_objective);
      selected.params["annealing"] = {
          {"seed", sa.seed}, {"iterations", sa.iterations}, {"restarts", sa.restarts}, {"cooling", sa.cooling}};
      io::write_codeset(selected, og_out);
      const fs::path trace_path = og_trace.empty() ? fs::path(og_out).replace_extension(".trace.json") : fs::path(og_trace);
      io::write_text(io::to_json(trace).dump() + "\n", trace_path);
    } else if (*opt_personal) {
      const auto rec = io::read_recording(op_rec);
      const auto model = io::model_from_json(io::read_json(op_model));
      const auto group = io::read_codeset(op_codes);
      const auto sel = personal_optimize(model, rec, op_subset, op_samples, op_seed, op_window);
      CodeSet chosen;
      chosen.stage = CodeStage::Personal;
      chosen.objective = sel.accuracy;
      chosen.params = group.params;
      chosen.params["personal"] = {{"samples", op_samples}, {"seed", op_seed}, {"sample_index", sel.sample_index}};
      for (int id : sel.class_ids) chosen.codes.push_back(group.by_class(id));
      io::write_codeset(chosen, op_out);
      const fs::path trace_path = op_trace.empty() ? fs::path(op_out).replace_extension(".trace.json") : fs::path(op_trace);
      io::write_text(io::to_json(sel).dump() + "\n", trace_path);
    } else if (*run) {
      const auto config = run_config.empty() ? PipelineConfig{} : pipeline_config_from_json(io::read_json(run_config));
      const auto report = run_pipeline(config, run_out);
      std::cout << "upper bound " << io::format_double(report.upper_bits, 6) << " bits/s, lower bound "
                << io::format_double(report.lower_bits, 6) << " bits/s\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const Json::exception& e) {
    std::cerr << "error: InvalidConfig: " << e.what() << '\n';
    return exit_code(Errc::InvalidConfig);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(Errc::IoFailure);
  }
  return 0;
}
