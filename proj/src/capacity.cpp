#include "veplab/capacity.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "veplab/error.hpp"

namespace veplab {

std::string_view to_string(BoundMethod method) noexcept {
  return method == BoundMethod::Upper ? "upper" : "lower";
}

BoundMethod parse_bound_method(std::string_view text) {
  if (text == "upper" || text == "UPPER") return BoundMethod::Upper;
  if (text == "lower" || text == "LOWER") return BoundMethod::Lower;
  fail(Errc::InvalidConfig, "unknown bound method '" + std::string(text) + "'");
}

namespace {

void check_band(const Band& band, const std::vector<double>& freqs) {
  if (freqs.size() < 2) fail(Errc::BandOutOfRange, "frequency grid has fewer than two bins");
  const double df = freqs[1] - freqs[0];
  const double eps = 1e-9 * df;
  if (!(band.lo_hz < band.hi_hz) || band.lo_hz < freqs.front() - eps ||
      band.hi_hz > freqs.back() + df + eps) {
    fail(Errc::BandOutOfRange, "band [" + std::to_string(band.lo_hz) + ", " + std::to_string(band.hi_hz) +
                                   "] Hz outside grid [" + std::to_string(freqs.front()) + ", " +
                                   std::to_string(freqs.back()) + "] Hz");
  }
}

void check_weights(const Recording& recording, std::span<const double> weights) {
  if (weights.size() != recording.n_channels()) {
    fail(Errc::InvalidParam, "component weights have " + std::to_string(weights.size()) +
                                 " entries for " + std::to_string(recording.n_channels()) + " channels");
  }
}

std::vector<Complex> onesided(std::vector<Complex> full) {
  full.resize(full.size() / 2 + 1);
  return full;
}

// Fills snr from accumulated signal and noise powers, applying the cap.
void finish_ratio(SpectralSnr& out, const std::vector<double>& signal, const std::vector<double>& noise,
                  double snr_max) {
  out.snr.assign(signal.size(), 0.0);
  for (std::size_t k = 0; k < signal.size(); ++k) {
    double ratio = 0.0;
    if (noise[k] > 0.0) {
      ratio = signal[k] / noise[k];
    } else if (signal[k] > 0.0) {
      ++out.zero_noise_bins;
      ratio = snr_max;
    }
    if (ratio >= snr_max) {
      ratio = snr_max;
      ++out.capped_bins;
    }
    out.snr[k] = ratio;
  }
  if (out.zero_noise_bins > 0) {
    warn("ZeroNoise: " + std::to_string(out.zero_noise_bins) +
         " bins with zero residual power; SNR capped at " + std::to_string(snr_max));
  }
}

std::vector<std::vector<std::size_t>> class_trials(const Recording& recording, std::vector<int>& classes) {
  classes = recording.class_ids();
  std::vector<std::vector<std::size_t>> out;
  for (int c : classes) {
    auto trials = recording.trials_of(c);
    if (trials.size() < 2) {
      fail(Errc::TooFewTrials, "class " + std::to_string(c) + " has " + std::to_string(trials.size()) +
                                   " trial(s); at least 2 are needed");
    }
    out.push_back(std::move(trials));
  }
  if (out.empty()) fail(Errc::TooFewTrials, "recording has no trials");
  return out;
}

}  // namespace

TrialSpectra trial_spectra(const Recording& recording, int class_id, std::span<const double> weights) {
  check_weights(recording, weights);
  const auto trials = recording.trials_of(class_id);
  if (trials.size() < 2) {
    fail(Errc::TooFewTrials, "class " + std::to_string(class_id) + " has fewer than 2 trials");
  }
  TrialSpectra out;
  out.n_samples = recording.n_samples();
  out.freqs_hz = onesided_freqs(recording.n_samples(), recording.sample_rate_hz());
  out.spectra.resize(trials.size());
  const auto n_trials = static_cast<long>(trials.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n_trials; ++i) {
    const auto trace = remove_mean(recording.component(trials[static_cast<std::size_t>(i)], weights));
    out.spectra[static_cast<std::size_t>(i)] = onesided(dft(trace));
  }
  return out;
}

SpectralSnr upper_bound_snr(const Recording& recording, std::span<const double> weights,
                            const CapacityOptions& options) {
  check_weights(recording, weights);
  std::vector<int> classes;
  const auto per_class = class_trials(recording, classes);

  SpectralSnr out;
  out.method = BoundMethod::Upper;
  out.band = options.band;
  out.freqs_hz = onesided_freqs(recording.n_samples(), recording.sample_rate_hz());
  check_band(out.band, out.freqs_hz);
  const std::size_t n_bins = out.freqs_hz.size();

  std::vector<std::vector<double>> class_signal(classes.size()), class_noise(classes.size());
  const auto n_classes = static_cast<long>(classes.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long ci = 0; ci < n_classes; ++ci) {
    const auto c = static_cast<std::size_t>(ci);
    const auto spectra = trial_spectra(recording, classes[c], weights).spectra;
    const auto m = static_cast<double>(spectra.size());
    std::vector<double> signal(n_bins), noise(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
      Complex mean = 0.0;
      for (const auto& s : spectra) mean += s[k];
      mean /= m;
      double resid = 0.0;
      for (const auto& s : spectra) resid += std::norm(s[k] - mean);
      noise[k] = resid / (m - 1.0);
      signal[k] = std::max(0.0, std::norm(mean) - noise[k] / m);
    }
    class_signal[c] = std::move(signal);
    class_noise[c] = std::move(noise);
  }

  std::vector<double> signal(n_bins, 0.0), noise(n_bins, 0.0);
  out.n_trials_m = static_cast<int>(per_class.front().size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    out.n_trials_m = std::min(out.n_trials_m, static_cast<int>(per_class[c].size()));
    for (std::size_t k = 0; k < n_bins; ++k) {
      signal[k] += class_signal[c][k];
      noise[k] += class_noise[c][k];
    }
  }
  for (std::size_t k = 0; k < n_bins; ++k) {
    signal[k] /= static_cast<double>(classes.size());
    noise[k] /= static_cast<double>(classes.size());
  }
  finish_ratio(out, signal, noise, options.snr_max);
  return out;
}

SpectralSnr lower_bound_snr(const Recording& recording, const CodeSet& codes, const Trf& trf,
                            std::span<const double> weights, double wiener_lambda,
                            const CapacityOptions& options) {
  if (!same_rate(trf.sample_rate_hz, recording.sample_rate_hz())) {
    fail(Errc::RateMismatch, "TRF and recording sample rates differ");
  }
  if (!options.allow_same_data && !trf.fit_source.empty() &&
      trf.fit_source == recording_fingerprint(recording)) {
    fail(Errc::InvalidParam, "TRF was fitted on the evaluated recording; use disjoint data "
                             "or allow_same_data");
  }
  check_weights(recording, weights);
  std::vector<int> classes;
  const auto per_class = class_trials(recording, classes);

  SpectralSnr out;
  out.method = BoundMethod::Lower;
  out.band = options.band;
  const std::size_t n = recording.n_samples();
  const double rate = recording.sample_rate_hz();
  out.freqs_hz = onesided_freqs(n, rate);
  check_band(out.band, out.freqs_hz);
  const std::size_t n_bins = out.freqs_hz.size();
  const auto transfer = trf.frequency_response(n);

  // Flatten (class, trial) work items so each one is reduced in a fixed order.
  struct Item {
    std::size_t class_index;
    std::size_t trial;
  };
  std::vector<Item> items;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    for (std::size_t i : per_class[c]) items.push_back({c, i});
  }
  std::vector<std::vector<Complex>> stimulus_spectra(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto stim = stimulus_epoch(codes.by_class(classes[c]), rate, n);
    stimulus_spectra[c] = dft(remove_mean(stim.samples));
  }

  std::vector<std::vector<double>> recon_power(items.size()), error_power(items.size());
  const auto n_items = static_cast<long>(items.size());
  std::optional<Error> failure;
#pragma omp parallel for schedule(static)
  for (long idx = 0; idx < n_items; ++idx) {
    const auto& item = items[static_cast<std::size_t>(idx)];
    try {
      const auto response = dft(remove_mean(recording.component(item.trial, weights)));
      const auto estimate = wiener_inverse(transfer, response, wiener_lambda, rate,
                                           std::make_pair(options.band.lo_hz, options.band.hi_hz));
      const auto& stim = stimulus_spectra[item.class_index];
      std::vector<double> rp(n_bins), ep(n_bins);
      for (std::size_t k = 0; k < n_bins; ++k) {
        rp[k] = std::norm(estimate[k]);
        ep[k] = std::norm(stim[k] - estimate[k]);
      }
      recon_power[static_cast<std::size_t>(idx)] = std::move(rp);
      error_power[static_cast<std::size_t>(idx)] = std::move(ep);
    } catch (const Error& e) {
#pragma omp critical(veplab_lower_bound_failure)
      if (!failure) failure = e;
    }
  }
  if (failure) throw *failure;

  std::vector<double> signal(n_bins, 0.0), noise(n_bins, 0.0);
  for (std::size_t idx = 0; idx < items.size(); ++idx) {
    for (std::size_t k = 0; k < n_bins; ++k) {
      signal[k] += recon_power[idx][k];
      noise[k] += error_power[idx][k];
    }
  }
  const auto count = static_cast<double>(items.size());
  for (std::size_t k = 0; k < n_bins; ++k) {
    noise[k] /= count;
    signal[k] = std::max(0.0, signal[k] / count - noise[k]);
  }
  out.n_trials_m = static_cast<int>(per_class.front().size());
  for (const auto& t : per_class) out.n_trials_m = std::min(out.n_trials_m, static_cast<int>(t.size()));
  finish_ratio(out, signal, noise, options.snr_max);
  return out;
}

InfoReport mutual_information(const SpectralSnr& snr) {
  check_band(snr.band, snr.freqs_hz);
  if (snr.snr.size() != snr.freqs_hz.size()) fail(Errc::InvalidParam, "SNR and frequency grids differ");
  const double df = snr.delta_f();
  const double eps = 1e-9 * df;
  InfoReport report;
  report.method = snr.method;
  report.band = snr.band;
  double bits = 0.0;
  for (std::size_t k = 0; k < snr.freqs_hz.size(); ++k) {
    const double f = snr.freqs_hz[k];
    if (f >= snr.band.lo_hz - eps && f < snr.band.hi_hz - eps) {
      bits += std::log2(1.0 + std::max(0.0, snr.snr[k])) * df;
    }
  }
  report.bits_per_second = bits;
  return report;
}

std::string recording_fingerprint(const Recording& recording) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto feed = [&hash](const void* bytes, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < len; ++i) {
      hash ^= p[i];
      hash *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t dims[3] = {recording.n_trials(), recording.n_channels(), recording.n_samples()};
  feed(dims, sizeof(dims));
  feed(recording.labels().data(), recording.labels().size_bytes());
  feed(recording.data().data(), recording.data().size_bytes());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace veplab
