#pragma once

// Spectral SNR and mutual information of the single-component channel under the
// additive Gaussian model. UPPER works on the response side (trial average as
// signal, residual as noise); LOWER on the stimulus side (reconstructed stimulus as
// signal, reconstruction error as noise).

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "veplab/encoder.hpp"
#include "veplab/recording.hpp"
#include "veplab/spectral.hpp"
#include "veplab/stimgen.hpp"

namespace veplab {

enum class BoundMethod { Upper, Lower };
std::string_view to_string(BoundMethod method) noexcept;
BoundMethod parse_bound_method(std::string_view text);

struct Band {
  double lo_hz = 1.0;
  double hi_hz = 30.0;
};

struct SpectralSnr {
  std::vector<double> freqs_hz;  // one-sided DFT grid, uniform spacing
  std::vector<double> snr;
  int n_trials_m = 0;  // smallest per-class trial count used
  BoundMethod method = BoundMethod::Upper;
  Band band;
  std::size_t capped_bins = 0;      // bins clipped at snr_max
  std::size_t zero_noise_bins = 0;  // bins with signal but exactly zero noise

  double delta_f() const { return freqs_hz.size() > 1 ? freqs_hz[1] - freqs_hz[0] : 0.0; }
};

struct InfoReport {
  double bits_per_second = 0.0;
  BoundMethod method = BoundMethod::Upper;
  Band band;
  std::vector<std::pair<int, double>> per_class_bits;
};

struct CapacityOptions {
  Band band;
  double snr_max = 1e6;
  // Allow a TRF whose fit fingerprint matches the evaluated recording.
  bool allow_same_data = false;
};

struct TrialSpectra {
  std::vector<double> freqs_hz;                    // one-sided grid
  std::vector<std::vector<Complex>> spectra;       // one-sided bins per trial
  std::size_t n_samples = 0;
};

// Per-trial DFT of the mean-removed single-component trace of one class.
TrialSpectra trial_spectra(const Recording& recording, int class_id, std::span<const double> weights);

// Per class with m trials: noise P = sum_i |R_i - mean R|^2 / (m - 1), signal
// max(0, |mean R|^2 - P / m). SNR(f) = class-averaged signal / class-averaged noise.
SpectralSnr upper_bound_snr(const Recording& recording, std::span<const double> weights,
                            const CapacityOptions& options = {});

// Per trial: S_hat = Wiener reconstruction of the component, E = S - S_hat. Powers of
// S_hat and E are averaged over trials and classes; signal = max(0, <|S_hat|^2> -
// <|E|^2>) (single-trial debiasing), SNR = signal / <|E|^2>.
SpectralSnr lower_bound_snr(const Recording& recording, const CodeSet& codes, const Trf& trf,
                            std::span<const double> weights, double wiener_lambda,
                            const CapacityOptions& options = {});

// Left Riemann sum of log2(1 + SNR) * df over bins with lo <= f < hi.
InfoReport mutual_information(const SpectralSnr& snr);

// Stable fingerprint of a recording's labels and payload (FNV-1a, hex).
std::string recording_fingerprint(const Recording& recording);

}  // namespace veplab
