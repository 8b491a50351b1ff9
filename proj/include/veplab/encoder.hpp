#pragma once

// Linear stimulus-to-response model: R(t) = sum_tau h(tau) S(t - tau) + noise.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "veplab/signal.hpp"
#include "veplab/spectral.hpp"

namespace veplab {

// Inclusive lag range in samples.
struct LagWindow {
  int min_lag = 0;
  int max_lag = 0;

  int size() const { return max_lag - min_lag + 1; }
  static LagWindow from_seconds(double min_s, double max_s, double sample_rate_hz);
};

// Temporal response function h(tau) sampled at 1/sample_rate steps.
struct Trf {
  double sample_rate_hz = 0.0;
  int lag_min = 0;
  std::vector<double> coeffs;
  double ridge_lambda = 0.0;
  // Length of the fitting window; the DFT grid of frequency_response().
  std::size_t fit_length = 0;
  // Fingerprint of the data the model was fitted on (empty when unknown).
  std::string fit_source;

  int lag_max() const { return lag_min + static_cast<int>(coeffs.size()) - 1; }
  LagWindow lags() const { return {lag_min, lag_max()}; }
  std::vector<double> lags_s() const;

  // DFT of the coefficients laid at their lag positions (circularly) on an n-point grid.
  std::vector<Complex> frequency_response(std::size_t n) const;
  std::vector<Complex> frequency_response() const { return frequency_response(fit_length); }
};

enum class ComponentKind { Full, Linear, Nonlinear };

struct ComponentSignal {
  std::vector<double> samples;
  ComponentKind kind = ComponentKind::Full;
};

struct Decomposition {
  ComponentSignal linear;
  ComponentSignal nonlinear;
};

// One (stimulus, single-component response) pair of equal length and rate.
struct TrainingPair {
  Signal stimulus;
  Signal response;
};

// Row t holds stimulus[t - tau] for each lag tau, zero before onset.
Eigen::MatrixXd build_lag_matrix(std::span<const double> stimulus, const LagWindow& lags);

// Default ridge: 1e-3 times the mean diagonal of S^T S.
inline constexpr double kDefaultRelativeRidge = 1e-3;

// Solves (S^T S + lambda I) h = S^T R pooled over all pairs. Without an explicit
// lambda the default relative ridge is used; lambda = 0 is the plain normal equations
// and throws SingularSystem when S^T S has condition number above 1e12.
Trf fit_trf(std::span<const TrainingPair> pairs, const LagWindow& lags,
            std::optional<double> ridge_lambda = std::nullopt);

// Causal convolution with the TRF, same length as the stimulus.
Signal predict_response(const Trf& trf, const Signal& stimulus);

// Frequency-domain regularized inverse S(f) = conj(H) R / (|H|^2 + lambda) on the
// response-length DFT grid. With lambda = 0 every bin inside `band_hz` (default: all
// bins) must have |H| > 1e-9, otherwise DivergentInverse; bins outside the band with
// vanishing |H| are set to zero.
Signal reconstruct_stimulus(const Trf& trf, const Signal& response, double wiener_lambda,
                            std::optional<std::pair<double, double>> band_hz = std::nullopt);

// Spectrum-level form of reconstruct_stimulus() for callers that already hold R(f).
std::vector<Complex> wiener_inverse(std::span<const Complex> transfer,
                                    std::span<const Complex> response_spectrum,
                                    double wiener_lambda, double sample_rate_hz,
                                    std::optional<std::pair<double, double>> band_hz = std::nullopt);

// linear = predict_response(trf, stimulus), nonlinear = response - linear.
Decomposition decompose_response(const Trf& trf, const Signal& stimulus, const Signal& response);

}  // namespace veplab
