#include "veplab/encoder.hpp"

#include <cmath>
#include <string>

#include "veplab/error.hpp"
#include "veplab/kernels.hpp"

namespace veplab {

LagWindow LagWindow::from_seconds(double min_s, double max_s, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) fail(Errc::InvalidParam, "sample rate must be positive");
  if (max_s < min_s) fail(Errc::InvalidParam, "lag_max below lag_min");
  return {static_cast<int>(std::lround(min_s * sample_rate_hz)),
          static_cast<int>(std::lround(max_s * sample_rate_hz))};
}

std::vector<double> Trf::lags_s() const {
  std::vector<double> out(coeffs.size());
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    out[j] = static_cast<double>(lag_min + static_cast<int>(j)) / sample_rate_hz;
  }
  return out;
}

std::vector<Complex> Trf::frequency_response(std::size_t n) const {
  if (n == 0) fail(Errc::InvalidParam, "frequency grid of length 0");
  std::vector<double> laid(n, 0.0);
  const auto len = static_cast<long>(n);
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    const long lag = lag_min + static_cast<long>(j);
    laid[static_cast<std::size_t>(((lag % len) + len) % len)] += coeffs[j];
  }
  return dft(laid);
}

Eigen::MatrixXd build_lag_matrix(std::span<const double> stimulus, const LagWindow& lags) {
  if (lags.size() < 1) fail(Errc::InvalidParam, "empty lag window");
  const auto n = static_cast<Eigen::Index>(stimulus.size());
  if (n <= lags.size()) {
    fail(Errc::InvalidParam, "lag window of " + std::to_string(lags.size()) +
                                 " lags exceeds stimulus length " + std::to_string(n));
  }
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n, lags.size());
  for (int j = 0; j < lags.size(); ++j) {
    const int lag = lags.min_lag + j;
    for (Eigen::Index t = 0; t < n; ++t) {
      const Eigen::Index src = t - lag;
      if (src >= 0 && src < n) design(t, j) = stimulus[static_cast<std::size_t>(src)];
    }
  }
  return design;
}

Trf fit_trf(std::span<const TrainingPair> pairs, const LagWindow& lags,
            std::optional<double> ridge_lambda) {
  if (pairs.empty()) fail(Errc::InvalidParam, "fit_trf needs at least one pair");
  if (lags.size() < 1) fail(Errc::InvalidParam, "empty lag window");
  if (ridge_lambda && *ridge_lambda < 0.0) fail(Errc::InvalidParam, "negative ridge lambda");
  const double rate = pairs.front().stimulus.sample_rate_hz;
  const int n_lags = lags.size();

  Eigen::MatrixXd sts = Eigen::MatrixXd::Zero(n_lags, n_lags);
  Eigen::VectorXd str = Eigen::VectorXd::Zero(n_lags);
  std::size_t pooled = 0;
  for (const auto& pair : pairs) {
    if (!same_rate(pair.stimulus.sample_rate_hz, rate) ||
        !same_rate(pair.response.sample_rate_hz, rate)) {
      fail(Errc::RateMismatch, "training pairs disagree on sample rate");
    }
    if (pair.stimulus.size() != pair.response.size()) {
      fail(Errc::InvalidParam, "stimulus and response lengths differ");
    }
    if (pair.stimulus.size() <= static_cast<std::size_t>(n_lags)) {
      fail(Errc::InvalidParam, "lag window exceeds stimulus length");
    }
    kernels::parallel::lagged_gram(pair.stimulus.samples, pair.response.samples, lags.min_lag,
                                   n_lags, sts, str);
    pooled += pair.stimulus.size();
  }
  if (pooled < 10 * static_cast<std::size_t>(n_lags)) {
    warn("fit_trf: " + std::to_string(pooled) + " pooled samples for " + std::to_string(n_lags) +
         " lags (fewer than 10 per lag)");
  }

  const double lambda = ridge_lambda.value_or(kDefaultRelativeRidge * sts.diagonal().mean());
  Eigen::VectorXd coeffs;
  if (lambda == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sts, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e12) {
      fail(Errc::SingularSystem, "S^T S is numerically singular (condition estimate " +
                                     std::to_string(lo > 0.0 ? hi / lo : INFINITY) + ")");
    }
    coeffs = sts.ldlt().solve(str);
  } else {
    Eigen::MatrixXd regularized = sts;
    regularized.diagonal().array() += lambda;
    coeffs = regularized.ldlt().solve(str);
  }

  Trf trf;
  trf.sample_rate_hz = rate;
  trf.lag_min = lags.min_lag;
  trf.coeffs.assign(coeffs.data(), coeffs.data() + coeffs.size());
  trf.ridge_lambda = lambda;
  trf.fit_length = pairs.front().stimulus.size();
  return trf;
}

Signal predict_response(const Trf& trf, const Signal& stimulus) {
  if (!same_rate(trf.sample_rate_hz, stimulus.sample_rate_hz)) {
    fail(Errc::RateMismatch, "TRF at " + std::to_string(trf.sample_rate_hz) + " Hz, stimulus at " +
                                 std::to_string(stimulus.sample_rate_hz) + " Hz");
  }
  Signal out;
  out.sample_rate_hz = stimulus.sample_rate_hz;
  out.samples.resize(stimulus.size());
  kernels::parallel::lagged_filter(stimulus.samples, trf.coeffs, trf.lag_min, out.samples);
  return out;
}

std::vector<Complex> wiener_inverse(std::span<const Complex> transfer,
                                    std::span<const Complex> response_spectrum,
                                    double wiener_lambda, double sample_rate_hz,
                                    std::optional<std::pair<double, double>> band_hz) {
  if (transfer.size() != response_spectrum.size()) {
    fail(Errc::InvalidParam, "transfer and response spectra differ in length");
  }
  if (wiener_lambda < 0.0) fail(Errc::InvalidParam, "negative Wiener lambda");
  const std::size_t n = transfer.size();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex h = transfer[k];
    const double power = std::norm(h);
    if (wiener_lambda == 0.0 && std::abs(h) <= 1e-9) {
      const double freq = static_cast<double>(std::min(k, n - k)) * sample_rate_hz / static_cast<double>(n);
      const bool in_band = !band_hz || (freq >= band_hz->first && freq <= band_hz->second);
      if (in_band) {
        fail(Errc::DivergentInverse, "|H(f)| vanishes at " + std::to_string(freq) +
                                         " Hz with zero regularization");
      }
      out[k] = 0.0;
      continue;
    }
    out[k] = std::conj(h) * response_spectrum[k] / (power + wiener_lambda);
  }
  return out;
}

Signal reconstruct_stimulus(const Trf& trf, const Signal& response, double wiener_lambda,
                            std::optional<std::pair<double, double>> band_hz) {
  if (!same_rate(trf.sample_rate_hz, response.sample_rate_hz)) {
    fail(Errc::RateMismatch, "TRF and response sample rates differ");
  }
  if (response.size() < trf.coeffs.size()) {
    fail(Errc::InvalidParam, "response shorter than the lag window");
  }
  const auto transfer = trf.frequency_response(response.size());
  const auto spectrum = dft(response.samples);
  const auto estimate = wiener_inverse(transfer, spectrum, wiener_lambda, response.sample_rate_hz, band_hz);
  return Signal{idft_real(estimate), response.sample_rate_hz};
}

Decomposition decompose_response(const Trf& trf, const Signal& stimulus, const Signal& response) {
  if (!same_rate(stimulus.sample_rate_hz, response.sample_rate_hz)) {
    fail(Errc::RateMismatch, "stimulus and response sample rates differ");
  }
  if (stimulus.size() != response.size()) fail(Errc::InvalidParam, "stimulus and response not aligned");
  Decomposition out;
  out.linear.kind = ComponentKind::Linear;
  out.linear.samples = predict_response(trf, stimulus).samples;
  out.nonlinear.kind = ComponentKind::Nonlinear;
  out.nonlinear.samples.resize(response.size());
  for (std::size_t t = 0; t < response.size(); ++t) {
    out.nonlinear.samples[t] = response.samples[t] - out.linear.samples[t];
  }
  return out;
}

}  // namespace veplab
