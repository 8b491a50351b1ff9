#include "veplab/spectral.hpp"

#include <numeric>

#include <unsupported/Eigen/FFT>

namespace veplab {

std::vector<Complex> dft(std::span<const double> x) {
  std::vector<Complex> out;
  if (x.empty()) return out;
  if (x.size() == 1) return {Complex(x[0], 0.0)};
  Eigen::FFT<double> fft;
  std::vector<double> in(x.begin(), x.end());
  fft.fwd(out, in);
  return out;
}

std::vector<double> idft_real(std::span<const Complex> spectrum) {
  std::vector<double> out;
  if (spectrum.empty()) return out;
  if (spectrum.size() == 1) return {spectrum[0].real()};
  Eigen::FFT<double> fft;
  std::vector<Complex> in(spectrum.begin(), spectrum.end());
  std::vector<Complex> full;
  fft.inv(full, in);
  out.resize(full.size());
  for (std::size_t i = 0; i < full.size(); ++i) out[i] = full[i].real();
  return out;
}

std::vector<double> onesided_freqs(std::size_t n, double sample_rate_hz) {
  std::vector<double> freqs(n / 2 + 1);
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    freqs[k] = static_cast<double>(k) * sample_rate_hz / static_cast<double>(n);
  }
  return freqs;
}

std::vector<double> remove_mean(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  if (out.empty()) return out;
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(out.size());
  for (double& v : out) v -= mean;
  return out;
}

}  // namespace veplab
