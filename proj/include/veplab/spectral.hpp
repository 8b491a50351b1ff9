#pragma once

#include <complex>
#include <span>
#include <vector>

namespace veplab {

using Complex = std::complex<double>;

// Full-length forward DFT, X[k] = sum_t x[t] exp(-2*pi*i*k*t/N), any N.
std::vector<Complex> dft(std::span<const double> x);

// Inverse of dft() for a Hermitian spectrum; returns the real part.
std::vector<double> idft_real(std::span<const Complex> spectrum);

// One-sided bin frequencies k * rate / n for k = 0..n/2.
std::vector<double> onesided_freqs(std::size_t n, double sample_rate_hz);

std::vector<double> remove_mean(std::span<const double> x);

}  // namespace veplab
