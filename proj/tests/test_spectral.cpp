#include <doctest.h>

#include <cmath>
#include <numbers>

#include "veplab/rng.hpp"
#include "veplab/spectral.hpp"

using namespace veplab;

namespace {

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  return x;
}

}  // namespace

TEST_CASE("dft matches the direct sum for odd and even lengths") {
  for (std::size_t n : {1u, 2u, 7u, 60u, 121u}) {
    const auto x = random_signal(n, n);
    const auto X = dft(x);
    REQUIRE(X.size() == n);
    for (std::size_t k = 0; k < n; ++k) {
      Complex direct = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        direct += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n));
      }
      CHECK(std::abs(X[k] - direct) < 1e-9 * (1.0 + std::abs(direct)));
    }
  }
}

TEST_CASE("idft inverts dft") {
  const auto x = random_signal(120, 3);
  const auto y = idft_real(dft(x));
  for (std::size_t t = 0; t < x.size(); ++t) CHECK(y[t] == doctest::Approx(x[t]).epsilon(1e-12));
}

TEST_CASE("parseval") {
  const auto x = random_signal(240, 9);
  const auto X = dft(x);
  double time_power = 0.0, freq_power = 0.0;
  for (double v : x) time_power += v * v;
  for (const auto& c : X) freq_power += std::norm(c);
  CHECK(std::abs(time_power - freq_power / 240.0) <= 1e-9 * time_power);
}

TEST_CASE("one-sided grid") {
  const auto f = onesided_freqs(240, 240.0);
  REQUIRE(f.size() == 121);
  CHECK(f.front() == 0.0);
  CHECK(f[1] == 1.0);
  CHECK(f.back() == 120.0);
  CHECK(onesided_freqs(7, 7.0).size() == 4);
}

TEST_CASE("mean removal") {
  const auto y = remove_mean(std::vector<double>{1, 2, 3, 6});
  CHECK(y == std::vector<double>{-2, -1, 0, 3});
}
