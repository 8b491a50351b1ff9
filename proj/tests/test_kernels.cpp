#include <doctest.h>

#include <cmath>

#include "veplab/kernels.hpp"
#include "veplab/rng.hpp"

using namespace veplab;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed, 1);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  return x;
}

RowMatrix random_block(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  CounterRng rng(seed, 2);
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

double direct_filter(const std::vector<double>& s, const std::vector<double>& h, int lag_min, std::size_t t) {
  double acc = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) {
    const long idx = static_cast<long>(t) - lag_min - static_cast<long>(j);
    if (idx >= 0 && idx < static_cast<long>(s.size())) acc += h[j] * s[idx];
  }
  return acc;
}

}  // namespace

TEST_CASE("lagged gram equals the explicit design-matrix products") {
  const auto s = random_vector(200, 1);
  const auto r = random_vector(200, 2);
  for (int lag_min : {0, 3, -2}) {
    const int n_lags = 9;
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(200, n_lags);
    for (int t = 0; t < 200; ++t) {
      for (int j = 0; j < n_lags; ++j) {
        const int idx = t - lag_min - j;
        if (idx >= 0 && idx < 200) design(t, j) = s[idx];
      }
    }
    Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(r.data(), 200);
    Eigen::MatrixXd sts = Eigen::MatrixXd::Zero(n_lags, n_lags);
    Eigen::VectorXd str = Eigen::VectorXd::Zero(n_lags);
    kernels::serial::lagged_gram(s, r, lag_min, n_lags, sts, str);
    CHECK((sts - design.transpose() * design).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((str - design.transpose() * rv).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("lagged filter equals the direct convolution loop") {
  const auto s = random_vector(150, 3);
  const auto h = random_vector(12, 4);
  for (int lag_min : {0, 5, -3}) {
    std::vector<double> out(150);
    kernels::serial::lagged_filter(s, h, lag_min, out);
    for (std::size_t t = 0; t < out.size(); ++t) CHECK(out[t] == doctest::Approx(direct_filter(s, h, lag_min, t)).epsilon(1e-12));
  }
}

TEST_CASE("scatter equals the sum of outer products") {
  std::vector<RowMatrix> blocks;
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(5, 5);
  for (int b = 0; b < 6; ++b) {
    blocks.push_back(random_block(5, 40, b));
    expected += blocks.back() * blocks.back().transpose();
  }
  CHECK((kernels::serial::scatter(blocks) - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("pearson and flatness") {
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> b{2, 4, 6, 8};
  const std::vector<double> c{4, 3, 2, 1};
  const std::vector<double> flat{3, 3, 3, 3};
  CHECK(kernels::pearson(a, b) == doctest::Approx(1.0));
  CHECK(kernels::pearson(a, c) == doctest::Approx(-1.0));
  CHECK(kernels::pearson(a, flat) == 0.0);
  CHECK(kernels::is_flat(flat));
  CHECK(kernels::is_flat(std::vector<double>{0, 0, 0}));
  CHECK_FALSE(kernels::is_flat(a));
}

TEST_CASE("correlation scores sum per-component pearson") {
  std::vector<RowMatrix> trials{random_block(3, 50, 10), random_block(3, 50, 11), RowMatrix::Zero(3, 50)};
  std::vector<RowMatrix> templates{random_block(3, 50, 20), random_block(3, 50, 21)};
  const auto table = kernels::serial::correlation_scores(trials, templates, 30);
  REQUIRE(table.scores.rows() == 3);
  REQUIRE(table.scores.cols() == 2);
  for (int i = 0; i < 2; ++i) {
    for (int c = 0; c < 2; ++c) {
      double expected = 0.0;
      for (int k = 0; k < 3; ++k) {
        const std::span<const double> x(trials[i].row(k).data(), 30);
        const std::span<const double> y(templates[c].row(k).data(), 30);
        expected += kernels::pearson(x, y);
      }
      CHECK(table.scores(i, c) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  CHECK(table.degenerate == std::vector<std::uint8_t>{0, 0, 1});
  CHECK(table.scores.row(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("serial and parallel kernels agree bit for bit at every thread count") {
  const auto s = random_vector(500, 5);
  const auto r = random_vector(500, 6);
  const auto h = random_vector(31, 7);
  std::vector<RowMatrix> blocks, trials, templates;
  for (int b = 0; b < 12; ++b) blocks.push_back(random_block(8, 120, 100 + b));
  for (int b = 0; b < 25; ++b) trials.push_back(random_block(4, 120, 200 + b));
  for (int b = 0; b < 10; ++b) templates.push_back(random_block(4, 120, 300 + b));

  Eigen::MatrixXd sts_s = Eigen::MatrixXd::Zero(31, 31);
  Eigen::VectorXd str_s = Eigen::VectorXd::Zero(31);
  kernels::serial::lagged_gram(s, r, 2, 31, sts_s, str_s);
  std::vector<double> filt_s(500);
  kernels::serial::lagged_filter(s, h, 2, filt_s);
  const auto scat_s = kernels::serial::scatter(blocks);
  const auto score_s = kernels::serial::correlation_scores(trials, templates, 100);

  const int original = kernels::thread_count();
  for (int threads : {1, 2, 3, 8}) {
    kernels::set_thread_count(threads);
    Eigen::MatrixXd sts_p = Eigen::MatrixXd::Zero(31, 31);
    Eigen::VectorXd str_p = Eigen::VectorXd::Zero(31);
    kernels::parallel::lagged_gram(s, r, 2, 31, sts_p, str_p);
    CHECK(sts_p == sts_s);
    CHECK(str_p == str_s);
    std::vector<double> filt_p(500);
    kernels::parallel::lagged_filter(s, h, 2, filt_p);
    CHECK(filt_p == filt_s);
    CHECK(kernels::parallel::scatter(blocks) == scat_s);
    const auto score_p = kernels::parallel::correlation_scores(trials, templates, 100);
    CHECK(score_p.scores == score_s.scores);
    CHECK(score_p.degenerate == score_s.degenerate);
  }
  kernels::set_thread_count(original);
}
