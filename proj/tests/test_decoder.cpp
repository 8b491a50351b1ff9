#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sim_fixtures.hpp"
#include "support.hpp"
#include "veplab/decoder.hpp"
#include "veplab/rng.hpp"
#include "veplab/stimgen.hpp"

using namespace veplab;
using veplab::testing::error_code_of;
using veplab::testing::vep_config;

namespace {

template <typename Fill>
Recording make_recording(const std::vector<std::uint32_t>& labels, std::size_t channels, std::size_t n, double fs,
                         Fill fill) {
  Recording rec(labels.size(), channels, n, fs);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    rec.labels()[i] = labels[i];
    auto x = rec.trial(i);
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t t = 0; t < n; ++t) x(c, t) = fill(i, c, t);
    }
  }
  return rec;
}

std::vector<std::uint32_t> balanced(int classes, int per_class) {
  std::vector<std::uint32_t> labels;
  for (int r = 0; r < per_class; ++r) {
    for (int c = 0; c < classes; ++c) labels.push_back(static_cast<std::uint32_t>(c));
  }
  return labels;
}

Eigen::MatrixXd random_orthonormal(Eigen::Index rows, Eigen::Index cols, CounterRng& rng) {
  Eigen::MatrixXd g(rows, cols);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

}  // namespace

TEST_CASE("scatter of identical trials vanishes") {
  const auto rec = make_recording(balanced(3, 4), 2, 20, 20.0, [](auto, auto c, auto t) { return std::sin(0.1 * t + c); });
  const auto s = scatter_matrices(rec);
  CHECK(s.between.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(s.within.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("two classes with identical trials and a rank-one mean difference") {
  // Class c holds u_c w(t)^T, so the class-mean difference (u_0 - u_1) w^T has rank one.
  const std::vector<std::vector<double>> u{{1.0, -0.5, 0.25}, {0.2, 0.4, 0.6}};
  const auto rec = make_recording(balanced(2, 3), 3, 30, 30.0,
                                  [&](auto i, auto c, auto t) { return u[i % 2][c] * std::cos(0.2 * t) + 0.1 * c; });
  const auto s = scatter_matrices(rec);
  CHECK(s.within.cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.between);
  const auto ev = eig.eigenvalues();
  CHECK(ev(ev.size() - 1) > 0.0);
  CHECK(std::abs(ev(ev.size() - 2)) < 1e-9 * ev(ev.size() - 1));
}

TEST_CASE("single-sample epochs give rank-one S_b for two classes") {
  CounterRng rng(2, 0);
  std::vector<double> values(8 * 4);
  for (auto& v : values) v = rng.normal();
  const auto rec = make_recording(balanced(2, 4), 4, 1, 1.0, [&](auto i, auto c, auto) { return values[i * 4 + c]; });
  const auto ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(scatter_matrices(rec).between).eigenvalues();
  CHECK(std::abs(ev(2)) < 1e-9 * ev(3));
}

TEST_CASE("between plus within traces equal the total scatter trace") {
  CounterRng rng(3, 0);
  std::vector<double> values(5 * 6 * 4 * 25);
  for (auto& v : values) v = rng.normal() + 0.3;
  const auto labels = balanced(5, 6);
  const auto rec = make_recording(labels, 4, 25, 25.0, [&](auto i, auto c, auto t) { return values[(i * 4 + c) * 25 + t]; });
  const auto s = scatter_matrices(rec);
  // Direct summation: sum_i ||X_i - grand mean||^2 / N_t.
  const std::size_t nt = labels.size();
  std::vector<double> grand(4 * 25, 0.0);
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t k = 0; k < grand.size(); ++k) grand[k] += values[i * 100 + k] / nt;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t k = 0; k < grand.size(); ++k) total += std::pow(values[i * 100 + k] - grand[k], 2);
  }
  total /= nt;
  CHECK(std::abs(s.between.trace() + s.within.trace() - total) <= 1e-6 * total);
  CHECK((s.between - s.between.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s.within).eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("scatter preconditions") {
  const auto one_class = make_recording({0, 0, 0}, 1, 10, 10.0, [](auto i, auto, auto t) { return double(i * t); });
  CHECK(error_code_of([&] { scatter_matrices(one_class); }) == Errc::TooFewTrials);
  const auto singleton = make_recording({0, 0, 1}, 1, 10, 10.0, [](auto i, auto, auto t) { return double(i * t); });
  CHECK(error_code_of([&] { scatter_matrices(singleton); }) == Errc::DegenerateClass);
}

TEST_CASE("separable two-channel instance") {
  CounterRng rng(4, 0);
  std::vector<double> wave(40);
  for (auto& v : wave) v = rng.normal();
  CounterRng noise(5, 0);
  const auto rec = make_recording(balanced(2, 10), 2, 40, 40.0, [&](auto i, auto c, auto t) {
    const bool active = (i % 2) == c;
    return (active ? wave[t] : 0.0) + 1e-3 * noise.normal();
  });
  const auto model = train_tdca(rec, 1, 0.01);
  CHECK(evaluate(model, rec, 1.0).accuracy == 1.0);
}

TEST_CASE("trained filters beat random projections on the Fisher objective") {
  const auto codes = generate_white_noise(10, 60.0, 0.5, 2);
  const auto sim = simulate_recording(vep_config(6, 1.0, 4, 9), codes);
  const auto scatter = scatter_matrices(sim.recording);
  const auto model = train_tdca(sim.recording, 1, 0.0);
  const double trained = fisher_objective(model.weights, scatter);
  CounterRng rng(1, 0);
  for (int r = 0; r < 1000; ++r) CHECK(trained >= fisher_objective(random_orthonormal(6, 1, rng), scatter));
}

TEST_CASE("several components maximize the ratio trace") {
  // tr((W^T S_w W)^-1 W^T S_b W) is what the leading generalized eigenvectors maximize.
  const auto codes = generate_white_noise(10, 60.0, 0.5, 2);
  const auto sim = simulate_recording(vep_config(6, 1.0, 4, 9), codes);
  const auto scatter = scatter_matrices(sim.recording);
  auto ratio_trace = [&](const Eigen::MatrixXd& w) {
    const Eigen::MatrixXd sw = w.transpose() * scatter.within * w;
    const Eigen::MatrixXd sb = w.transpose() * scatter.between * w;
    return sw.ldlt().solve(sb).trace();
  };
  const auto model = train_tdca(sim.recording, 3, 0.0);
  const double trained = ratio_trace(model.weights);
  CHECK(trained == doctest::Approx(model.eigenvalues[0] + model.eigenvalues[1] + model.eigenvalues[2]).epsilon(1e-9));
  CounterRng rng(3, 0);
  for (int r = 0; r < 1000; ++r) CHECK(trained >= ratio_trace(random_orthonormal(6, 3, rng)));
}

TEST_CASE("model structure") {
  const auto codes = generate_white_noise(5, 60.0, 0.5, 2);
  const auto sim = simulate_recording(vep_config(4, 1.0, 3, 1), codes);
  const auto model = train_tdca(sim.recording, 3, 0.01);
  CHECK(model.weights.rows() == 4);
  CHECK(model.weights.cols() == 3);
  CHECK(model.class_ids == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(model.templates.size() == 5);
  CHECK(model.window_samples == 120);
  for (std::size_t k = 1; k < model.eigenvalues.size(); ++k) CHECK(model.eigenvalues[k - 1] >= model.eigenvalues[k]);
  CHECK(error_code_of([&] { train_tdca(sim.recording, 5, 0.01); }) == Errc::InvalidParam);
  CHECK(error_code_of([&] { train_tdca(sim.recording, 1, 1.5); }) == Errc::InvalidParam);
  CHECK(error_code_of([&] { model.index_of(9); }) == Errc::UnknownClass);
  const std::vector<int> keep{1, 3};
  const auto sub = model.restricted(keep);
  CHECK(sub.class_ids == keep);
  CHECK(sub.templates[1] == model.templates[3]);
}

TEST_CASE("full shrinkage makes zero within-class scatter solvable") {
  const auto rec = make_recording(balanced(2, 3), 3, 30, 30.0,
                                  [](auto i, auto c, auto t) { return (i % 2 ? 1.0 : -0.5) * std::cos(0.2 * t * (c + 1)); });
  CHECK_NOTHROW(train_tdca(rec, 2, 1.0));
}

TEST_CASE("a class mean trial scores n_components for its own class") {
  const auto codes = generate_white_noise(6, 60.0, 0.5, 3);
  const auto sim = simulate_recording(vep_config(4, 1.0, 3, 2), codes);
  const auto model = train_tdca(sim.recording, 3, 0.01);
  for (int c : model.class_ids) {
    RowMatrix mean = RowMatrix::Zero(4, 120);
    const auto idx = sim.recording.trials_of(c);
    for (auto i : idx) mean += sim.recording.trial(i);
    mean /= static_cast<double>(idx.size());
    const Recording::TrialView view(mean.data(), 4, 120);
    const auto result = classify(model, view, 0.5);
    CHECK(result.class_id == c);
    CHECK(result.scores[model.index_of(c)] == doctest::Approx(3.0).epsilon(1e-9));
  }
}

TEST_CASE("zero-variance trial is flagged and goes to the lowest class") {
  const auto codes = generate_white_noise(4, 60.0, 0.5, 3);
  const auto sim = simulate_recording(vep_config(3, 1.0, 3, 2), codes);
  const auto model = train_tdca(sim.recording, 2, 0.01);
  const RowMatrix zero = RowMatrix::Zero(3, 120);
  const auto result = classify(model, Recording::TrialView(zero.data(), 3, 120), 0.5);
  CHECK(result.degenerate);
  CHECK(result.class_id == 0);
  for (double s : result.scores) CHECK(s == 0.0);
  CHECK(error_code_of([&] { classify(model, sim.recording.trial(0), 0.6); }) == Errc::WindowTooLong);
  const auto short_model = train_tdca(sim.recording, 2, 0.01, 0.2);
  CHECK(error_code_of([&] { classify(short_model, sim.recording.trial(0), 0.3); }) == Errc::WindowTooLong);
  CHECK_NOTHROW(classify(short_model, sim.recording.trial(0), 0.1));
}

TEST_CASE("classification is invariant to positive scaling") {
  const auto codes = generate_white_noise(8, 60.0, 0.5, 4);
  const auto sim = simulate_recording(vep_config(4, 1.0, 3, 3), codes);
  const auto model = train_tdca(sim.recording, 2, 0.01);
  CounterRng rng(6, 0);
  for (std::size_t i = 0; i < sim.recording.n_trials(); ++i) {
    const double scale = std::exp(8.0 * rng.uniform() - 4.0);
    const RowMatrix scaled = scale * sim.recording.trial(i);
    const auto a = classify(model, sim.recording.trial(i), 0.3);
    const auto b = classify(model, Recording::TrialView(scaled.data(), 4, 120), 0.3);
    CHECK(a.class_id == b.class_id);
    for (std::size_t c = 0; c < a.scores.size(); ++c) CHECK(std::abs(a.scores[c] - b.scores[c]) < 1e-9);
  }
}

TEST_CASE("evaluation outputs") {
  const auto codes = generate_white_noise(5, 60.0, 0.5, 5);
  const auto clean = simulate_recording(vep_config(4, 0.0, 3, 4), codes);
  const auto model = train_tdca(clean.recording, 1, 0.01);
  const auto perfect = evaluate(model, clean.recording, 0.5);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.confusion.isApprox(Eigen::MatrixXd::Identity(5, 5)));

  const auto noisy = simulate_recording(vep_config(4, 4.0, 3, 4), codes);
  const auto ev = evaluate(model, noisy.recording, 0.2);
  CHECK(ev.n_trials == 15);
  CHECK(ev.predicted.size() == 15);
  for (Eigen::Index r = 0; r < ev.confusion.rows(); ++r) CHECK(std::abs(ev.confusion.row(r).sum() - 1.0) <= 1e-12);
}

TEST_CASE("cross-validated accuracy falls as noise doubles") {
  const auto codes = generate_white_noise(20, 60.0, 0.5, 6);
  double previous = 1.0 + 0.02;
  for (double scale : {1.0, 2.0, 4.0, 8.0}) {
    const auto sim = simulate_recording(vep_config(6, scale, 6, 11), codes);
    const double acc = cross_validate(sim.recording, 6, 1, 0.01, 0.5).accuracy;
    CHECK(acc <= previous + 0.02);
    previous = acc;
  }
}

TEST_CASE("channel permutation leaves accuracy unchanged") {
  const auto codes = generate_white_noise(10, 60.0, 0.5, 7);
  const auto sim = simulate_recording(vep_config(5, 2.0, 4, 12), codes);
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  Recording permuted(sim.recording.n_trials(), 5, 120, 240.0);
  for (std::size_t i = 0; i < permuted.n_trials(); ++i) {
    permuted.labels()[i] = sim.recording.labels()[i];
    for (std::size_t c = 0; c < 5; ++c) permuted.trial(i).row(c) = sim.recording.trial(i).row(perm[c]);
  }
  const auto a = cross_validate(sim.recording, 4, 2, 0.01, 0.3);
  const auto b = cross_validate(permuted, 4, 2, 0.01, 0.3);
  CHECK(a.accuracy == doctest::Approx(b.accuracy).epsilon(1e-12));
}

TEST_CASE("class correlation matrix") {
  const auto train_rec = make_recording(balanced(3, 3), 1, 60, 60.0,
                                        [](auto i, auto, auto t) { return std::sin(0.1 * t * (1 + i % 3) + 0.01 * i); });
  const auto model = train_tdca(train_rec, 1, 0.01);

  const auto same = make_recording(balanced(3, 2), 1, 60, 60.0, [](auto, auto, auto t) { return std::sin(0.3 * t); });
  const auto ones = class_correlation_matrix(model, same, 1.0);
  CHECK((ones.array() - 1.0).abs().maxCoeff() < 1e-12);

  const auto orth = make_recording(balanced(3, 2), 1, 60, 60.0, [](auto i, auto, auto t) {
    return std::sin(2.0 * std::numbers::pi * (1.0 + i % 3) * t / 60.0);
  });
  const auto r = class_correlation_matrix(model, orth, 1.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(r(i, i) == 1.0);
    for (int j = 0; j < 3; ++j) {
      CHECK(r(i, j) == r(j, i));
      if (i != j) CHECK(std::abs(r(i, j)) < 1e-9);
    }
  }

  const auto flat = make_recording(balanced(2, 2), 1, 60, 60.0, [](auto i, auto, auto t) { return i % 2 ? 1.0 : std::sin(0.1 * t); });
  CHECK(error_code_of([&] { class_correlation_matrix(model, flat, 1.0); }) == Errc::DegenerateTemplate);
}

TEST_CASE("white-noise classes are less correlated than JFPM classes at 0.1 s") {
  auto mean_offdiag = [](const Eigen::MatrixXd& m) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (i != j) s += std::abs(m(i, j));
      }
    }
    return s / static_cast<double>(m.rows() * (m.rows() - 1));
  };
  JfpmParams jp;
  jp.duration_s = 0.5;
  // A broadband kernel; with a narrow 8 Hz kernel the shared onset transient dominates 0.1 s windows.
  auto cfg = vep_config(6, 0.5, 6, 21);
  cfg.trf_true = vep_like_trf(240.0, 0.3, 16.0, 0.03);
  const auto jfpm = simulate_recording(cfg, generate_jfpm(jp));
  const auto wn = simulate_recording(cfg, generate_white_noise(40, 60.0, 0.5, 8));
  const double rj = mean_offdiag(class_correlation_matrix(train_tdca(jfpm.recording, 1, 0.01), jfpm.recording, 0.1));
  const double rw = mean_offdiag(class_correlation_matrix(train_tdca(wn.recording, 1, 0.01), wn.recording, 0.1));
  CHECK(rw < rj);
}

TEST_CASE("itr closed forms and table rows") {
  const auto perfect = itr(40, 1.0, 1.0, 0.0);
  CHECK(perfect.bits_per_trial == doctest::Approx(std::log2(40.0)).epsilon(1e-12));
  CHECK(perfect.itr_star_bps == doctest::Approx(5.321928).epsilon(1e-6));
  // Online cued row S1: 97% at 0.2 s gives 24.86 bps as printed.
  CHECK(std::abs(itr(40, 0.97, 0.2, 0.5).itr_star_bps - 24.86) < 0.1);
  // Online cued row S4: 95% at 0.3 s gives 360.82 bpm as printed.
  const double s4 = itr(40, 0.95, 0.3, 0.5).itr_bpm;
  CHECK(s4 == doctest::Approx(357.8).epsilon(1e-3));
  CHECK(std::abs(s4 / 360.82 - 1.0) < 0.01);
  CHECK(itr(40, 1.0 / 40.0, 0.5, 0.5).bits_per_trial == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(itr(40, 0.0, 0.5, 0.5).bits_per_trial == doctest::Approx(std::log2(40.0) - std::log2(39.0)).epsilon(1e-12));
  const auto r = itr(40, 0.9, 0.4, 0.6);
  CHECK(r.itr_bpm == doctest::Approx(60.0 * r.bits_per_trial / 1.0));
  CHECK(r.itr_star_bps == doctest::Approx(r.bits_per_trial / 0.4));
  CHECK(r.params.n_classes == 40);
}

TEST_CASE("itr rejects invalid input") {
  CHECK(error_code_of([] { itr(1, 0.5, 1.0, 0.0); }) == Errc::InvalidParam);
  CHECK(error_code_of([] { itr(40, 1.1, 1.0, 0.0); }) == Errc::InvalidParam);
  CHECK(error_code_of([] { itr(40, 0.5, 0.0, 0.0); }) == Errc::InvalidParam);
  CHECK(error_code_of([] { itr(40, 0.5, 1.0, -0.1); }) == Errc::InvalidParam);
}
