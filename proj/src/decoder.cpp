#include "veplab/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "veplab/error.hpp"

namespace veplab {

namespace {

std::size_t resolve_window(const Recording& recording, std::size_t window_samples) {
  if (window_samples == 0) return recording.n_samples();
  if (window_samples > recording.n_samples()) {
    fail(Errc::WindowTooLong, "window of " + std::to_string(window_samples) +
                                  " samples exceeds trial length " + std::to_string(recording.n_samples()));
  }
  return window_samples;
}

// Class means over the first `window` samples, in recording.class_ids() order.
std::vector<RowMatrix> class_means(const Recording& recording, const std::vector<int>& classes,
                                   std::size_t window) {
  std::vector<RowMatrix> means;
  const auto ch = static_cast<Eigen::Index>(recording.n_channels());
  const auto w = static_cast<Eigen::Index>(window);
  for (int c : classes) {
    const auto trials = recording.trials_of(c);
    RowMatrix mean = RowMatrix::Zero(ch, w);
    for (std::size_t i : trials) mean += recording.trial(i).leftCols(w);
    mean /= static_cast<double>(trials.size());
    means.push_back(std::move(mean));
  }
  return means;
}

std::vector<RowMatrix> filter_trials(const Eigen::MatrixXd& weights, const Recording& recording,
                                     std::size_t window) {
  std::vector<RowMatrix> out(recording.n_trials());
  const auto w = static_cast<Eigen::Index>(window);
  const auto n = static_cast<long>(recording.n_trials());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = weights.transpose() * recording.trial(static_cast<std::size_t>(i)).leftCols(w);
  }
  return out;
}

}  // namespace

ScatterMatrices scatter_matrices(const Recording& recording, std::size_t window_samples) {
  recording.validate();
  const std::size_t window = resolve_window(recording, window_samples);
  const auto classes = recording.class_ids();
  if (classes.size() < 2) fail(Errc::TooFewTrials, "scatter matrices need at least 2 classes");
  for (int c : classes) {
    if (recording.trials_of(c).size() < 2) {
      fail(Errc::DegenerateClass, "class " + std::to_string(c) + " has a single trial");
    }
  }
  const auto means = class_means(recording, classes, window);
  const auto ch = static_cast<Eigen::Index>(recording.n_channels());
  const auto w = static_cast<Eigen::Index>(window);

  RowMatrix grand = RowMatrix::Zero(ch, w);
  for (std::size_t i = 0; i < recording.n_trials(); ++i) grand += recording.trial(i).leftCols(w);
  grand /= static_cast<double>(recording.n_trials());

  std::vector<RowMatrix> between;
  between.reserve(means.size());
  for (const auto& m : means) between.push_back(m - grand);

  std::vector<std::size_t> class_index(recording.n_trials());
  for (std::size_t i = 0; i < recording.n_trials(); ++i) {
    const auto label = static_cast<int>(recording.labels()[i]);
    class_index[i] = static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), label) -
                                              classes.begin());
  }
  std::vector<RowMatrix> within(recording.n_trials());
  for (std::size_t i = 0; i < recording.n_trials(); ++i) {
    within[i] = recording.trial(i).leftCols(w) - means[class_index[i]];
  }

  ScatterMatrices out;
  out.between = kernels::parallel::scatter(between) / static_cast<double>(classes.size());
  out.within = kernels::parallel::scatter(within) / static_cast<double>(recording.n_trials());
  return out;
}

std::size_t DecoderModel::index_of(int class_id) const {
  const auto it = std::lower_bound(class_ids.begin(), class_ids.end(), class_id);
  if (it == class_ids.end() || *it != class_id) {
    fail(Errc::UnknownClass, "class " + std::to_string(class_id) + " not in decoder model");
  }
  return static_cast<std::size_t>(it - class_ids.begin());
}

DecoderModel DecoderModel::restricted(std::span<const int> ids) const {
  std::vector<int> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    fail(Errc::InvalidParam, "duplicate class id in restriction");
  }
  DecoderModel out = *this;
  out.class_ids = sorted;
  out.templates.clear();
  for (int c : sorted) out.templates.push_back(templates[index_of(c)]);
  return out;
}

std::vector<double> DecoderModel::component_weights(int component) const {
  if (component < 0 || component >= weights.cols()) fail(Errc::InvalidParam, "component out of range");
  const Eigen::VectorXd col = weights.col(component);
  return {col.data(), col.data() + col.size()};
}

DecoderModel train_tdca(const Recording& recording, int n_components, double shrinkage_gamma,
                        std::optional<double> window_s) {
  const auto n_ch = static_cast<int>(recording.n_channels());
  if (n_components < 1 || n_components > n_ch) {
    fail(Errc::InvalidParam, "n_components must be in [1, " + std::to_string(n_ch) + "]");
  }
  if (!(shrinkage_gamma >= 0.0 && shrinkage_gamma <= 1.0)) {
    fail(Errc::InvalidParam, "shrinkage gamma must lie in [0, 1]");
  }
  std::size_t window = recording.n_samples();
  if (window_s) {
    window = static_cast<std::size_t>(std::lround(*window_s * recording.sample_rate_hz()));
    if (window < 1) fail(Errc::InvalidParam, "training window shorter than one sample");
    window = resolve_window(recording, window);
  }
  const auto scatter = scatter_matrices(recording, window);

  double level = scatter.within.trace() / n_ch;
  if (!(level > 0.0)) level = scatter.between.trace() / n_ch;
  if (!(level > 0.0)) level = 1.0;
  Eigen::MatrixXd denom = scatter.within;
  denom.diagonal().array() += shrinkage_gamma * level;

  // Reduce to a standard symmetric problem through the Cholesky factor of the denominator.
  Eigen::LLT<Eigen::MatrixXd> chol(denom);
  if (chol.info() != Eigen::Success || (chol.matrixL().toDenseMatrix().diagonal().array() <= 0.0).any()) {
    fail(Errc::EigSolverFailure, "within-class scatter is not positive definite; increase gamma");
  }
  const Eigen::MatrixXd lower = chol.matrixL();
  Eigen::MatrixXd reduced = lower.triangularView<Eigen::Lower>().solve(scatter.between);
  reduced = lower.triangularView<Eigen::Lower>().solve(reduced.transpose()).transpose();
  reduced = 0.5 * (reduced + reduced.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reduced);
  if (eig.info() != Eigen::Success) fail(Errc::EigSolverFailure, "eigen decomposition did not converge");
  const Eigen::MatrixXd vectors = lower.transpose().triangularView<Eigen::Upper>().solve(eig.eigenvectors());

  DecoderModel model;
  model.n_components = n_components;
  model.shrinkage_gamma = shrinkage_gamma;
  model.window_samples = window;
  model.sample_rate_hz = recording.sample_rate_hz();
  model.weights.resize(n_ch, n_components);
  for (int k = 0; k < n_components; ++k) {
    const Eigen::Index src = n_ch - 1 - k;  // eigenvalues come ascending
    Eigen::VectorXd w = vectors.col(src);
    Eigen::Index peak = 0;
    w.cwiseAbs().maxCoeff(&peak);
    if (w(peak) < 0.0) w = -w;
    model.weights.col(k) = w;
    model.eigenvalues.push_back(eig.eigenvalues()(src));
  }

  model.class_ids = recording.class_ids();
  for (const auto& mean : class_means(recording, model.class_ids, window)) {
    model.templates.push_back(model.weights.transpose() * mean);
  }
  return model;
}

std::size_t window_to_samples(const DecoderModel& model, double window_s, std::size_t trial_samples) {
  const double exact = window_s * model.sample_rate_hz;
  const auto samples = static_cast<std::size_t>(std::max(0L, std::lround(exact)));
  if (samples < 2) fail(Errc::InvalidParam, "classification window shorter than two samples");
  if (samples > trial_samples || samples > model.window_samples) {
    fail(Errc::WindowTooLong, "window " + std::to_string(window_s) + " s exceeds the trial or the trained window");
  }
  return samples;
}

kernels::ScoreTable score_trials(const DecoderModel& model, const Recording& recording,
                                 std::size_t window_samples) {
  if (recording.n_channels() != model.n_channels()) {
    fail(Errc::InvalidParam, "recording channel count differs from the model");
  }
  const auto filtered = filter_trials(model.weights, recording, window_samples);
  return kernels::parallel::correlation_scores(filtered, model.templates,
                                               static_cast<Eigen::Index>(window_samples));
}

namespace {

std::size_t argmax_lowest(const Eigen::MatrixXd& scores, Eigen::Index row) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < scores.cols(); ++c) {
    if (scores(row, c) > scores(row, best)) best = c;
  }
  return static_cast<std::size_t>(best);
}

}  // namespace

Classification classify(const DecoderModel& model, const Recording::TrialView& trial, double window_s) {
  if (static_cast<std::size_t>(trial.rows()) != model.n_channels()) {
    fail(Errc::InvalidParam, "trial channel count differs from the model");
  }
  if (model.class_ids.empty()) fail(Errc::InvalidParam, "model has no classes");
  const std::size_t window = window_to_samples(model, window_s, static_cast<std::size_t>(trial.cols()));
  const auto w = static_cast<Eigen::Index>(window);
  std::vector<RowMatrix> filtered{RowMatrix(model.weights.transpose() * trial.leftCols(w))};
  const auto table = kernels::serial::correlation_scores(filtered, model.templates, w);

  Classification out;
  out.scores.assign(table.scores.data(), table.scores.data() + table.scores.size());
  out.degenerate = table.degenerate.front() != 0;
  out.class_id = model.class_ids[argmax_lowest(table.scores, 0)];
  return out;
}

Evaluation evaluate(const DecoderModel& model, const Recording& recording, double window_s) {
  recording.validate();
  if (recording.n_trials() == 0) fail(Errc::TooFewTrials, "no trials to evaluate");
  if (model.class_ids.empty()) fail(Errc::InvalidParam, "model has no classes");
  const std::size_t window = window_to_samples(model, window_s, recording.n_samples());
  std::vector<std::size_t> truth(recording.n_trials());
  for (std::size_t i = 0; i < recording.n_trials(); ++i) {
    truth[i] = model.index_of(static_cast<int>(recording.labels()[i]));
  }
  const auto table = score_trials(model, recording, window);

  Evaluation out;
  out.class_ids = model.class_ids;
  out.n_trials = recording.n_trials();
  const auto n_classes = static_cast<Eigen::Index>(model.class_ids.size());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n_classes, n_classes);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < recording.n_trials(); ++i) {
    const std::size_t predicted = argmax_lowest(table.scores, static_cast<Eigen::Index>(i));
    out.predicted.push_back(model.class_ids[predicted]);
    counts(static_cast<Eigen::Index>(truth[i]), static_cast<Eigen::Index>(predicted)) += 1.0;
    if (predicted == truth[i]) ++correct;
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(recording.n_trials());
  out.confusion = counts;
  for (Eigen::Index r = 0; r < n_classes; ++r) {
    const double total = counts.row(r).sum();
    if (total > 0.0) out.confusion.row(r) /= total;
  }
  return out;
}

Evaluation cross_validate(const Recording& recording, std::size_t n_blocks, int n_components,
                          double shrinkage_gamma, double window_s) {
  if (n_blocks < 2) fail(Errc::InvalidParam, "cross-validation needs at least 2 blocks");
  const auto blocks = block_partition(recording.n_trials(), n_blocks);
  const auto classes = recording.class_ids();
  const auto n_classes = static_cast<Eigen::Index>(classes.size());

  Evaluation out;
  out.class_ids = classes;
  out.n_trials = recording.n_trials();
  out.predicted.assign(recording.n_trials(), 0);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n_classes, n_classes);
  std::size_t correct = 0;
  for (std::size_t held = 0; held < n_blocks; ++held) {
    std::vector<std::size_t> train_idx;
    for (std::size_t b = 0; b < n_blocks; ++b) {
      if (b != held) train_idx.insert(train_idx.end(), blocks[b].begin(), blocks[b].end());
    }
    const auto model = train_tdca(recording.subset(train_idx), n_components, shrinkage_gamma, window_s);
    const auto result = evaluate(model, recording.subset(blocks[held]), window_s);
    for (std::size_t k = 0; k < blocks[held].size(); ++k) {
      const std::size_t i = blocks[held][k];
      const int truth = static_cast<int>(recording.labels()[i]);
      const int predicted = result.predicted[k];
      out.predicted[i] = predicted;
      const auto r = std::lower_bound(classes.begin(), classes.end(), truth) - classes.begin();
      const auto c = std::lower_bound(classes.begin(), classes.end(), predicted) - classes.begin();
      counts(r, c) += 1.0;
      if (truth == predicted) ++correct;
    }
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(recording.n_trials());
  out.confusion = counts;
  for (Eigen::Index r = 0; r < n_classes; ++r) {
    const double total = counts.row(r).sum();
    if (total > 0.0) out.confusion.row(r) /= total;
  }
  return out;
}

Eigen::MatrixXd class_correlation_matrix(const DecoderModel& model, const Recording& recording,
                                         double window_s) {
  const auto classes = recording.class_ids();
  if (classes.size() < 2) fail(Errc::TooFewTrials, "correlation matrix needs at least 2 classes");
  if (recording.n_channels() != model.n_channels()) {
    fail(Errc::InvalidParam, "recording channel count differs from the model");
  }
  const std::size_t window = window_to_samples(model, window_s, recording.n_samples());
  const auto means = class_means(recording, classes, window);
  std::vector<RowMatrix> templates;
  for (const auto& m : means) {
    RowMatrix t = model.weights.transpose() * m;
    for (Eigen::Index k = 0; k < t.rows(); ++k) {
      if (kernels::is_flat({t.row(k).data(), static_cast<std::size_t>(t.cols())})) {
        fail(Errc::DegenerateTemplate, "filtered class template has zero variance");
      }
    }
    templates.push_back(std::move(t));
  }
  const auto table = kernels::parallel::correlation_scores(templates, templates,
                                                           static_cast<Eigen::Index>(window));
  Eigen::MatrixXd out = table.scores / static_cast<double>(model.weights.cols());
  out = 0.5 * (out + out.transpose());
  out.diagonal().setOnes();
  return out;
}

double fisher_objective(const Eigen::MatrixXd& weights, const ScatterMatrices& scatter) {
  const double num = (weights.transpose() * scatter.between * weights).trace();
  const double den = (weights.transpose() * scatter.within * weights).trace();
  return num / den;
}

ItrResult itr(int n_classes, double accuracy, double stim_time_s, double gaze_time_s) {
  if (n_classes < 2) fail(Errc::InvalidParam, "ITR needs at least 2 classes");
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) fail(Errc::InvalidParam, "accuracy must lie in [0, 1]");
  if (!(stim_time_s > 0.0) || !(gaze_time_s >= 0.0)) fail(Errc::InvalidParam, "invalid trial timing");
  const double m = n_classes;
  double bits = std::log2(m);
  if (accuracy > 0.0) bits += accuracy * std::log2(accuracy);
  if (accuracy < 1.0) bits += (1.0 - accuracy) * std::log2((1.0 - accuracy) / (m - 1.0));
  bits = std::clamp(bits, 0.0, std::log2(m));

  ItrResult out;
  out.bits_per_trial = bits;
  out.itr_bpm = 60.0 * bits / (stim_time_s + gaze_time_s);
  out.itr_star_bps = bits / stim_time_s;
  out.params = {n_classes, accuracy, stim_time_s, gaze_time_s};
  return out;
}

}  // namespace veplab
