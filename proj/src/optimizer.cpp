#include "veplab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "veplab/error.hpp"
#include "veplab/rng.hpp"

namespace veplab {

namespace {

double row_distance(const Eigen::MatrixXd& responses, std::size_t a, std::size_t b) {
  return (responses.row(static_cast<Eigen::Index>(a)) - responses.row(static_cast<Eigen::Index>(b))).norm();
}

class DistanceTable {
 public:
  explicit DistanceTable(const Eigen::MatrixXd& responses)
      : n_(static_cast<std::size_t>(responses.rows())), d_(n_ * n_, 0.0) {
    const auto n = static_cast<long>(n_);
#pragma omp parallel for schedule(dynamic, 4)
    for (long a = 0; a < n; ++a) {
      for (std::size_t b = static_cast<std::size_t>(a) + 1; b < n_; ++b) {
        const double v = row_distance(responses, static_cast<std::size_t>(a), b);
        d_[static_cast<std::size_t>(a) * n_ + b] = v;
        d_[b * n_ + static_cast<std::size_t>(a)] = v;
      }
    }
  }

  double operator()(std::size_t a, std::size_t b) const { return d_[a * n_ + b]; }

  double min_over(std::span<const std::size_t> rows) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = i + 1; j < rows.size(); ++j) best = std::min(best, (*this)(rows[i], rows[j]));
    }
    return best;
  }

 private:
  std::size_t n_;
  std::vector<double> d_;
};

// First k entries of a uniform random permutation of 0..n-1.
std::vector<std::size_t> partial_shuffle(CounterRng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

double auto_temperature(const DistanceTable& table, std::span<const std::size_t> subset) {
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    for (std::size_t j = i + 1; j < subset.size(); ++j) {
      const double d = table(subset[i], subset[j]);
      sum += d;
      sum_sq += d * d;
      ++count;
    }
  }
  if (count < 2) return 1.0;
  const double mean = sum / static_cast<double>(count);
  const double var = std::max(0.0, sum_sq / static_cast<double>(count) - mean * mean);
  return var > 0.0 ? std::sqrt(var) : 1.0;
}

RestartTrace anneal(const DistanceTable& table, std::size_t pool, const SaConfig& config,
                    std::uint64_t restart) {
  CounterRng rng(config.seed, restart);
  const std::size_t k = config.select_size;
  auto order = partial_shuffle(rng, pool, k);
  std::vector<std::size_t> selected(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::size_t> unselected(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());

  RestartTrace trace;
  double current = table.min_over(selected);
  trace.best_objective = current;
  trace.best_subset = selected;
  std::sort(trace.best_subset.begin(), trace.best_subset.end());
  double temperature = config.initial_temp ? *config.initial_temp : auto_temperature(table, selected);
  trace.initial_temp = temperature;
  if (unselected.empty()) return trace;

  trace.steps.reserve(static_cast<std::size_t>(config.iterations));
  for (int it = 0; it < config.iterations; ++it) {
    const auto i = static_cast<std::size_t>(rng.below(k));
    const auto j = static_cast<std::size_t>(rng.below(unselected.size()));
    std::swap(selected[i], unselected[j]);
    const double candidate = table.min_over(selected);
    const double delta = candidate - current;
    const bool accept = delta > 0.0 || rng.uniform() < std::exp(delta / temperature);
    if (accept) {
      current = candidate;
      if (current > trace.best_objective) {
        trace.best_objective = current;
        trace.best_subset = selected;
        std::sort(trace.best_subset.begin(), trace.best_subset.end());
      }
    } else {
      std::swap(selected[i], unselected[j]);
    }
    trace.steps.push_back({current, accept, temperature, trace.best_objective});
    temperature *= config.cooling;
  }
  return trace;
}

}  // namespace

void validate(const SaConfig& config, std::size_t pool_size) {
  if (config.iterations < 1) fail(Errc::InvalidConfig, "SA iterations must be positive");
  if (!(config.cooling > 0.0 && config.cooling < 1.0)) fail(Errc::InvalidConfig, "cooling must lie in (0, 1)");
  if (config.initial_temp && !(*config.initial_temp > 0.0)) {
    fail(Errc::InvalidConfig, "initial temperature must be positive");
  }
  if (config.restarts < 1) fail(Errc::InvalidConfig, "restarts must be positive");
  if (config.select_size < 2) fail(Errc::InvalidConfig, "select size must be at least 2");
  if (config.select_size > pool_size) {
    fail(Errc::InvalidConfig, "select size " + std::to_string(config.select_size) + " exceeds pool size " +
                                  std::to_string(pool_size));
  }
}

Eigen::MatrixXd estimate_group_responses(const Trf& trf, const CodeSet& pool) {
  validate(pool, true);
  if (pool.codes.empty()) fail(Errc::InvalidParam, "empty code pool");
  const auto first = upsample_to_signal(pool.codes.front(), trf.sample_rate_hz);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(pool.size()), static_cast<Eigen::Index>(first.size()));
  for (std::size_t r = 0; r < pool.size(); ++r) {
    const auto predicted = predict_response(trf, upsample_to_signal(pool.codes[r], trf.sample_rate_hz));
    out.row(static_cast<Eigen::Index>(r)) =
        Eigen::Map<const Eigen::RowVectorXd>(predicted.samples.data(), static_cast<Eigen::Index>(predicted.size()));
  }
  return out;
}

double min_pairwise_distance(const Eigen::MatrixXd& responses, std::span<const std::size_t> rows) {
  if (rows.size() < 2) fail(Errc::TooFewRows, "minimum distance needs at least 2 rows");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= static_cast<std::size_t>(responses.rows())) fail(Errc::InvalidParam, "row index out of range");
    for (std::size_t j = i + 1; j < rows.size(); ++j) best = std::min(best, row_distance(responses, rows[i], rows[j]));
  }
  return best;
}

double min_pairwise_distance(const Eigen::MatrixXd& responses) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(responses.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  return min_pairwise_distance(responses, rows);
}

OptimizationTrace sa_optimize(const Eigen::MatrixXd& responses, const SaConfig& config) {
  const auto pool = static_cast<std::size_t>(responses.rows());
  validate(config, pool);
  const DistanceTable table(responses);

  OptimizationTrace out;
  out.restarts.resize(static_cast<std::size_t>(config.restarts));
#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < config.restarts; ++r) {
    out.restarts[static_cast<std::size_t>(r)] = anneal(table, pool, config, static_cast<std::uint64_t>(r));
  }
  out.best_restart = 0;
  for (std::size_t r = 1; r < out.restarts.size(); ++r) {
    if (out.restarts[r].best_objective > out.restarts[out.best_restart].best_objective) out.best_restart = r;
  }
  out.best_objective = out.restarts[out.best_restart].best_objective;
  out.best_subset = out.restarts[out.best_restart].best_subset;
  return out;
}

CodeSet select_codes(const CodeSet& pool, std::span<const std::size_t> rows, CodeStage stage,
                     std::optional<double> objective) {
  CodeSet out;
  out.stage = stage;
  out.objective = objective;
  out.params = pool.params;
  for (std::size_t r : rows) {
    if (r >= pool.size()) fail(Errc::InvalidParam, "selected row out of range");
    out.codes.push_back(pool.codes[r]);
  }
  return out;
}

namespace {

struct RestrictionIndex {
  std::vector<std::vector<std::size_t>> trials_by_column;  // per model class index
  std::vector<std::size_t> truth_column;                   // per trial
};

RestrictionIndex index_trials(const DecoderModel& model, const Recording& recording) {
  RestrictionIndex idx;
  idx.trials_by_column.resize(model.class_ids.size());
  for (std::size_t i = 0; i < recording.n_trials(); ++i) {
    const std::size_t col = model.index_of(static_cast<int>(recording.labels()[i]));
    idx.trials_by_column[col].push_back(i);
    idx.truth_column.push_back(col);
  }
  return idx;
}

// `columns` ascending, so strict > keeps the lowest class id on ties.
double accuracy_over(const kernels::ScoreTable& scores, const RestrictionIndex& idx,
                     std::span<const std::size_t> columns) {
  std::size_t total = 0;
  std::size_t correct = 0;
  for (std::size_t col : columns) {
    for (std::size_t trial : idx.trials_by_column[col]) {
      const auto row = static_cast<Eigen::Index>(trial);
      std::size_t best = columns.front();
      for (std::size_t c : columns) {
        if (scores.scores(row, static_cast<Eigen::Index>(c)) > scores.scores(row, static_cast<Eigen::Index>(best))) {
          best = c;
        }
      }
      ++total;
      if (best == col) ++correct;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

double restricted_accuracy(const DecoderModel& model, const Recording& recording,
                           const kernels::ScoreTable& scores, std::span<const int> class_ids) {
  const auto idx = index_trials(model, recording);
  std::vector<std::size_t> columns;
  for (int c : class_ids) columns.push_back(model.index_of(c));
  std::sort(columns.begin(), columns.end());
  if (columns.empty()) fail(Errc::InvalidParam, "empty class subset");
  return accuracy_over(scores, idx, columns);
}

PersonalSelection personal_optimize(const DecoderModel& model, const Recording& recording,
                                    std::size_t subset_size, std::size_t n_samples, std::uint64_t seed,
                                    std::optional<double> window_s) {
  const std::size_t pool = model.class_ids.size();
  if (subset_size > pool) {
    fail(Errc::SubsetTooLarge, "subset of " + std::to_string(subset_size) + " from a pool of " +
                                   std::to_string(pool) + " classes");
  }
  if (subset_size < 1) fail(Errc::InvalidParam, "subset size must be positive");
  if (n_samples < 1) fail(Errc::InvalidParam, "sample count must be positive");
  const double window = window_s.value_or(static_cast<double>(model.window_samples) / model.sample_rate_hz);
  const std::size_t window_samples = window_to_samples(model, window, recording.n_samples());
  const auto scores = score_trials(model, recording, window_samples);
  const auto idx = index_trials(model, recording);

  PersonalSelection out;
  out.sampled_accuracies.resize(n_samples);
  std::vector<std::vector<std::size_t>> subsets(n_samples);
  const auto n = static_cast<long>(n_samples);
#pragma omp parallel for schedule(static)
  for (long s = 0; s < n; ++s) {
    CounterRng rng(seed, static_cast<std::uint64_t>(s));
    auto order = partial_shuffle(rng, pool, subset_size);
    std::vector<std::size_t> columns(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(subset_size));
    std::sort(columns.begin(), columns.end());
    out.sampled_accuracies[static_cast<std::size_t>(s)] = accuracy_over(scores, idx, columns);
    subsets[static_cast<std::size_t>(s)] = std::move(columns);
  }
  out.sample_index = 0;
  for (std::size_t s = 1; s < n_samples; ++s) {
    if (out.sampled_accuracies[s] > out.sampled_accuracies[out.sample_index]) out.sample_index = s;
  }
  out.accuracy = out.sampled_accuracies[out.sample_index];
  for (std::size_t col : subsets[out.sample_index]) out.class_ids.push_back(model.class_ids[col]);
  return out;
}

}  // namespace veplab
