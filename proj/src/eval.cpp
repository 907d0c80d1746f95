#include "locfuse/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "locfuse/dataset.hpp"
#include "locfuse/error.hpp"
#include "locfuse/locate.hpp"

namespace locfuse {

SplitIndices monte_carlo_split(std::size_t n_samples, double test_fraction, Rng& rng) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error("bad-argument", "test_fraction must be in (0, 1)");
  }
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n_samples)));
  if (n_test < 1 || n_test >= n_samples) {
    throw Error("dataset-too-small",
                "round(test_fraction * N) must be >= 1 and < N, got " + std::to_string(n_test));
  }
  std::vector<std::size_t> idx(n_samples);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng.shuffle(idx);
  SplitIndices split;
  split.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

SplitIndices monte_carlo_split(const Dataset& dataset, double test_fraction, Rng& rng) {
  return monte_carlo_split(dataset.samples.size(), test_fraction, rng);
}

double horizontal_error(const Position& estimate, const Position& truth) {
  return std::hypot(estimate.x - truth.x, estimate.y - truth.y);
}

double Cdf::at(double e) const {
  // Index of the last support value <= e.
  const auto it = std::upper_bound(support.begin(), support.end(), e);
  if (it == support.begin()) return 0.0;
  return cumulative[static_cast<std::size_t>(it - support.begin()) - 1];
}

Cdf empirical_cdf(const std::vector<double>& errors) {
  if (errors.empty()) throw Error("empty-input", "cdf of an empty sample");
  std::vector<double> sorted(errors);
  std::sort(sorted.begin(), sorted.end());
  Cdf cdf;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;  // keep last duplicate
    cdf.support.push_back(sorted[i]);
    cdf.cumulative.push_back(static_cast<double>(i + 1) / n);
  }
  return cdf;
}

double percentile(const std::vector<double>& errors, double q) {
  if (errors.empty()) throw Error("empty-input", "percentile of an empty sample");
  if (!(q > 0.0 && q <= 1.0)) throw Error("bad-argument", "q must be in (0, 1]");
  std::vector<double> sorted(errors);
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  if (rank < 1) rank = 1;
  if (rank > sorted.size()) rank = sorted.size();
  return sorted[rank - 1];
}

const TechReport& ExperimentReport::tech(TechnologySelector sel) const {
  for (const TechReport& t : per_tech) {
    if (t.technology == sel) return t;
  }
  throw Error("bad-argument", std::string("technology not in report: ") + to_string(sel));
}

std::uint64_t experiment_iteration_seed(std::uint64_t master_seed, std::size_t iteration) {
  return derive_seed(master_seed, iteration);
}

namespace {

struct IterationResult {
  // Indexed by technology position in the config.
  std::vector<double> classify_accuracy;
  std::vector<double> regress_accuracy;
  std::vector<std::vector<double>> regress_errors;
};

struct PreparedTech {
  FeatureMatrix matrix;  // full dataset, rows aligned with dataset.samples
};

IterationResult run_iteration(const Dataset& dataset, const ExperimentConfig& config,
                              const std::vector<PreparedTech>& prepared, std::size_t iteration) {
  const std::uint64_t it_seed = experiment_iteration_seed(config.master_seed, iteration);
  Rng split_rng(derive_seed(it_seed, 0));
  const SplitIndices split = monte_carlo_split(dataset.samples.size(), config.test_fraction,
                                               split_rng);

  IterationResult result;
  result.classify_accuracy.resize(config.technologies.size());
  result.regress_accuracy.resize(config.technologies.size());
  result.regress_errors.resize(config.technologies.size());

  for (std::size_t t = 0; t < config.technologies.size(); ++t) {
    const FeatureMatrix& full = prepared[t].matrix;

    FeatureMatrix train;
    train.columns = full.columns;
    train.rows.reserve(split.train.size());
    std::vector<std::string> train_labels;
    std::vector<Position> train_targets;
    train_labels.reserve(split.train.size());
    train_targets.reserve(split.train.size());
    for (std::size_t i : split.train) {
      train.rows.push_back(full.rows[i]);
      train_labels.push_back(dataset.samples[i].zone_label);
      train_targets.push_back(dataset.samples[i].truth);
    }

    ForestParams cparams = config.classifier_params;
    cparams.seed = derive_seed(it_seed, 1 + 2 * t + 0);
    ForestParams rparams = config.regressor_params;
    rparams.seed = derive_seed(it_seed, 1 + 2 * t + 1);

    const Forest classifier = fit_forest(train, train_labels, cparams);
    const Forest regressor = fit_forest(train, train_targets, rparams);

    std::size_t classify_hits = 0;
    std::size_t regress_hits = 0;
    std::vector<double>& errors = result.regress_errors[t];
    errors.reserve(split.test.size());
    for (std::size_t i : split.test) {
      const Sample& sample = dataset.samples[i];
      if (predict_class(classifier, full.rows[i]) == sample.zone_label) ++classify_hits;
      const Position estimate = predict_position(regressor, full.rows[i]);
      errors.push_back(horizontal_error(estimate, sample.truth));
      if (zone_of(estimate, dataset.zones) == sample.zone_label) ++regress_hits;
    }
    const double n_test = static_cast<double>(split.test.size());
    result.classify_accuracy[t] = static_cast<double>(classify_hits) / n_test;
    result.regress_accuracy[t] = static_cast<double>(regress_hits) / n_test;
  }
  return result;
}

MethodStats summarize(std::vector<double> accuracies) {
  MethodStats stats;
  const double n = static_cast<double>(accuracies.size());
  double mean = 0.0;
  for (double a : accuracies) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : accuracies) var += (a - mean) * (a - mean);
  stats.mean_accuracy = mean;
  stats.std_accuracy = std::sqrt(var / n);
  stats.iteration_accuracy = std::move(accuracies);
  return stats;
}

}  // namespace

ExperimentReport run_experiment(const Dataset& dataset, const ExperimentConfig& config) {
  if (config.n_iterations < 1) throw Error("bad-argument", "n_iterations must be >= 1");
  if (config.technologies.empty()) throw Error("bad-argument", "no technologies configured");

  std::vector<PreparedTech> prepared;
  prepared.reserve(config.technologies.size());
  for (TechnologySelector sel : config.technologies) {
    prepared.push_back({feature_matrix(dataset, sel)});
  }

  // Iterations are independent; results land in slots indexed by iteration,
  // so any worker schedule yields the same report.
  std::vector<IterationResult> results(config.n_iterations);
  const unsigned workers = std::max(1u, config.n_workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < config.n_iterations; ++i) {
      results[i] = run_iteration(dataset, config, prepared, i);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= config.n_iterations) return;
          try {
            results[i] = run_iteration(dataset, config, prepared, i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  ExperimentReport report;
  for (std::size_t t = 0; t < config.technologies.size(); ++t) {
    TechReport tech;
    tech.technology = config.technologies[t];
    std::vector<double> classify_acc(config.n_iterations);
    std::vector<double> regress_acc(config.n_iterations);
    for (std::size_t i = 0; i < config.n_iterations; ++i) {
      classify_acc[i] = results[i].classify_accuracy[t];
      regress_acc[i] = results[i].regress_accuracy[t];
    }
    tech.classify = summarize(std::move(classify_acc));
    tech.regress = summarize(std::move(regress_acc));
    for (std::size_t i = 0; i < config.n_iterations; ++i) {
      tech.pooled_errors_m.insert(tech.pooled_errors_m.end(), results[i].regress_errors[t].begin(),
                                  results[i].regress_errors[t].end());
    }
    std::sort(tech.pooled_errors_m.begin(), tech.pooled_errors_m.end());
    tech.error_cdf = empirical_cdf(tech.pooled_errors_m);
    tech.error_p80_m = percentile(tech.pooled_errors_m, 0.80);
    report.per_tech.push_back(std::move(tech));
  }
  return report;
}

}  // namespace locfuse
