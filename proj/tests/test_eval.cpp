#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "locfuse/dataset.hpp"
#include "locfuse/error.hpp"
#include "locfuse/eval.hpp"
#include "locfuse/experiment_io.hpp"
#include "locfuse/locate.hpp"
#include "locfuse/propagation.hpp"

using namespace locfuse;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig config;
  config.n_iterations = 4;
  config.master_seed = 91;
  config.classifier_params.n_trees = 12;
  config.regressor_params.n_trees = 12;
  return config;
}

}  // namespace

TEST_CASE("monte_carlo_split: sizes follow the rounding rule") {
  Rng rng(1);
  const SplitIndices a = monte_carlo_split(std::size_t{250}, 0.2, rng);
  CHECK(a.test.size() == 50);
  CHECK(a.train.size() == 200);

  Rng rng2(1);
  const SplitIndices b = monte_carlo_split(std::size_t{5}, 0.2, rng2);
  CHECK(b.test.size() == 1);
  CHECK(b.train.size() == 4);

  Rng rng3(1);
  CHECK_THROWS_AS(monte_carlo_split(std::size_t{2}, 0.2, rng3), Error);  // round(0.4) = 0
  CHECK_THROWS_AS(monte_carlo_split(std::size_t{10}, 0.0, rng3), Error);
  CHECK_THROWS_AS(monte_carlo_split(std::size_t{10}, 1.0, rng3), Error);
}

TEST_CASE("monte_carlo_split: determinism and partition laws") {
  Rng a(42), b(42);
  const SplitIndices sa = monte_carlo_split(std::size_t{100}, 0.2, a);
  const SplitIndices sb = monte_carlo_split(std::size_t{100}, 0.2, b);
  CHECK(sa.test == sb.test);
  CHECK(sa.train == sb.train);

  Rng gen(7);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 5 + gen.below(200);
    const double fraction = 0.05 + 0.9 * gen.next_double();
    const auto n_test = static_cast<std::size_t>(std::llround(fraction * double(n)));
    if (n_test < 1 || n_test >= n) continue;
    Rng rng(trial);
    const SplitIndices s = monte_carlo_split(n, fraction, rng);
    CHECK(s.test.size() == n_test);
    std::set<std::size_t> all(s.test.begin(), s.test.end());
    for (std::size_t i : s.train) CHECK(all.insert(i).second);  // disjoint
    CHECK(all.size() == n);                                     // union is everything
    CHECK(*all.rbegin() == n - 1);
  }
}

TEST_CASE("monte_carlo_split draws test sets uniformly") {
  // Every index should land in the 1-element test set about equally often.
  std::vector<int> hits(10, 0);
  for (int i = 0; i < 5000; ++i) {
    Rng rng(derive_seed(1234, i));
    const SplitIndices s = monte_carlo_split(std::size_t{10}, 0.1, rng);
    ++hits[s.test[0]];
  }
  for (int h : hits) {
    CHECK(h > 350);
    CHECK(h < 650);
  }
}

TEST_CASE("horizontal_error: 3-4-5, zero, z ignored") {
  CHECK(horizontal_error({3, 4, 0}, {0, 0, 0}) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(horizontal_error({2, 2, 0}, {2, 2, 0}) == 0.0);
  CHECK(horizontal_error({1, 1, 5}, {1, 1, 0}) == 0.0);
}

TEST_CASE("empirical_cdf: hand counts and shape") {
  const Cdf cdf = empirical_cdf({1, 2, 3, 4, 5});
  CHECK(cdf.at(3.0) == doctest::Approx(0.6).epsilon(1e-15));  // 3 of 5
  CHECK(cdf.at(5.0) == 1.0);
  CHECK(cdf.at(100.0) == 1.0);
  CHECK(cdf.at(-1.0) == 0.0);
  CHECK(cdf.at(0.999) == 0.0);
  CHECK(cdf.at(1.0) == doctest::Approx(0.2).epsilon(1e-15));

  CHECK_THROWS_AS(empirical_cdf({}), Error);
}

TEST_CASE("empirical_cdf: nondecreasing, F(min) >= 1/N, F(max) = 1") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> errors;
    const std::size_t n = 1 + rng.below(300);
    for (std::size_t i = 0; i < n; ++i) {
      errors.push_back(rng.uniform(0, 12));
      if (rng.next_double() < 0.2 && !errors.empty()) errors.push_back(errors.back());  // duplicates
    }
    const Cdf cdf = empirical_cdf(errors);
    for (std::size_t i = 1; i < cdf.cumulative.size(); ++i) {
      CHECK(cdf.cumulative[i] > cdf.cumulative[i - 1]);
      CHECK(cdf.support[i] > cdf.support[i - 1]);
    }
    CHECK(cdf.cumulative.front() >= 1.0 / static_cast<double>(errors.size()) - 1e-12);
    CHECK(cdf.cumulative.back() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("percentile: hand enumeration and membership") {
  const std::vector<double> errors = {1, 2, 3, 4, 5};
  CHECK(percentile(errors, 0.8) == 4.0);  // smallest e with F(e) >= 0.8
  CHECK(percentile(errors, 1.0) == 5.0);
  CHECK(percentile(errors, 0.2) == 1.0);
  CHECK(percentile(errors, 0.21) == 2.0);
  CHECK(percentile({7.5}, 0.01) == 7.5);
  CHECK(percentile({7.5}, 1.0) == 7.5);
  CHECK_THROWS_AS(percentile({}, 0.5), Error);
  CHECK_THROWS_AS(percentile(errors, 0.0), Error);
  CHECK_THROWS_AS(percentile(errors, 1.5), Error);

  Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> sample;
    const std::size_t n = 1 + rng.below(80);
    for (std::size_t i = 0; i < n; ++i) sample.push_back(rng.uniform(0, 30));
    const double q = 0.01 + 0.99 * rng.next_double();
    const double p = percentile(sample, q);
    CHECK(std::count(sample.begin(), sample.end(), p) >= 1);  // always a sample member
    const Cdf cdf = empirical_cdf(sample);
    CHECK(cdf.at(p) >= q - 1e-12);
  }
}

TEST_CASE("run_experiment: deterministic under a fixed master seed") {
  const Dataset d = generate_dataset(reference_scenario(), 60, 5);
  const ExperimentConfig config = tiny_config();
  const ExperimentReport a = run_experiment(d, config);
  const ExperimentReport b = run_experiment(d, config);
  CHECK(write_report_summary_csv(a) == write_report_summary_csv(b));
  for (std::size_t t = 0; t < a.per_tech.size(); ++t) {
    CHECK(a.per_tech[t].pooled_errors_m == b.per_tech[t].pooled_errors_m);
    CHECK(a.per_tech[t].classify.iteration_accuracy == b.per_tech[t].classify.iteration_accuracy);
  }
}

TEST_CASE("run_experiment: parallel equals serial") {
  const Dataset d = generate_dataset(reference_scenario(), 60, 5);
  ExperimentConfig config = tiny_config();
  config.n_workers = 1;
  const ExperimentReport serial = run_experiment(d, config);
  config.n_workers = 3;
  const ExperimentReport parallel = run_experiment(d, config);
  CHECK(write_report_summary_csv(serial) == write_report_summary_csv(parallel));
  for (std::size_t t = 0; t < serial.per_tech.size(); ++t) {
    CHECK(serial.per_tech[t].pooled_errors_m == parallel.per_tech[t].pooled_errors_m);
    CHECK(serial.per_tech[t].regress.iteration_accuracy ==
          parallel.per_tech[t].regress.iteration_accuracy);
  }
}

TEST_CASE("run_experiment: constant-label dataset scores accuracy 1.0") {
  Scenario sc = reference_scenario();
  sc.sampling_region = {1.0, 1.0, 6.0, 4.0};  // strictly inside lab1
  const Dataset d = generate_dataset(sc, 50, 9);
  for (const Sample& s : d.samples) REQUIRE(s.zone_label == "lab1");
  const ExperimentReport report = run_experiment(d, tiny_config());
  for (const TechReport& t : report.per_tech) {
    CHECK(t.classify.mean_accuracy == 1.0);
    // Regression targets stay in lab1's hull, so zone_of must return lab1.
    CHECK(t.regress.mean_accuracy == 1.0);
  }
}

TEST_CASE("run_experiment report is internally consistent with its sub-seed scheme") {
  const Dataset d = generate_dataset(reference_scenario(), 60, 5);
  const ExperimentConfig config = tiny_config();
  const ExperimentReport report = run_experiment(d, config);

  // Recompute iteration 2 by hand for the fusion slot (index 2 in defaults).
  const std::size_t iteration = 2;
  const std::uint64_t it_seed = experiment_iteration_seed(config.master_seed, iteration);
  Rng split_rng(derive_seed(it_seed, 0));
  const SplitIndices split = monte_carlo_split(d, config.test_fraction, split_rng);

  const FeatureMatrix full = feature_matrix(d, TechnologySelector::Fusion);
  FeatureMatrix train;
  train.columns = full.columns;
  std::vector<std::string> labels;
  std::vector<Position> targets;
  for (std::size_t i : split.train) {
    train.rows.push_back(full.rows[i]);
    labels.push_back(d.samples[i].zone_label);
    targets.push_back(d.samples[i].truth);
  }
  const std::size_t tech_index = 2;  // {5g, wifi, fusion}
  ForestParams cparams = config.classifier_params;
  cparams.seed = derive_seed(it_seed, 1 + 2 * tech_index + 0);
  ForestParams rparams = config.regressor_params;
  rparams.seed = derive_seed(it_seed, 1 + 2 * tech_index + 1);
  const Forest classifier = fit_forest(train, labels, cparams);
  const Forest regressor = fit_forest(train, targets, rparams);

  std::size_t classify_hits = 0, regress_hits = 0;
  for (std::size_t i : split.test) {
    if (predict_class(classifier, full.rows[i]) == d.samples[i].zone_label) ++classify_hits;
    if (regress_then_classify(regressor, full.rows[i], d.zones) == d.samples[i].zone_label) {
      ++regress_hits;
    }
  }
  const double n_test = static_cast<double>(split.test.size());
  const TechReport& fusion = report.tech(TechnologySelector::Fusion);
  CHECK(fusion.classify.iteration_accuracy[iteration] ==
        doctest::Approx(classify_hits / n_test).epsilon(1e-15));
  CHECK(fusion.regress.iteration_accuracy[iteration] ==
        doctest::Approx(regress_hits / n_test).epsilon(1e-15));
}

TEST_CASE("report invariants: accuracies in [0,1], cdf consistent with percentile") {
  const Dataset d = generate_dataset(reference_scenario(), 60, 8);
  const ExperimentReport report = run_experiment(d, tiny_config());
  for (const TechReport& t : report.per_tech) {
    CHECK(t.classify.mean_accuracy >= 0.0);
    CHECK(t.classify.mean_accuracy <= 1.0);
    CHECK(t.regress.mean_accuracy >= 0.0);
    CHECK(t.regress.mean_accuracy <= 1.0);
    CHECK(std::is_sorted(t.pooled_errors_m.begin(), t.pooled_errors_m.end()));
    CHECK(t.error_p80_m == percentile(t.pooled_errors_m, 0.80));
    CHECK(t.error_cdf.at(t.error_p80_m) >= 0.80);
  }
}

TEST_CASE("experiment config round-trips and applies overrides") {
  ExperimentConfig config = tiny_config();
  config.technologies = {TechnologySelector::WiFi, TechnologySelector::Fusion};
  config.classifier_params.max_depth = 6;
  config.regressor_params.bootstrap = false;
  const std::string text = write_experiment_config(config);
  const ExperimentConfig back = parse_experiment_config(text);
  CHECK(back.test_fraction == config.test_fraction);
  CHECK(back.n_iterations == config.n_iterations);
  CHECK(back.master_seed == config.master_seed);
  CHECK(back.technologies == config.technologies);
  CHECK(back.classifier_params == config.classifier_params);
  CHECK(back.regressor_params == config.regressor_params);

  const ExperimentConfig defaults = parse_experiment_config("");
  CHECK(defaults.test_fraction == 0.20);
  CHECK(defaults.n_iterations == 1000);
  CHECK(defaults.technologies.size() == 3);

  CHECK_THROWS_AS(parse_experiment_config("[experiment]\ntechnologies = lte\n"), Error);
  CHECK_THROWS_AS(parse_experiment_config("[forest classify]\nbootstrap = maybe\n"), Error);
}
