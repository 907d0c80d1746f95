#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "locfuse/forest.hpp"
#include "locfuse/rng.hpp"
#include "locfuse/types.hpp"

namespace locfuse {

struct ExperimentConfig {
  double test_fraction = 0.20;
  std::size_t n_iterations = 1000;
  std::uint64_t master_seed = 1;
  ForestParams classifier_params;
  ForestParams regressor_params;
  std::vector<TechnologySelector> technologies = {
      TechnologySelector::FiveG, TechnologySelector::WiFi, TechnologySelector::Fusion};
  unsigned n_workers = 1;  // iteration-level parallelism; result is schedule independent
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Uniform without-replacement test draw, |test| = round(test_fraction * N).
SplitIndices monte_carlo_split(const Dataset& dataset, double test_fraction, Rng& rng);
SplitIndices monte_carlo_split(std::size_t n_samples, double test_fraction, Rng& rng);

// sqrt(dx^2 + dy^2); z is ignored throughout evaluation.
double horizontal_error(const Position& estimate, const Position& truth);

// Right-continuous empirical step function F(e) = #{errors <= e} / N.
struct Cdf {
  std::vector<double> support;     // sorted distinct error values
  std::vector<double> cumulative;  // F at each support point, ends at 1

  double at(double e) const;
};

Cdf empirical_cdf(const std::vector<double>& errors);

// Smallest sample value e with F(e) >= q, 0 < q <= 1.
double percentile(const std::vector<double>& errors, double q);

struct MethodStats {
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;                // population std over iterations
  std::vector<double> iteration_accuracy;   // one entry per iteration
};

struct TechReport {
  TechnologySelector technology = TechnologySelector::Fusion;
  MethodStats classify;                 // pure classification forest
  MethodStats regress;                  // regression forest + zone_of
  std::vector<double> pooled_errors_m;  // regression horizontal errors, sorted
  Cdf error_cdf;
  double error_p80_m = 0.0;
};

struct ExperimentReport {
  std::vector<TechReport> per_tech;  // config order

  const TechReport& tech(TechnologySelector sel) const;
};

// Sub-seed scheme (fixed so parallel and serial runs agree):
//   it_seed          = derive_seed(master_seed, iteration)
//   split rng        = Rng(derive_seed(it_seed, 0))
//   forest seed      = derive_seed(it_seed, 1 + 2 * tech_index + method)
// with tech_index the position in config.technologies and method 0 for the
// classifier, 1 for the regressor.
std::uint64_t experiment_iteration_seed(std::uint64_t master_seed, std::size_t iteration);

ExperimentReport run_experiment(const Dataset& dataset, const ExperimentConfig& config);

}  // namespace locfuse
