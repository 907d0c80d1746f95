// Acceptance suite: runs the protocol replica and the oracle gates, printing
// one PASS/FAIL line per criterion. Exit code = number of failed criteria.

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

#include "locfuse/csv_io.hpp"
#include "locfuse/dataset.hpp"
#include "locfuse/eval.hpp"
#include "locfuse/forest.hpp"
#include "locfuse/ingest.hpp"
#include "locfuse/locate.hpp"
#include "locfuse/propagation.hpp"
#include "oracles.hpp"

using namespace locfuse;

namespace {

int failures = 0;

void report(int criterion, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion, name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// Protocol constants, committed once: dataset seed 7, master seed 1.
constexpr std::uint64_t kDatasetSeed = 7;
constexpr std::uint64_t kMasterSeed = 1;
constexpr std::size_t kSampleCount = 250;
constexpr std::size_t kIterations = 1000;
constexpr double kTestFraction = 0.20;

struct ProtocolRun {
  Dataset dataset;
  ExperimentConfig config;
  ExperimentReport report;
};

ProtocolRun run_protocol() {
  ProtocolRun run;
  run.dataset = generate_dataset(reference_scenario(), kSampleCount, kDatasetSeed);
  run.config.test_fraction = kTestFraction;
  run.config.n_iterations = kIterations;
  run.config.master_seed = kMasterSeed;
  run.config.n_workers = std::max(1u, std::thread::hardware_concurrency());
  run.report = run_experiment(run.dataset, run.config);
  return run;
}

// --- criterion 1 + 2: the calibrated protocol replica ------------------------

void check_protocol(const ProtocolRun& run) {
  const TechReport& five_g = run.report.tech(TechnologySelector::FiveG);
  const TechReport& wifi = run.report.tech(TechnologySelector::WiFi);
  const TechReport& fusion = run.report.tech(TechnologySelector::Fusion);

  const double margin = 0.005;  // -0.5 percentage points guard
  const bool classify_order =
      fusion.classify.mean_accuracy >= five_g.classify.mean_accuracy - margin &&
      fusion.classify.mean_accuracy >= wifi.classify.mean_accuracy - margin;
  const bool regress_order =
      fusion.regress.mean_accuracy >= five_g.regress.mean_accuracy - margin &&
      fusion.regress.mean_accuracy >= wifi.regress.mean_accuracy - margin;
  const bool method_order =
      fusion.regress.mean_accuracy >= fusion.classify.mean_accuracy - margin;

  report(1, "accuracy orderings (fusion >= singles, regress >= classify)",
         classify_order && regress_order && method_order,
         "classify 5g/wifi/fusion = " + fmt(five_g.classify.mean_accuracy) + "/" +
             fmt(wifi.classify.mean_accuracy) + "/" + fmt(fusion.classify.mean_accuracy) +
             ", regress = " + fmt(five_g.regress.mean_accuracy) + "/" +
             fmt(wifi.regress.mean_accuracy) + "/" + fmt(fusion.regress.mean_accuracy));

  const bool p80_requirement = fusion.error_p80_m <= 5.0;
  const bool p80_order = fusion.error_p80_m <= five_g.error_p80_m &&
                         fusion.error_p80_m <= wifi.error_p80_m;
  report(2, "fusion CDF80 <= 5 m and <= each single technology",
         p80_requirement && p80_order,
         "cdf80 5g/wifi/fusion = " + fmt(five_g.error_p80_m) + "/" + fmt(wifi.error_p80_m) +
             "/" + fmt(fusion.error_p80_m) + " m");
}

// --- criterion 3: protocol constants ----------------------------------------

void check_constants(const ProtocolRun& run) {
  bool ok = true;
  std::string detail;

  Rng rng(derive_seed(experiment_iteration_seed(kMasterSeed, 0), 0));
  const SplitIndices split = monte_carlo_split(run.dataset, kTestFraction, rng);
  const auto expected_test =
      static_cast<std::size_t>(std::llround(kTestFraction * double(run.dataset.samples.size())));
  if (split.test.size() != expected_test || expected_test != 50) {
    ok = false;
    detail += "test split size " + std::to_string(split.test.size()) + "; ";
  }
  if (run.config.n_iterations != 1000) {
    ok = false;
    detail += "iterations " + std::to_string(run.config.n_iterations) + "; ";
  }
  if (run.dataset.samples.size() < 250) {
    ok = false;
    detail += "dataset " + std::to_string(run.dataset.samples.size()) + " samples; ";
  }
  std::size_t gnbs = 0;
  bool tx_ok = true;
  for (const AccessPoint& ap : run.dataset.roster) {
    if (ap.tech == RadioTechnology::FiveG) {
      ++gnbs;
      tx_ok &= ap.tx_power_dbm == 20.0;
    }
  }
  if (gnbs != 3 || !tx_ok) {
    ok = false;
    detail += std::to_string(gnbs) + " gNBs; ";
  }
  if (detail.empty()) {
    detail = "|test| = 50, 1000 iterations, " + std::to_string(run.dataset.samples.size()) +
             " samples, 3 gNBs at 20 dBm";
  }
  report(3, "protocol constants honored verbatim", ok, detail);
}

// --- criterion 4: multilateration oracle -------------------------------------

void check_multilateration() {
  bool ok = true;
  std::string detail;

  const std::vector<RangeObservation> fixed = {
      {{0, 0, 0}, 5.0},
      {{10, 0, 0}, std::sqrt(65.0)},
      {{0, 10, 0}, std::sqrt(45.0)},
  };
  const Position p = multilaterate(fixed);
  double worst = std::hypot(p.x - 3.0, p.y - 4.0);
  if (worst > 1e-6) {
    ok = false;
    detail = "fixed case error " + std::to_string(worst);
  }

  Rng rng(2025);
  int done = 0;
  while (done < 100) {
    const Position a{rng.uniform(0, 20), rng.uniform(0, 20), 0};
    const Position b{rng.uniform(0, 20), rng.uniform(0, 20), 0};
    const Position c{rng.uniform(0, 20), rng.uniform(0, 20), 0};
    const double cross =
        std::abs((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
    if (cross < 4.0) continue;
    const Position truth{rng.uniform(0, 20), rng.uniform(0, 20), 0};
    const std::vector<RangeObservation> obs = {
        {a, dist2d(truth, a)}, {b, dist2d(truth, b)}, {c, dist2d(truth, c)}};
    const Position solved = multilaterate(obs);
    worst = std::max(worst, std::hypot(solved.x - truth.x, solved.y - truth.y));
    ++done;
  }
  if (worst > 1e-6) {
    ok = false;
    detail = "worst error " + std::to_string(worst) + " m";
  } else {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "worst error %.2e m over 101 cases", worst);
    detail = buf;
  }
  report(4, "noiseless multilateration recovers truth within 1e-6 m", ok, detail);
}

// --- criterion 5: forest oracle equivalence ----------------------------------

void check_forest_oracle() {
  bool ok = true;
  std::string detail;
  int cases = 0;

  auto corpus = oracle::tree_corpus();
  {
    Rng extra(424242);  // extend the fixed corpus with random small cases
    for (int t = 0; t < 40; ++t) {
      oracle::CorpusCase c;
      const std::size_t n = 3 + extra.below(8);
      const std::size_t p = 1 + extra.below(3);
      const char* pool[] = {"lab1", "lab2", "outside"};
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(p);
        for (auto& v : row) v = -30.0 - static_cast<double>(extra.below(60));
        c.rows.push_back(std::move(row));
        c.labels.push_back(pool[extra.below(3)]);
        c.positions.push_back(
            {static_cast<double>(extra.below(12)), static_cast<double>(extra.below(8)), 0.0});
      }
      corpus.push_back(std::move(c));
    }
  }

  for (const oracle::CorpusCase& c : corpus) {
    const std::size_t p = c.rows.front().size();
    ForestParams params;
    params.n_trees = 1;
    params.min_samples_leaf = 1;
    params.features_per_split = p;
    params.bootstrap = false;
    params.seed = 99;

    std::vector<std::vector<double>> queries = c.rows;
    for (double base = -92.0; base <= -28.0; base += 2.9) {
      std::vector<double> q(p);
      for (std::size_t j = 0; j < p; ++j) q[j] = base + 1.7 * static_cast<double>(j);
      queries.push_back(std::move(q));
    }

    Rng rng_c(1);
    const TreeNode ctree = fit_tree(c.rows, c.labels, params, rng_c);
    const oracle::Node coracle = oracle::fit_classifier(c.rows, c.labels, 1, 0, 0);
    FeatureMatrix X;
    for (std::size_t j = 0; j < p; ++j) X.columns.push_back("f" + std::to_string(j));
    X.rows = c.rows;
    const Forest cforest = fit_forest(X, c.labels, params);

    Rng rng_r(1);
    const TreeNode rtree = fit_tree(c.rows, c.positions, params, rng_r);
    const oracle::Node roracle = oracle::fit_regressor(c.rows, c.positions, 1, 0, 0);
    const Forest rforest = fit_forest(X, c.positions, params);

    for (const auto& q : queries) {
      if (predict_tree_class(ctree, q) != oracle::descend(coracle, q).label) ok = false;
      if (predict_class(cforest, q) != predict_tree_class(ctree, q)) ok = false;
      const Position got = predict_tree_position(rtree, q);
      const Position want = oracle::descend(roracle, q).mean;
      if (std::abs(got.x - want.x) > 1e-12 || std::abs(got.y - want.y) > 1e-12) ok = false;
      const Position ensemble = predict_position(rforest, q);
      if (ensemble.x != got.x || ensemble.y != got.y) ok = false;
    }
    ++cases;
  }
  detail = std::to_string(cases) + " corpus cases, trees vs exhaustive search + ensemble-of-one";
  report(5, "fit_tree equals the exhaustive split-search oracle", ok, detail);
}

// --- criterion 6: module invariant sampler -----------------------------------

void check_invariants(const ProtocolRun& run) {
  bool ok = true;
  std::string detail;

  // Split partition laws on the protocol dataset.
  Rng rng(derive_seed(kMasterSeed, 77));
  const SplitIndices split = monte_carlo_split(run.dataset, kTestFraction, rng);
  std::vector<bool> seen(run.dataset.samples.size(), false);
  for (std::size_t i : split.test) seen[i] = true;
  for (std::size_t i : split.train) {
    if (seen[i]) ok = false;
    seen[i] = true;
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) ok = false;
  if (!ok) detail += "partition law; ";

  // CDF monotone, percentile membership.
  for (const TechReport& t : run.report.per_tech) {
    for (std::size_t i = 1; i < t.error_cdf.cumulative.size(); ++i) {
      if (t.error_cdf.cumulative[i] <= t.error_cdf.cumulative[i - 1]) ok = false;
    }
    if (t.error_cdf.cumulative.back() != 1.0) ok = false;
    if (!std::binary_search(t.pooled_errors_m.begin(), t.pooled_errors_m.end(), t.error_p80_m)) {
      ok = false;
    }
  }

  // RSSI -> range round-trip at 1e-9 relative.
  const Scenario sc = reference_scenario();
  PropagationParams quiet = sc.params.at(RadioTechnology::FiveG);
  quiet.sigma_shadow_db = 0.0;
  Scenario quiet_sc = sc;
  quiet_sc.walls.clear();
  quiet_sc.params[RadioTechnology::FiveG] = quiet;
  Rng prng(5);
  for (double d : {0.7, 3.0, 12.5}) {
    const AccessPoint& ap = sc.roster[0];
    const Position ue{ap.position.x + d, ap.position.y, ap.position.z};
    const double rssi = simulate_rssi(ap, ue, quiet_sc, prng);
    if (std::abs(rssi_to_range(rssi, ap.tx_power_dbm, quiet) - d) / d > 1e-9) {
      ok = false;
      detail += "rssi round-trip; ";
    }
  }

  // Regression outputs stay in the training bounding box.
  const FeatureMatrix X = feature_matrix(run.dataset, TechnologySelector::Fusion);
  std::vector<Position> targets;
  for (const Sample& s : run.dataset.samples) targets.push_back(s.truth);
  ForestParams fp;
  fp.n_trees = 20;
  fp.seed = 123;
  const Forest regressor = fit_forest(X, targets, fp);
  double x_min = 1e18, x_max = -1e18, y_min = 1e18, y_max = -1e18;
  for (const Position& t : targets) {
    x_min = std::min(x_min, t.x);
    x_max = std::max(x_max, t.x);
    y_min = std::min(y_min, t.y);
    y_max = std::max(y_max, t.y);
  }
  Rng qrng(9);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> q(X.columns.size());
    for (double& v : q) v = qrng.uniform(-120, 0);
    const Position p = predict_position(regressor, q);
    if (p.x < x_min - 1e-9 || p.x > x_max + 1e-9 || p.y < y_min - 1e-9 || p.y > y_max + 1e-9) {
      ok = false;
      detail += "bbox containment; ";
    }
  }

  // Vote-tie determinism.
  Forest tie;
  tie.kind = ForestKind::Classifier;
  tie.columns = {"f0"};
  for (const char* l : {"b", "a", "b", "a"}) {
    TreeNode leaf;
    leaf.label = l;
    tie.trees.push_back(std::move(leaf));
  }
  tie.labels = {"a", "b"};
  if (predict_class(tie, std::vector<double>{-50.0}) != "a") {
    ok = false;
    detail += "vote tie; ";
  }

  // Seed determinism including parallel vs serial equality (small re-run).
  ExperimentConfig small;
  small.n_iterations = 3;
  small.master_seed = 21;
  small.classifier_params.n_trees = 8;
  small.regressor_params.n_trees = 8;
  small.n_workers = 1;
  const Dataset sd = generate_dataset(sc, 60, 13);
  const ExperimentReport serial = run_experiment(sd, small);
  small.n_workers = 4;
  const ExperimentReport parallel = run_experiment(sd, small);
  for (std::size_t t = 0; t < serial.per_tech.size(); ++t) {
    if (serial.per_tech[t].pooled_errors_m != parallel.per_tech[t].pooled_errors_m) ok = false;
    if (serial.per_tech[t].classify.iteration_accuracy !=
        parallel.per_tech[t].classify.iteration_accuracy) {
      ok = false;
    }
  }
  const Dataset sd2 = generate_dataset(sc, 60, 13);
  if (!(sd2 == sd)) ok = false;

  if (detail.empty()) {
    detail = "partition, cdf, round-trip, bbox, vote-tie, serial==parallel (full suites in ctest)";
  }
  report(6, "module invariant sampler", ok, detail);
}

// --- criterion 7: ingestion round-trip over the wire -------------------------

void check_ingestion() {
  bool ok = true;
  std::string detail;

  const Scenario sc = reference_scenario();
  const auto store =
      std::filesystem::temp_directory_path() / "locfuse-acceptance" / "ingest.log";
  std::filesystem::create_directories(store.parent_path());
  std::filesystem::remove(store);

  IngestService service(sc, store.string());
  const int port = service.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);

  const Dataset source = generate_dataset(sc, 100, 55);
  auto log_bytes = [&]() {
    std::ifstream in(store, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };

  for (std::size_t i = 0; i < 100; ++i) {
    if (i == 50) {
      // One malformed record mid-stream: unknown AP -> 422, log untouched.
      const std::string before = log_bytes();
      Sample bad = source.samples[i];
      bad.rssi_dbm["X9"] = -70.0;
      const auto res = client.Post("/samples", write_ingest_record(bad), "application/json");
      if (!res || res->status != 422 || res->body.find("unknown-ap") == std::string::npos) {
        ok = false;
        detail += "422 path; ";
      }
      if (log_bytes() != before) {
        ok = false;
        detail += "log perturbed; ";
      }
    }
    const auto res =
        client.Post("/samples", write_ingest_record(source.samples[i]), "application/json");
    if (!res || res->status != 201) {
      ok = false;
      detail += "post " + std::to_string(i) + "; ";
      break;
    }
  }

  const auto count_res = client.Get("/samples/count");
  if (!count_res || count_res->body != "100\n") {
    ok = false;
    detail += "count; ";
  }

  const auto export_res = client.Get("/dataset");
  if (!export_res || export_res->status != 200) {
    ok = false;
    detail += "export; ";
  } else {
    const Dataset exported = parse_dataset_csv(export_res->body);
    if (exported.samples.size() != 100) ok = false;
    for (std::size_t i = 0; ok && i < 100; ++i) {
      const Sample& a = exported.samples[i];
      const Sample& b = source.samples[i];
      if (a.sample_id != b.sample_id || a.zone_label != b.zone_label) ok = false;
      if (std::abs(a.truth.x - b.truth.x) > 5e-9 * std::max(1.0, std::abs(b.truth.x))) ok = false;
      for (const auto& [k, v] : b.rssi_dbm) {
        if (!a.rssi_dbm.count(k) ||
            std::abs(a.rssi_dbm.at(k) - v) > 5e-9 * std::max(1.0, std::abs(v))) {
          ok = false;
        }
      }
    }
    if (!ok) detail += "exported dataset differs; ";
  }
  service.stop();

  if (detail.empty()) detail = "100 records, one 422 mid-stream, export equals submissions";
  report(7, "wire ingestion round-trip with rejection atomicity", ok, detail);
}

}  // namespace

int main() {
  std::printf("acceptance: protocol replica on the reference scenario "
              "(n=%zu, fraction=%.2f, iterations=%zu, dataset seed=%llu, master seed=%llu)\n",
              kSampleCount, kTestFraction, kIterations,
              static_cast<unsigned long long>(kDatasetSeed),
              static_cast<unsigned long long>(kMasterSeed));
  std::fflush(stdout);

  const ProtocolRun run = run_protocol();
  check_protocol(run);
  check_constants(run);
  check_multilateration();
  check_forest_oracle();
  check_invariants(run);
  check_ingestion();

  std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
