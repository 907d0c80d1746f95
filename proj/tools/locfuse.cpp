#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "locfuse/csv_io.hpp"
#include "locfuse/dataset.hpp"
#include "locfuse/error.hpp"
#include "locfuse/eval.hpp"
#include "locfuse/experiment_io.hpp"
#include "locfuse/forest.hpp"
#include "locfuse/ingest.hpp"
#include "locfuse/locate.hpp"
#include "locfuse/propagation.hpp"
#include "locfuse/scenario_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

void print_violations(const locfuse::ValidationReport& report) {
  for (const locfuse::Violation& v : report.violations) {
    std::cerr << "violation: " << v.rule << ", " << v.subject << ": " << v.detail << "\n";
  }
}

locfuse::Dataset load_valid_dataset(const std::string& path) {
  locfuse::Dataset dataset = locfuse::load_dataset_csv(path);
  const auto report = locfuse::validate_dataset(dataset);
  if (!report.valid()) {
    print_violations(report);
    throw locfuse::Error("invalid-dataset", "dataset '" + path + "' failed validation");
  }
  return dataset;
}

struct ScenarioArgs {
  bool reference = false;
  std::string validate_path;
  std::string out_path;
};

int run_scenario(const ScenarioArgs& args) {
  if (args.reference) {
    const std::string text = locfuse::write_scenario(locfuse::reference_scenario());
    if (args.out_path.empty()) {
      std::cout << text;
    } else {
      locfuse::save_scenario(locfuse::reference_scenario(), args.out_path);
    }
    return kExitOk;
  }
  const locfuse::Scenario scenario = locfuse::load_scenario(args.validate_path);
  const auto problems = locfuse::scenario_problems(scenario);
  if (problems.empty()) {
    std::cout << "ok: " << scenario.roster.size() << " aps, " << scenario.zones.size()
              << " zones, " << scenario.walls.size() << " walls\n";
    return kExitOk;
  }
  for (const std::string& p : problems) std::cerr << "problem: " << p << "\n";
  return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"locfuse: RSSI-based indoor localization and attendance toolkit"};
  app.require_subcommand(1);

  ScenarioArgs scenario_args;
  CLI::App* scenario_cmd = app.add_subcommand("scenario", "emit or validate scenario configs");
  scenario_cmd->add_flag("--reference", scenario_args.reference, "emit the reference scenario");
  scenario_cmd->add_option("--validate", scenario_args.validate_path, "scenario file to check");
  scenario_cmd->add_option("--out", scenario_args.out_path, "output path (default stdout)");

  std::string gen_scenario, gen_out;
  std::size_t gen_n = 250;
  std::uint64_t gen_seed = 7;
  CLI::App* generate_cmd = app.add_subcommand("generate", "simulate a dataset from a scenario");
  generate_cmd->add_option("--scenario", gen_scenario, "scenario config")->required();
  generate_cmd->add_option("--n", gen_n, "number of samples")->check(CLI::PositiveNumber);
  generate_cmd->add_option("--seed", gen_seed, "generation seed")->envname("LOCFUSE_SEED");
  generate_cmd->add_option("--out", gen_out, "output dataset csv")->required();

  std::string train_dataset, train_kind, train_tech, train_out;
  locfuse::ForestParams train_params;
  bool train_no_bootstrap = false;
  CLI::App* train_cmd = app.add_subcommand("train", "fit a random forest on a dataset");
  train_cmd->add_option("--dataset", train_dataset, "dataset csv")->required();
  train_cmd->add_option("--kind", train_kind, "classify | regress")
      ->required()
      ->check(CLI::IsMember({"classify", "regress"}));
  train_cmd->add_option("--tech", train_tech, "5g | wifi | fusion")
      ->required()
      ->check(CLI::IsMember({"5g", "wifi", "fusion"}));
  train_cmd->add_option("--out", train_out, "output model file")->required();
  train_cmd->add_option("--trees", train_params.n_trees, "trees in the ensemble");
  train_cmd->add_option("--max-depth", train_params.max_depth, "0 = unlimited");
  train_cmd->add_option("--min-leaf", train_params.min_samples_leaf, "min samples per leaf");
  train_cmd->add_option("--features", train_params.features_per_split,
                        "features per split, 0 = rule default");
  train_cmd->add_flag("--no-bootstrap", train_no_bootstrap, "train every tree on the full set");
  train_cmd->add_option("--seed", train_params.seed, "training seed")->envname("LOCFUSE_SEED");

  std::string locate_model, locate_sample;
  std::size_t locate_index = 0;
  CLI::App* locate_cmd = app.add_subcommand("locate", "locate one sample with a trained model");
  locate_cmd->add_option("--model", locate_model, "forest model file")->required();
  locate_cmd->add_option("--sample", locate_sample, "dataset csv holding the sample")->required();
  locate_cmd->add_option("--index", locate_index, "row to locate (default 0)");

  std::string eval_dataset, eval_config, eval_out;
  std::optional<std::uint64_t> eval_seed;
  std::optional<unsigned> eval_workers;
  CLI::App* eval_cmd = app.add_subcommand("eval", "run the Monte Carlo evaluation protocol");
  eval_cmd->add_option("--dataset", eval_dataset, "dataset csv")->required();
  eval_cmd->add_option("--config", eval_config, "experiment config (defaults when omitted)");
  eval_cmd->add_option("--out", eval_out, "report directory")->required();
  eval_cmd->add_option("--seed", eval_seed, "override master seed")->envname("LOCFUSE_SEED");
  eval_cmd->add_option("--workers", eval_workers, "override worker count");

  std::string serve_scenario, serve_store, serve_bind = "127.0.0.1:8080";
  CLI::App* serve_cmd = app.add_subcommand("serve", "run the sample ingestion service");
  serve_cmd->add_option("--scenario", serve_scenario, "scenario config with the roster")
      ->required();
  serve_cmd->add_option("--store", serve_store, "append-only record log path")->required();
  serve_cmd->add_option("--bind", serve_bind, "host:port (default 127.0.0.1:8080)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (scenario_cmd->parsed()) {
      if (scenario_args.reference == !scenario_args.validate_path.empty()) {
        std::cerr << "scenario: pass exactly one of --reference or --validate\n";
        return kExitUsage;
      }
      return run_scenario(scenario_args);
    }

    if (generate_cmd->parsed()) {
      const locfuse::Scenario scenario = locfuse::load_scenario(gen_scenario);
      const locfuse::Dataset dataset = locfuse::generate_dataset(scenario, gen_n, gen_seed);
      locfuse::save_dataset_csv(dataset, gen_out);
      std::cout << "wrote " << dataset.samples.size() << " samples to " << gen_out << "\n";
      return kExitOk;
    }

    if (train_cmd->parsed()) {
      train_params.bootstrap = !train_no_bootstrap;
      const locfuse::Dataset dataset = load_valid_dataset(train_dataset);
      const auto selector = locfuse::selector_from_string(train_tech);
      const locfuse::FeatureMatrix X = locfuse::feature_matrix(dataset, *selector);
      locfuse::Forest forest;
      if (train_kind == "classify") {
        std::vector<std::string> labels;
        labels.reserve(dataset.samples.size());
        for (const auto& s : dataset.samples) labels.push_back(s.zone_label);
        forest = locfuse::fit_forest(X, labels, train_params);
      } else {
        std::vector<locfuse::Position> targets;
        targets.reserve(dataset.samples.size());
        for (const auto& s : dataset.samples) targets.push_back(s.truth);
        forest = locfuse::fit_forest(X, targets, train_params);
      }
      locfuse::save_forest(forest, train_out);
      std::cout << "trained " << train_kind << " forest (" << forest.trees.size() << " trees, "
                << forest.columns.size() << " features) to " << train_out << "\n";
      return kExitOk;
    }

    if (locate_cmd->parsed()) {
      const locfuse::Forest forest = locfuse::load_forest(locate_model);
      const locfuse::Dataset dataset = locfuse::load_dataset_csv(locate_sample);
      if (locate_index >= dataset.samples.size()) {
        throw locfuse::Error("bad-argument", "--index beyond the sample file");
      }
      const locfuse::Sample& sample = dataset.samples[locate_index];
      const std::vector<double> features = locfuse::feature_row(sample, forest.columns);
      if (forest.kind == locfuse::ForestKind::Classifier) {
        std::cout << "zone " << locfuse::classify_pipeline(forest, features) << "\n";
      } else {
        const locfuse::Position p = locfuse::predict_position(forest, features);
        char line[96];
        std::snprintf(line, sizeof(line), "position %.9g %.9g\n", p.x, p.y);
        std::cout << line;
        std::cout << "zone " << locfuse::zone_of(p, dataset.zones) << "\n";
      }
      return kExitOk;
    }

    if (eval_cmd->parsed()) {
      const locfuse::Dataset dataset = load_valid_dataset(eval_dataset);
      locfuse::ExperimentConfig config;
      if (!eval_config.empty()) config = locfuse::load_experiment_config(eval_config);
      if (eval_seed.has_value()) config.master_seed = *eval_seed;
      if (eval_workers.has_value()) config.n_workers = *eval_workers;
      const locfuse::ExperimentReport report = locfuse::run_experiment(dataset, config);
      locfuse::write_report_files(report, eval_out);
      std::cout << locfuse::write_report_summary_csv(report);
      return kExitOk;
    }

    if (serve_cmd->parsed()) {
      const auto colon = serve_bind.rfind(':');
      if (colon == std::string::npos) {
        std::cerr << "serve: --bind expects host:port\n";
        return kExitUsage;
      }
      const std::string host = serve_bind.substr(0, colon);
      const int port = std::stoi(serve_bind.substr(colon + 1));
      const locfuse::Scenario scenario = locfuse::load_scenario(serve_scenario);
      locfuse::IngestService service(scenario, serve_store);
      const int bound = service.start(host, port);
      std::cout << "listening on " << host << ":" << bound << " (store: " << serve_store << ")\n";
      for (;;) std::this_thread::sleep_for(std::chrono::seconds(3600));
    }
  } catch (const locfuse::Error& e) {
    std::cerr << "error (" << e.code() << "): " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
