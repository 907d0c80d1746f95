#include "locfuse/experiment_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "locfuse/error.hpp"
#include "src/ini.hpp"

namespace locfuse {

namespace {

using ini::fmt9;

void write_forest_section(std::string& out, const char* name, const ForestParams& p) {
  out += std::string("\n[forest ") + name + "]\n";
  out += "n_trees = " + std::to_string(p.n_trees) + "\n";
  out += "max_depth = " + std::to_string(p.max_depth) + "\n";
  out += "min_samples_leaf = " + std::to_string(p.min_samples_leaf) + "\n";
  out += "features_per_split = " + std::to_string(p.features_per_split) + "\n";
  out += std::string("bootstrap = ") + (p.bootstrap ? "true" : "false") + "\n";
}

ForestParams parse_forest_section(const ini::Section& s, ForestParams base) {
  base.n_trees = static_cast<std::size_t>(s.number_or("n_trees", static_cast<double>(base.n_trees)));
  base.max_depth =
      static_cast<std::size_t>(s.number_or("max_depth", static_cast<double>(base.max_depth)));
  base.min_samples_leaf = static_cast<std::size_t>(
      s.number_or("min_samples_leaf", static_cast<double>(base.min_samples_leaf)));
  base.features_per_split = static_cast<std::size_t>(
      s.number_or("features_per_split", static_cast<double>(base.features_per_split)));
  const std::string flag = s.text_or("bootstrap", base.bootstrap ? "true" : "false");
  if (flag != "true" && flag != "false") {
    throw Error("config-parse", "bootstrap must be true or false, got '" + flag + "'");
  }
  base.bootstrap = flag == "true";
  return base;
}

}  // namespace

std::string write_experiment_config(const ExperimentConfig& config) {
  std::string out;
  out += "# locfuse experiment\n";
  out += "[experiment]\n";
  out += "test_fraction = " + fmt9(config.test_fraction) + "\n";
  out += "n_iterations = " + std::to_string(config.n_iterations) + "\n";
  out += "master_seed = " + std::to_string(config.master_seed) + "\n";
  out += "technologies =";
  for (TechnologySelector sel : config.technologies) {
    out += std::string(" ") + to_string(sel);
  }
  out += "\n";
  out += "workers = " + std::to_string(config.n_workers) + "\n";
  write_forest_section(out, "classify", config.classifier_params);
  write_forest_section(out, "regress", config.regressor_params);
  return out;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig config;
  for (const ini::Section& s : ini::parse_sections(text)) {
    if (s.kind == "experiment") {
      config.test_fraction = s.number_or("test_fraction", config.test_fraction);
      config.n_iterations = static_cast<std::size_t>(
          s.number_or("n_iterations", static_cast<double>(config.n_iterations)));
      config.master_seed = static_cast<std::uint64_t>(
          s.number_or("master_seed", static_cast<double>(config.master_seed)));
      config.n_workers =
          static_cast<unsigned>(s.number_or("workers", static_cast<double>(config.n_workers)));
      if (const auto* v = s.find("technologies")) {
        config.technologies.clear();
        std::istringstream ts(v->first);
        std::string token;
        while (ts >> token) {
          const auto sel = selector_from_string(token);
          if (!sel) {
            throw Error("config-parse",
                        "line " + std::to_string(v->second) + ": unknown technology '" + token + "'");
          }
          config.technologies.push_back(*sel);
        }
        if (config.technologies.empty()) {
          throw Error("config-parse", "technologies list is empty");
        }
      }
    } else if (s.kind == "forest" && s.name == "classify") {
      config.classifier_params = parse_forest_section(s, config.classifier_params);
    } else if (s.kind == "forest" && s.name == "regress") {
      config.regressor_params = parse_forest_section(s, config.regressor_params);
    } else {
      throw Error("config-parse",
                  "line " + std::to_string(s.line_no) + ": unknown section [" + s.title() + "]");
    }
  }
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

std::string write_report_summary_csv(const ExperimentReport& report) {
  std::string out = "technology,method,mean_accuracy,std_accuracy,cdf80_m\n";
  for (const TechReport& t : report.per_tech) {
    out += std::string(to_string(t.technology)) + ",classify," +
           fmt9(t.classify.mean_accuracy) + "," + fmt9(t.classify.std_accuracy) + ",\n";
    out += std::string(to_string(t.technology)) + ",regress," + fmt9(t.regress.mean_accuracy) +
           "," + fmt9(t.regress.std_accuracy) + "," + fmt9(t.error_p80_m) + "\n";
  }
  return out;
}

void write_report_files(const ExperimentReport& report, const std::string& directory) {
  std::filesystem::create_directories(directory);
  const auto dir = std::filesystem::path(directory);
  {
    std::ofstream out(dir / "summary.csv", std::ios::binary);
    if (!out) throw Error("io", "cannot write report summary");
    out << write_report_summary_csv(report);
    if (!out.flush()) throw Error("io", "failed writing report summary");
  }
  for (const TechReport& t : report.per_tech) {
    std::ofstream out(dir / (std::string("errors_") + to_string(t.technology) + ".csv"),
                      std::ios::binary);
    if (!out) throw Error("io", "cannot write error csv");
    out << "error_m\n";
    for (double e : t.pooled_errors_m) out << fmt9(e) << "\n";
    if (!out.flush()) throw Error("io", "failed writing error csv");
  }
}

}  // namespace locfuse
