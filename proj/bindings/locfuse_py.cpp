#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "locfuse/csv_io.hpp"
#include "locfuse/dataset.hpp"
#include "locfuse/error.hpp"
#include "locfuse/eval.hpp"
#include "locfuse/experiment_io.hpp"
#include "locfuse/forest.hpp"
#include "locfuse/locate.hpp"
#include "locfuse/propagation.hpp"
#include "locfuse/scenario_io.hpp"

namespace py = pybind11;
using namespace locfuse;

namespace {

// pybind11 cannot copy Forest (unique_ptr trees), so the python side holds it
// behind a shared handle and calls free functions on it.
std::vector<double> as_row(const std::vector<double>& x) { return x; }

}  // namespace

PYBIND11_MODULE(_locfuse, m) {
  m.doc() = "RSSI-based indoor localization toolkit (5G/WiFi fusion, random forests)";

  py::register_exception<Error>(m, "LocfuseError");

  m.attr("RSSI_FLOOR_DBM") = kRssiFloorDbm;
  m.attr("OUTSIDE_LABEL") = kOutsideLabel;
  m.attr("UE_HEIGHT_M") = kUeHeightM;

  py::class_<Position>(m, "Position")
      .def(py::init<>())
      .def(py::init<double, double, double>(), py::arg("x"), py::arg("y"), py::arg("z") = 0.0)
      .def_readwrite("x", &Position::x)
      .def_readwrite("y", &Position::y)
      .def_readwrite("z", &Position::z)
      .def("__eq__", [](const Position& a, const Position& b) { return a == b; })
      .def("__repr__", [](const Position& p) {
        return "Position(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ", " +
               std::to_string(p.z) + ")";
      });

  py::enum_<RadioTechnology>(m, "RadioTechnology")
      .value("FIVE_G", RadioTechnology::FiveG)
      .value("WIFI", RadioTechnology::WiFi);

  py::enum_<TechnologySelector>(m, "TechnologySelector")
      .value("FIVE_G", TechnologySelector::FiveG)
      .value("WIFI", TechnologySelector::WiFi)
      .value("FUSION", TechnologySelector::Fusion);

  py::class_<AccessPoint>(m, "AccessPoint")
      .def(py::init<>())
      .def(py::init([](std::string ap_id, RadioTechnology tech, Position position,
                       double tx_power_dbm) {
             return AccessPoint{std::move(ap_id), tech, position, tx_power_dbm};
           }),
           py::arg("ap_id"), py::arg("tech"), py::arg("position"), py::arg("tx_power_dbm"))
      .def_readwrite("ap_id", &AccessPoint::ap_id)
      .def_readwrite("tech", &AccessPoint::tech)
      .def_readwrite("position", &AccessPoint::position)
      .def_readwrite("tx_power_dbm", &AccessPoint::tx_power_dbm);

  py::class_<Zone>(m, "Zone")
      .def(py::init<>())
      .def(py::init([](std::string zone_id, double x_min, double y_min, double x_max,
                       double y_max) {
             return Zone{std::move(zone_id), x_min, y_min, x_max, y_max};
           }),
           py::arg("zone_id"), py::arg("x_min"), py::arg("y_min"), py::arg("x_max"),
           py::arg("y_max"))
      .def_readwrite("zone_id", &Zone::zone_id)
      .def_readwrite("x_min", &Zone::x_min)
      .def_readwrite("y_min", &Zone::y_min)
      .def_readwrite("x_max", &Zone::x_max)
      .def_readwrite("y_max", &Zone::y_max)
      .def("contains", &Zone::contains);

  py::class_<Sample>(m, "Sample")
      .def(py::init<>())
      .def_readwrite("sample_id", &Sample::sample_id)
      .def_readwrite("rssi_dbm", &Sample::rssi_dbm)
      .def_readwrite("range_m", &Sample::range_m)
      .def_readwrite("truth", &Sample::truth)
      .def_readwrite("zone_label", &Sample::zone_label);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("roster", &Dataset::roster)
      .def_readwrite("zones", &Dataset::zones)
      .def_readwrite("samples", &Dataset::samples);

  py::class_<FeatureMatrix>(m, "FeatureMatrix")
      .def(py::init<>())
      .def_readwrite("columns", &FeatureMatrix::columns)
      .def_readwrite("rows", &FeatureMatrix::rows);

  py::class_<Violation>(m, "Violation")
      .def_readonly("rule", &Violation::rule)
      .def_readonly("subject", &Violation::subject)
      .def_readonly("detail", &Violation::detail)
      .def("__repr__", [](const Violation& v) { return v.rule + ", " + v.subject; });

  py::class_<ValidationReport>(m, "ValidationReport")
      .def_readonly("violations", &ValidationReport::violations)
      .def("valid", &ValidationReport::valid);

  py::class_<PropagationParams>(m, "PropagationParams")
      .def(py::init<>())
      .def_readwrite("pl0_db", &PropagationParams::pl0_db)
      .def_readwrite("path_loss_exponent", &PropagationParams::path_loss_exponent)
      .def_readwrite("sigma_shadow_db", &PropagationParams::sigma_shadow_db)
      .def_readwrite("wall_loss_db", &PropagationParams::wall_loss_db)
      .def_readwrite("range_noise_sigma_m", &PropagationParams::range_noise_sigma_m);

  py::class_<WallSegment>(m, "WallSegment")
      .def(py::init<>())
      .def_readwrite("wall_id", &WallSegment::wall_id)
      .def_readwrite("x1", &WallSegment::x1)
      .def_readwrite("y1", &WallSegment::y1)
      .def_readwrite("x2", &WallSegment::x2)
      .def_readwrite("y2", &WallSegment::y2);

  py::class_<Rect>(m, "Rect")
      .def(py::init<>())
      .def_readwrite("x_min", &Rect::x_min)
      .def_readwrite("y_min", &Rect::y_min)
      .def_readwrite("x_max", &Rect::x_max)
      .def_readwrite("y_max", &Rect::y_max);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("roster", &Scenario::roster)
      .def_readwrite("zones", &Scenario::zones)
      .def_readwrite("walls", &Scenario::walls)
      .def_readwrite("params", &Scenario::params)
      .def_readwrite("sampling_region", &Scenario::sampling_region);

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next_u64", &Rng::next_u64)
      .def("next_double", &Rng::next_double)
      .def("uniform", &Rng::uniform)
      .def("normal", &Rng::normal)
      .def("below", &Rng::below);

  m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("index"));

  // core-model
  m.def("validate_dataset", &validate_dataset);
  m.def("zone_of", &zone_of, py::arg("position"), py::arg("zones"));
  m.def("feature_matrix", &feature_matrix, py::arg("dataset"), py::arg("selector"));
  m.def("feature_row", &feature_row, py::arg("sample"), py::arg("columns"));
  m.def("selected_columns", &selected_columns, py::arg("roster"), py::arg("selector"));

  // propagation-sim
  m.def("path_loss_db", &path_loss_db, py::arg("distance_m"), py::arg("params"));
  m.def("fspl_1m_db", &fspl_1m_db, py::arg("frequency_mhz"));
  m.def("simulate_rssi", &simulate_rssi, py::arg("ap"), py::arg("ue"), py::arg("scenario"),
        py::arg("rng"));
  m.def("simulate_range", &simulate_range, py::arg("ap"), py::arg("ue"), py::arg("params"),
        py::arg("rng"));
  m.def("generate_dataset", &generate_dataset, py::arg("scenario"), py::arg("n_samples"),
        py::arg("seed"));
  m.def("reference_scenario", &reference_scenario);

  // forest
  py::enum_<ForestKind>(m, "ForestKind")
      .value("CLASSIFIER", ForestKind::Classifier)
      .value("REGRESSOR_2D", ForestKind::Regressor2D);

  py::class_<ForestParams>(m, "ForestParams")
      .def(py::init<>())
      .def_readwrite("n_trees", &ForestParams::n_trees)
      .def_readwrite("max_depth", &ForestParams::max_depth)
      .def_readwrite("min_samples_leaf", &ForestParams::min_samples_leaf)
      .def_readwrite("features_per_split", &ForestParams::features_per_split)
      .def_readwrite("bootstrap", &ForestParams::bootstrap)
      .def_readwrite("seed", &ForestParams::seed);

  py::class_<Forest>(m, "Forest")
      .def_readonly("kind", &Forest::kind)
      .def_readonly("columns", &Forest::columns)
      .def_readonly("labels", &Forest::labels)
      .def_property_readonly("n_trees", [](const Forest& f) { return f.trees.size(); });

  m.def("gini", &gini);
  m.def("variance_impurity", &variance_impurity);
  m.def("fit_classifier_forest",
        [](const FeatureMatrix& X, const std::vector<std::string>& labels,
           const ForestParams& params) { return fit_forest(X, labels, params); },
        py::arg("X"), py::arg("labels"), py::arg("params"));
  m.def("fit_regressor_forest",
        [](const FeatureMatrix& X, const std::vector<Position>& targets,
           const ForestParams& params) { return fit_forest(X, targets, params); },
        py::arg("X"), py::arg("targets"), py::arg("params"));
  m.def("predict_class", [](const Forest& forest, const std::vector<double>& x) {
    return predict_class(forest, as_row(x));
  });
  m.def("predict_position", [](const Forest& forest, const std::vector<double>& x) {
    return predict_position(forest, as_row(x));
  });
  m.def("write_forest", &write_forest);
  m.def("parse_forest", &parse_forest);
  m.def("save_forest", &save_forest, py::arg("forest"), py::arg("path"));
  m.def("load_forest", &load_forest, py::arg("path"));

  // locate
  py::class_<RangeObservation>(m, "RangeObservation")
      .def(py::init<>())
      .def(py::init([](Position ap_position, double distance_m) {
             return RangeObservation{ap_position, distance_m};
           }),
           py::arg("ap_position"), py::arg("distance_m"))
      .def_readwrite("ap_position", &RangeObservation::ap_position)
      .def_readwrite("distance_m", &RangeObservation::distance_m);

  py::class_<FingerprintDb>(m, "FingerprintDb")
      .def(py::init<>())
      .def_readwrite("columns", &FingerprintDb::columns)
      .def_readwrite("entries", &FingerprintDb::entries);

  m.def("proximity_locate",
        [](const std::vector<double>& features, const std::vector<AccessPoint>& roster,
           const std::vector<std::string>& columns) {
          return proximity_locate(features, roster, columns);
        });
  m.def("rssi_to_range", &rssi_to_range, py::arg("rssi_dbm"), py::arg("tx_power_dbm"),
        py::arg("params"));
  m.def("multilaterate",
        [](const std::vector<RangeObservation>& obs, std::optional<Position> guess) {
          return multilaterate(obs, guess);
        },
        py::arg("observations"), py::arg("initial_guess") = std::nullopt);
  m.def("knn_locate", [](const FingerprintDb& db, const std::vector<double>& query,
                         std::size_t k) { return knn_locate(db, query, k); });
  m.def("classify_pipeline", [](const Forest& forest, const std::vector<double>& x) {
    return classify_pipeline(forest, as_row(x));
  });
  m.def("regress_then_classify",
        [](const Forest& forest, const std::vector<double>& x, const std::vector<Zone>& zones) {
          return regress_then_classify(forest, as_row(x), zones);
        });

  // eval
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("test_fraction", &ExperimentConfig::test_fraction)
      .def_readwrite("n_iterations", &ExperimentConfig::n_iterations)
      .def_readwrite("master_seed", &ExperimentConfig::master_seed)
      .def_readwrite("classifier_params", &ExperimentConfig::classifier_params)
      .def_readwrite("regressor_params", &ExperimentConfig::regressor_params)
      .def_readwrite("technologies", &ExperimentConfig::technologies)
      .def_readwrite("n_workers", &ExperimentConfig::n_workers);

  py::class_<Cdf>(m, "Cdf")
      .def_readonly("support", &Cdf::support)
      .def_readonly("cumulative", &Cdf::cumulative)
      .def("at", &Cdf::at);

  py::class_<MethodStats>(m, "MethodStats")
      .def_readonly("mean_accuracy", &MethodStats::mean_accuracy)
      .def_readonly("std_accuracy", &MethodStats::std_accuracy)
      .def_readonly("iteration_accuracy", &MethodStats::iteration_accuracy);

  py::class_<TechReport>(m, "TechReport")
      .def_readonly("technology", &TechReport::technology)
      .def_readonly("classify", &TechReport::classify)
      .def_readonly("regress", &TechReport::regress)
      .def_readonly("pooled_errors_m", &TechReport::pooled_errors_m)
      .def_readonly("error_cdf", &TechReport::error_cdf)
      .def_readonly("error_p80_m", &TechReport::error_p80_m);

  py::class_<ExperimentReport>(m, "ExperimentReport")
      .def_readonly("per_tech", &ExperimentReport::per_tech);

  py::class_<SplitIndices>(m, "SplitIndices")
      .def_readonly("train", &SplitIndices::train)
      .def_readonly("test", &SplitIndices::test);

  m.def("monte_carlo_split",
        [](const Dataset& dataset, double test_fraction, Rng& rng) {
          return monte_carlo_split(dataset, test_fraction, rng);
        },
        py::arg("dataset"), py::arg("test_fraction"), py::arg("rng"));
  m.def("horizontal_error", &horizontal_error, py::arg("estimate"), py::arg("truth"));
  m.def("empirical_cdf", &empirical_cdf);
  m.def("percentile", &percentile, py::arg("errors"), py::arg("q"));
  m.def("run_experiment", &run_experiment, py::arg("dataset"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  // files and configs
  m.def("write_dataset_csv", &write_dataset_csv);
  m.def("parse_dataset_csv", &parse_dataset_csv);
  m.def("save_dataset_csv", &save_dataset_csv, py::arg("dataset"), py::arg("path"));
  m.def("load_dataset_csv", &load_dataset_csv, py::arg("path"));
  m.def("write_scenario", &write_scenario);
  m.def("parse_scenario", &parse_scenario);
  m.def("save_scenario", &save_scenario, py::arg("scenario"), py::arg("path"));
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("write_experiment_config", &write_experiment_config);
  m.def("parse_experiment_config", &parse_experiment_config);
  m.def("load_experiment_config", &load_experiment_config, py::arg("path"));
  m.def("write_report_files", &write_report_files, py::arg("report"), py::arg("directory"));
  m.def("write_report_summary_csv", &write_report_summary_csv);
}
