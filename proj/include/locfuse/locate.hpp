#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "locfuse/forest.hpp"
#include "locfuse/propagation.hpp"
#include "locfuse/types.hpp"

namespace locfuse {

struct RangeObservation {
  Position ap_position;
  double distance_m = 0.0;
};

struct FingerprintDb {
  std::vector<std::string> columns;
  std::vector<std::pair<std::vector<double>, Position>> entries;
};

// Position of the loudest AP; RSSI ties go to the lexicographically lowest
// ap_id. Throws Error("no-coverage") when every entry sits at the floor.
Position proximity_locate(std::span<const double> features,
                          const std::vector<AccessPoint>& roster,
                          const std::vector<std::string>& columns);

// Inverse of the log-distance model: 10^((tx - pl0 - rssi) / (10 n)).
// Throws Error("unrangeable") at or below the RSSI floor.
double rssi_to_range(double rssi_dbm, double tx_power_dbm, const PropagationParams& params);

// 2D least-squares multilateration: linearized closed-form start (first
// sphere subtracted from the rest), refined by Gauss-Newton; returns the best
// iterate. Needs >= 3 observations from non-collinear anchors.
Position multilaterate(const std::vector<RangeObservation>& observations,
                       std::optional<Position> initial_guess = std::nullopt);

// Mean position of the k nearest fingerprints (Euclidean in feature space);
// distance ties break by entry order.
Position knn_locate(const FingerprintDb& db, std::span<const double> query, std::size_t k);

// The two attendance pipelines.
std::string classify_pipeline(const Forest& classifier, std::span<const double> features);
std::string regress_then_classify(const Forest& regressor, std::span<const double> features,
                                  const std::vector<Zone>& zones);

}  // namespace locfuse
