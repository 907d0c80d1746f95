#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "locfuse/rng.hpp"
#include "locfuse/types.hpp"

namespace locfuse {

// Handheld UE height used for generated ground-truth positions.
inline constexpr double kUeHeightM = 1.5;

struct PropagationParams {
  double pl0_db = 40.0;             // path loss at the 1 m reference distance
  double path_loss_exponent = 2.0;  // > 0
  double sigma_shadow_db = 0.0;     // log-normal shadowing std
  double wall_loss_db = 0.0;        // per wall crossed
  double range_noise_sigma_m = 1.0; // simulated FTM/RTT ranging noise

  friend bool operator==(const PropagationParams&, const PropagationParams&) = default;
};

struct WallSegment {
  std::string wall_id;
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

  friend bool operator==(const WallSegment&, const WallSegment&) = default;
};

struct Rect {
  double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Scenario {
  std::vector<AccessPoint> roster;
  std::vector<Zone> zones;
  std::vector<WallSegment> walls;
  std::map<RadioTechnology, PropagationParams> params;
  Rect sampling_region;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Deterministic log-distance path loss: pl0 + 10*n*log10(d / 1m).
// Throws Error("non-positive-distance") for d <= 0.
double path_loss_db(double distance_m, const PropagationParams& params);

// Free-space path loss at 1 m for a carrier in MHz; the pl0 source for the
// reference scenario defaults.
double fspl_1m_db(double frequency_mhz);

// Walls crossed by the 2D segment a -> b (strict crossings only).
int walls_crossed(const std::vector<WallSegment>& walls, const Position& a, const Position& b);

// tx - path_loss(3D distance) - wall_loss * crossings - N(0, sigma_shadow),
// clipped to kRssiFloorDbm. Throws Error("degenerate-geometry") when the UE
// coincides with the AP.
double simulate_rssi(const AccessPoint& ap, const Position& ue, const Scenario& scenario, Rng& rng);

// max(0, 3D distance + N(0, range_noise_sigma)).
double simulate_range(const AccessPoint& ap, const Position& ue, const PropagationParams& params,
                      Rng& rng);

// Uniform UE positions over the sampling region at z = kUeHeightM; every
// sample carries RSSI and a simulated range for every roster AP plus
// zone_label = zone_of(truth). Per-sample randomness derives from
// derive_seed(seed, index), so output is independent of generation schedule.
Dataset generate_dataset(const Scenario& scenario, std::size_t n_samples, std::uint64_t seed);

// Canonical desk-scale replica: two adjacent 7 m x 5 m laboratories split by
// an interior wall, a 2 m corridor strip, 3 gNBs (20 dBm) and 3 WiFi APs.
Scenario reference_scenario();

// Problems that make a scenario unusable (missing params, bad region, ...).
std::vector<std::string> scenario_problems(const Scenario& scenario);

}  // namespace locfuse
