#include "locfuse/propagation.hpp"

#include <algorithm>
#include <cmath>

#include "locfuse/dataset.hpp"
#include "locfuse/error.hpp"

namespace locfuse {

double path_loss_db(double distance_m, const PropagationParams& params) {
  if (!(distance_m > 0.0)) {
    throw Error("non-positive-distance", "path loss needs distance > 0 m");
  }
  return params.pl0_db + 10.0 * params.path_loss_exponent * std::log10(distance_m);
}

double fspl_1m_db(double frequency_mhz) {
  // FSPL(d, f) = 20 log10(d/m) + 20 log10(f/MHz) - 27.55, at d = 1 m.
  return 20.0 * std::log10(frequency_mhz) - 27.55;
}

namespace {

double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

// Strict segment crossing; touching endpoints and collinear overlap do not count.
bool segments_cross(double ax, double ay, double bx, double by, double cx, double cy, double dx,
                    double dy) {
  const double d1 = cross(bx - ax, by - ay, cx - ax, cy - ay);
  const double d2 = cross(bx - ax, by - ay, dx - ax, dy - ay);
  const double d3 = cross(dx - cx, dy - cy, ax - cx, ay - cy);
  const double d4 = cross(dx - cx, dy - cy, bx - cx, by - cy);
  return ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) &&
         ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0));
}

}  // namespace

int walls_crossed(const std::vector<WallSegment>& walls, const Position& a, const Position& b) {
  int n = 0;
  for (const WallSegment& w : walls) {
    if (segments_cross(a.x, a.y, b.x, b.y, w.x1, w.y1, w.x2, w.y2)) ++n;
  }
  return n;
}

double simulate_rssi(const AccessPoint& ap, const Position& ue, const Scenario& scenario,
                     Rng& rng) {
  const double dist = dist3d(ap.position, ue);
  if (dist <= 0.0) {
    throw Error("degenerate-geometry", "ue coincides with ap '" + ap.ap_id + "'");
  }
  const auto it = scenario.params.find(ap.tech);
  if (it == scenario.params.end()) {
    throw Error("missing-params", std::string("no propagation params for ") + to_string(ap.tech));
  }
  const PropagationParams& p = it->second;
  double rssi = ap.tx_power_dbm - path_loss_db(dist, p);
  rssi -= p.wall_loss_db * walls_crossed(scenario.walls, ap.position, ue);
  if (p.sigma_shadow_db > 0.0) rssi -= rng.normal(0.0, p.sigma_shadow_db);
  return std::max(rssi, kRssiFloorDbm);
}

double simulate_range(const AccessPoint& ap, const Position& ue, const PropagationParams& params,
                      Rng& rng) {
  double range = dist3d(ap.position, ue);
  if (params.range_noise_sigma_m > 0.0) range += rng.normal(0.0, params.range_noise_sigma_m);
  return std::max(range, 0.0);
}

Dataset generate_dataset(const Scenario& scenario, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw Error("bad-argument", "n_samples must be >= 1");
  const Rect& r = scenario.sampling_region;
  if (!(r.x_min < r.x_max) || !(r.y_min < r.y_max)) {
    throw Error("empty-region", "sampling region must have positive area");
  }
  const auto problems = scenario_problems(scenario);
  if (!problems.empty()) throw Error("invalid-scenario", problems.front());

  Dataset dataset;
  dataset.roster = scenario.roster;
  dataset.zones = scenario.zones;
  dataset.samples.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    // Per-sample stream: position first, then rssi + range per AP in roster order.
    Rng rng(derive_seed(seed, i));
    Sample s;
    s.sample_id = "s" + std::to_string(i);
    // Radio is simulated at handheld height; the stored ground truth is the
    // horizontal position (the dataset CSV carries x and y only).
    const Position ue{rng.uniform(r.x_min, r.x_max), rng.uniform(r.y_min, r.y_max), kUeHeightM};
    s.truth = {ue.x, ue.y, 0.0};
    for (const AccessPoint& ap : scenario.roster) {
      s.rssi_dbm[ap.ap_id] = simulate_rssi(ap, ue, scenario, rng);
      s.range_m[ap.ap_id] = simulate_range(ap, ue, scenario.params.at(ap.tech), rng);
    }
    s.zone_label = zone_of(s.truth, scenario.zones);
    dataset.samples.push_back(std::move(s));
  }
  return dataset;
}

Scenario reference_scenario() {
  Scenario sc;

  // Two adjacent 7 m x 5 m laboratories sharing the wall at x = 7, with a
  // 2 m corridor strip along y in (5, 7).
  sc.zones = {
      {"lab1", 0.0, 0.0, 7.0, 5.0},
      {"lab2", 7.0, 0.0, 14.0, 5.0},
  };
  sc.walls = {
      {"labs-divider", 7.0, 0.0, 7.0, 5.0},
      {"corridor", 0.0, 5.0, 14.0, 5.0},
  };
  sc.sampling_region = {0.0, 0.0, 14.0, 7.0};

  // pl0 defaults: free-space loss at 1 m (3774.990 MHz -> 44.0 dB for the
  // gNBs, 2.4 GHz -> 40.0 dB for the mesh APs), rounded to 0.1 dB.
  PropagationParams five_g;
  five_g.pl0_db = 44.0;
  five_g.path_loss_exponent = 2.2;
  five_g.sigma_shadow_db = 4.0;
  five_g.wall_loss_db = 8.0;
  five_g.range_noise_sigma_m = 1.0;

  PropagationParams wifi = five_g;
  wifi.pl0_db = 40.0;
  wifi.path_loss_exponent = 2.5;

  sc.params = {{RadioTechnology::FiveG, five_g}, {RadioTechnology::WiFi, wifi}};

  // Ceiling-mounted gNBs at 20 dBm, mesh APs on shelves at 2 m.
  sc.roster = {
      {"gnb1", RadioTechnology::FiveG, {2.0, 2.5, 2.5}, 20.0},
      {"gnb2", RadioTechnology::FiveG, {11.0, 2.5, 3.5}, 20.0},
      {"gnb3", RadioTechnology::FiveG, {7.0, 6.5, 3.5}, 20.0},
      {"wap1", RadioTechnology::WiFi, {5.0, 4.0, 2.0}, 20.0},
      {"wap2", RadioTechnology::WiFi, {9.0, 1.0, 2.0}, 20.0},
      {"wap3", RadioTechnology::WiFi, {2.0, 6.0, 2.0}, 20.0},
  };

  return sc;
}

std::vector<std::string> scenario_problems(const Scenario& scenario) {
  std::vector<std::string> problems;
  if (scenario.roster.empty()) problems.push_back("roster is empty");
  for (const AccessPoint& ap : scenario.roster) {
    if (scenario.params.find(ap.tech) == scenario.params.end()) {
      problems.push_back(std::string("no propagation params for ") + to_string(ap.tech));
      break;
    }
  }
  for (const auto& [tech, p] : scenario.params) {
    if (!(p.path_loss_exponent > 0.0) || p.sigma_shadow_db < 0.0 || p.wall_loss_db < 0.0 ||
        p.range_noise_sigma_m < 0.0) {
      problems.push_back(std::string("invalid propagation params for ") + to_string(tech));
    }
  }
  const Rect& r = scenario.sampling_region;
  if (!(r.x_min < r.x_max) || !(r.y_min < r.y_max)) {
    problems.push_back("sampling region must have positive area");
  }
  for (std::size_t i = 0; i < scenario.zones.size(); ++i) {
    const Zone& z = scenario.zones[i];
    if (!(z.x_min < z.x_max) || !(z.y_min < z.y_max)) {
      problems.push_back("zone '" + z.zone_id + "' has no area");
    }
    for (std::size_t j = i + 1; j < scenario.zones.size(); ++j) {
      const Zone& o = scenario.zones[j];
      if (z.x_min < o.x_max && o.x_min < z.x_max && z.y_min < o.y_max && o.y_min < z.y_max) {
        problems.push_back("zones '" + z.zone_id + "' and '" + o.zone_id + "' overlap");
      }
    }
  }
  return problems;
}

}  // namespace locfuse
