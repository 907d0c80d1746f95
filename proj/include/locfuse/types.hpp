#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace locfuse {

// RSSI assigned to access points a sample did not hear; below any plausible
// measured value so feature matrices stay rectangular.
inline constexpr double kRssiFloorDbm = -120.0;

// Zone label for positions not contained in any zone.
inline constexpr const char* kOutsideLabel = "outside";

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

inline bool is_finite(const Position& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

inline double dist2d(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

inline double dist3d(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

enum class RadioTechnology { FiveG, WiFi };

inline const char* to_string(RadioTechnology tech) {
  return tech == RadioTechnology::FiveG ? "5g" : "wifi";
}

inline std::optional<RadioTechnology> tech_from_string(std::string_view s) {
  if (s == "5g") return RadioTechnology::FiveG;
  if (s == "wifi") return RadioTechnology::WiFi;
  return std::nullopt;
}

struct AccessPoint {
  std::string ap_id;
  RadioTechnology tech = RadioTechnology::FiveG;
  Position position;
  double tx_power_dbm = 0.0;

  friend bool operator==(const AccessPoint&, const AccessPoint&) = default;
};

// Closed axis-aligned rectangle; boundary points belong to the zone.
struct Zone {
  std::string zone_id;
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }

  friend bool operator==(const Zone&, const Zone&) = default;
};

struct Sample {
  std::string sample_id;
  std::map<std::string, double> rssi_dbm;  // ap_id -> dBm; absent key = not heard
  std::map<std::string, double> range_m;   // ap_id -> meters; optional
  Position truth;
  std::string zone_label;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::vector<AccessPoint> roster;
  std::vector<Zone> zones;
  std::vector<Sample> samples;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Rectangular per-sample RSSI matrix; column order = roster order filtered by
// the technology selector, missing entries filled with kRssiFloorDbm.
struct FeatureMatrix {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

enum class TechnologySelector { FiveG, WiFi, Fusion };

inline const char* to_string(TechnologySelector sel) {
  switch (sel) {
    case TechnologySelector::FiveG: return "5g";
    case TechnologySelector::WiFi: return "wifi";
    default: return "fusion";
  }
}

inline std::optional<TechnologySelector> selector_from_string(std::string_view s) {
  if (s == "5g") return TechnologySelector::FiveG;
  if (s == "wifi") return TechnologySelector::WiFi;
  if (s == "fusion") return TechnologySelector::Fusion;
  return std::nullopt;
}

}  // namespace locfuse
