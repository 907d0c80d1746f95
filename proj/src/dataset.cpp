#include "locfuse/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "locfuse/error.hpp"

namespace locfuse {

namespace {

bool id_ok(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
  }
  return true;
}

bool interiors_overlap(const Zone& a, const Zone& b) {
  return a.x_min < b.x_max && b.x_min < a.x_max && a.y_min < b.y_max && b.y_min < a.y_max;
}

}  // namespace

std::string zone_of(const Position& p, const std::vector<Zone>& zones) {
  const Zone* hit = nullptr;
  for (const Zone& z : zones) {
    if (!z.contains(p.x, p.y)) continue;
    if (hit != nullptr) {
      throw Error("ambiguous-zones",
                  "point contained in zones '" + hit->zone_id + "' and '" + z.zone_id + "'");
    }
    hit = &z;
  }
  return hit != nullptr ? hit->zone_id : kOutsideLabel;
}

ValidationReport validate_dataset(const Dataset& dataset) {
  ValidationReport report;
  auto add = [&report](std::string rule, std::string subject, std::string detail) {
    report.violations.push_back({std::move(rule), std::move(subject), std::move(detail)});
  };

  if (dataset.roster.empty()) add("empty-roster", "", "dataset has no access points");

  std::set<std::string> roster_ids;
  for (const AccessPoint& ap : dataset.roster) {
    if (!id_ok(ap.ap_id)) add("invalid-id", ap.ap_id, "ap_id must be a nonempty token");
    if (!roster_ids.insert(ap.ap_id).second)
      add("duplicate-ap", ap.ap_id, "ap_id appears twice in the roster");
    if (!std::isfinite(ap.tx_power_dbm))
      add("non-finite-tx-power", ap.ap_id, "tx_power must be finite");
    if (!is_finite(ap.position)) add("non-finite-position", ap.ap_id, "ap position must be finite");
  }

  for (const Zone& z : dataset.zones) {
    if (!id_ok(z.zone_id) || z.zone_id == kOutsideLabel)
      add("invalid-id", z.zone_id, "zone_id must be a nonempty token distinct from 'outside'");
    if (!(z.x_min < z.x_max) || !(z.y_min < z.y_max))
      add("degenerate-zone", z.zone_id, "zone rectangle must have positive area");
  }
  for (std::size_t i = 0; i < dataset.zones.size(); ++i) {
    for (std::size_t j = i + 1; j < dataset.zones.size(); ++j) {
      if (interiors_overlap(dataset.zones[i], dataset.zones[j])) {
        add("overlapping-zones", dataset.zones[i].zone_id,
            "interior overlaps zone '" + dataset.zones[j].zone_id + "'");
      }
    }
  }
  const bool zones_usable =
      std::none_of(report.violations.begin(), report.violations.end(), [](const Violation& v) {
        return v.rule == "overlapping-zones" || v.rule == "degenerate-zone";
      });

  for (const Sample& s : dataset.samples) {
    if (!id_ok(s.sample_id)) add("invalid-id", s.sample_id, "sample_id must be a nonempty token");
    if (!is_finite(s.truth)) add("non-finite-position", s.sample_id, "truth must be finite");
    for (const auto& [ap_id, rssi] : s.rssi_dbm) {
      if (roster_ids.count(ap_id) == 0)
        add("unknown-ap", s.sample_id, "rssi references unknown ap '" + ap_id + "'");
      if (!std::isfinite(rssi) || rssi > 0.0 || rssi < kRssiFloorDbm)
        add("rssi-range", s.sample_id, "rssi for '" + ap_id + "' outside [-120, 0] dBm");
    }
    for (const auto& [ap_id, range] : s.range_m) {
      if (roster_ids.count(ap_id) == 0)
        add("unknown-ap", s.sample_id, "range references unknown ap '" + ap_id + "'");
      if (!std::isfinite(range) || range < 0.0)
        add("negative-range", s.sample_id, "range for '" + ap_id + "' must be >= 0");
    }
    if (zones_usable && is_finite(s.truth)) {
      const std::string expected = zone_of(s.truth, dataset.zones);
      if (s.zone_label != expected) {
        add("label-mismatch", s.sample_id,
            "label '" + s.zone_label + "' but truth lies in '" + expected + "'");
      }
    }
  }

  return report;
}

std::vector<std::string> selected_columns(const std::vector<AccessPoint>& roster,
                                          TechnologySelector selector) {
  std::vector<std::string> columns;
  for (const AccessPoint& ap : roster) {
    const bool match = selector == TechnologySelector::Fusion ||
                       (selector == TechnologySelector::FiveG && ap.tech == RadioTechnology::FiveG) ||
                       (selector == TechnologySelector::WiFi && ap.tech == RadioTechnology::WiFi);
    if (match) columns.push_back(ap.ap_id);
  }
  if (columns.empty()) {
    throw Error("empty-selector",
                std::string("selector '") + to_string(selector) + "' matches no roster ap");
  }
  return columns;
}

std::vector<double> feature_row(const Sample& sample, const std::vector<std::string>& columns) {
  std::vector<double> row;
  row.reserve(columns.size());
  for (const std::string& ap_id : columns) {
    const auto it = sample.rssi_dbm.find(ap_id);
    row.push_back(it != sample.rssi_dbm.end() ? it->second : kRssiFloorDbm);
  }
  return row;
}

FeatureMatrix feature_matrix(const Dataset& dataset, TechnologySelector selector) {
  FeatureMatrix m;
  m.columns = selected_columns(dataset.roster, selector);
  m.rows.reserve(dataset.samples.size());
  for (const Sample& s : dataset.samples) m.rows.push_back(feature_row(s, m.columns));
  return m;
}

}  // namespace locfuse
