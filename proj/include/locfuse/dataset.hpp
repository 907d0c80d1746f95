#pragma once

#include <string>
#include <vector>

#include "locfuse/types.hpp"

namespace locfuse {

struct Violation {
  std::string rule;     // e.g. "unknown-ap", "label-mismatch"
  std::string subject;  // sample_id / ap_id / zone_id the rule fired on
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool valid() const { return violations.empty(); }
};

// Reports every invariant violation; never throws. An empty report means the
// dataset is accepted by every other operation in this library.
ValidationReport validate_dataset(const Dataset& dataset);

// Label of the unique zone whose closed rectangle contains (p.x, p.y), or
// "outside". Throws Error("ambiguous-zones") if the point is covered twice.
std::string zone_of(const Position& p, const std::vector<Zone>& zones);

// Roster columns filtered by technology selector, in roster order.
std::vector<std::string> selected_columns(const std::vector<AccessPoint>& roster,
                                          TechnologySelector selector);

FeatureMatrix feature_matrix(const Dataset& dataset, TechnologySelector selector);

// Feature vector for a single sample against an explicit column order;
// missing entries are filled with kRssiFloorDbm.
std::vector<double> feature_row(const Sample& sample, const std::vector<std::string>& columns);

}  // namespace locfuse
