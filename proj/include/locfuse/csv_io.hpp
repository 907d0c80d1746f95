#pragma once

#include <string>

#include "locfuse/types.hpp"

namespace locfuse {

// Dataset CSV: '#' preamble lines carry the roster and zones ("# ap <id>
// <tech> <x> <y> <z> <tx_dbm>", "# zone <id> <x_min> <y_min> <x_max>
// <y_max>"), followed by the tabular schema
//   sample_id,x_m,y_m,zone,rssi_<ap_id>...,range_<ap_id>...
// with AP columns in roster order, empty cells for absent measurements,
// UTF-8, LF endings and floats at 9 significant digits. Parse failures throw
// Error("csv-parse") naming the offending line.
std::string write_dataset_csv(const Dataset& dataset);
Dataset parse_dataset_csv(const std::string& text);

void save_dataset_csv(const Dataset& dataset, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

}  // namespace locfuse
