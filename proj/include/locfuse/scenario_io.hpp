#pragma once

#include <string>

#include "locfuse/propagation.hpp"

namespace locfuse {

// Human-editable scenario config: '#' comments, key = value pairs grouped
// under [region], [zone <id>], [wall <id>], [params <tech>], [ap <id>]
// sections. write_scenario emits a canonical ordering that parses back to an
// equal Scenario.
std::string write_scenario(const Scenario& scenario);
Scenario parse_scenario(const std::string& text);

void save_scenario(const Scenario& scenario, const std::string& path);
Scenario load_scenario(const std::string& path);

}  // namespace locfuse
