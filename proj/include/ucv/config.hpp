#pragma once

#include <string>

#include "ucv/simulation.hpp"

namespace ucv {

// Study configuration as `key = value` lines, `#` comments. Unknown keys
// and malformed values raise ConfigError naming the line and field. See
// the README for the schema.
SimulationConfig parse_study_config_string(const std::string& text);
SimulationConfig parse_study_config_file(const std::string& path);

}  // namespace ucv
