#pragma once

#include "sff/harness.hpp"

#include <string>

namespace sff {

// INI scenario files; the grammar is described in docs/config.md.
Scenario parse_config(const std::string& path);
Scenario parse_config_text(const std::string& text, const std::string& origin = "<text>");

// Emits every field with 17 significant digits so that parsing the output
// reproduces the scenario exactly.
std::string serialize_config(const Scenario& s);

}  // namespace sff
