#pragma once

#include <string>

#include "fm/control.hpp"
#include "fm/document.hpp"

namespace fm::test {

std::string fixture_path(const std::string& file);
std::string golden_path(const std::string& file);
std::string read_file(const std::string& path);

// Parses fixtures/<name>.fm; throws std::runtime_error on any diagnostic.
Document load_fixture(const std::string& name);
// Parses inline model text; throws std::runtime_error on any diagnostic.
Document parse_document(const std::string& text);
// Parses inline scenario text against `model`.
Scenario parse_scenario_text(const std::string& text, const Model& model);

// Reads fixtures/<name>.scn against `model`.
Scenario load_scenario(const std::string& name, const Model& model);

}  // namespace fm::test
