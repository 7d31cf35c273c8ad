#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fm/control.hpp"
#include "fm/diagnostic.hpp"
#include "fm/model.hpp"

namespace fm {

struct ScenarioResult {
  std::optional<Scenario> scenario;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return scenario.has_value(); }
};

// Line-oriented scenario text, '#' comments:
//   seed <stage-path> at <tick>
//   guard <name> = true,false,...
//   delay <stage-path> <ticks>
//   limit <ticks>
// S001 syntax error; S002 reference to an unknown stage, a non-create seed
// stage or an undeclared guard.
ScenarioResult parse_scenario(const std::string& text, const Model& model);

std::string serialize(const Scenario& scenario);

}  // namespace fm
