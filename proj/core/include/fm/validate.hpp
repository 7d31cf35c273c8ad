#pragma once

#include <string_view>
#include <vector>

#include "fm/control.hpp"
#include "fm/diagnostic.hpp"
#include "fm/document.hpp"
#include "fm/events.hpp"
#include "fm/model.hpp"

namespace fm {

struct Rule {
  std::string_view code;
  Severity severity;
  std::string_view summary;
};

// V001..V012 and W001, in code order.
const std::vector<Rule>& rule_table();

// Whole-model checks. Diagnostics are ordered by rule code, then by the order
// in which the offending elements were declared; each cites one code.
std::vector<Diagnostic> validate(const Model& model, const std::vector<EventDef>& events,
                                 const std::vector<ControlProgram>& controls,
                                 const std::vector<Constraint>& constraints);

std::vector<Diagnostic> validate(const Document& document);

}  // namespace fm
