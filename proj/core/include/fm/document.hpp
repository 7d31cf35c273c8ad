#pragma once

#include <vector>

#include "fm/control.hpp"
#include "fm/events.hpp"
#include "fm/model.hpp"

namespace fm {

// Everything one .fm file declares.
struct Document {
  Model model;
  std::vector<EventDef> events;
  std::vector<ControlProgram> controls;
  std::vector<Constraint> constraints;
};

// Model compared structurally; events, controls and constraints compared in
// declaration order.
bool structurally_equal(const Document& a, const Document& b);

}  // namespace fm
