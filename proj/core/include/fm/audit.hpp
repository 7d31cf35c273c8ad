#pragma once

#include <string>
#include <vector>

#include "fm/control.hpp"
#include "fm/events.hpp"
#include "fm/model.hpp"
#include "fm/trace.hpp"

namespace fm {

// Replays a trace against the model and reports every violation of:
//   tick monotonicity, hop legality (each hop follows a model flow arc or a
//   storage annex), token exclusivity (one location per token, ids unique,
//   at most one hop per token per tick), token conservation (no token appears
//   or disappears outside token-created records), controlled containment
//   (with `controlled`, hops and firings stay inside the active events'
//   regions) and event-start strictly before its event-end.
// Returns an empty list for a sound trace.
std::vector<std::string> audit_trace(const Model& model, const std::vector<EventDef>& events,
                                     const Trace& trace, bool controlled);

}  // namespace fm
