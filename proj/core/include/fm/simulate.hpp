#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fm/control.hpp"
#include "fm/events.hpp"
#include "fm/model.hpp"
#include "fm/trace.hpp"

namespace fm {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulationOptions {
  // Re-check token exclusivity and conservation after every phase; a
  // violation throws SimulationError.
  bool check_invariants = false;
};

// Deterministic tick-based execution.
//
// Each tick runs, in order: pending event marks, inhibit guard reads, seeding,
// the hop phase, the trigger phase, then event bookkeeping. With a program,
// only arcs of the active events' regions are enabled; with `program ==
// nullptr` everything is. The run ends when the program completes, when a
// free run sees a tick without activity and nothing pending, or at the tick
// limit (reason TickLimit, partial trace). Inputs must be validated.
Trace simulate(const Model& model, const std::vector<EventDef>& events,
               const ControlProgram* program, const Scenario& scenario,
               const std::vector<Constraint>& constraints = {},
               const SimulationOptions& options = {});

enum class Verdict { Pass, Fail };

struct ConstraintVerdict {
  Constraint constraint;
  Verdict verdict = Verdict::Pass;
  // Deadline: {start, end} record indices on pass, {end} on fail.
  // Inhibit: the offending hop records.
  std::vector<std::size_t> witnesses;
  bool missing = false;          // a required event mark was absent
  std::optional<Tick> measured;  // deadline: end tick - start tick
};

class UnknownEventName : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// When `events` is given, deadline names must belong to it (UnknownEventName).
std::vector<ConstraintVerdict> check_constraints(const Trace& trace,
                                                 const std::vector<Constraint>& constraints,
                                                 const std::vector<EventDef>* events = nullptr);

struct WindowVerdict {
  std::string event;
  Verdict verdict = Verdict::Pass;
  std::vector<std::size_t> witnesses;
};

// Events carrying a time window must start no earlier than `earliest` and end
// no later than `latest`; each of their activations is checked.
std::vector<WindowVerdict> check_windows(const Trace& trace, const std::vector<EventDef>& events);

}  // namespace fm
