#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "fm/model.hpp"

namespace fm {

using Tick = long long;

// Orchestration tree over events.
struct ControlNode {
  enum class Kind { Run, Seq, Par, RepeatIf };

  Kind kind = Kind::Run;
  std::string event;                  // Run and RepeatIf
  std::vector<ControlNode> children;  // Seq/Par children; RepeatIf body is children[0]

  static ControlNode run(std::string event);
  static ControlNode seq(std::vector<ControlNode> children);
  static ControlNode par(std::vector<ControlNode> children);
  static ControlNode repeat_if(std::string event, ControlNode body);

  friend bool operator==(const ControlNode&, const ControlNode&) = default;
};

struct ControlProgram {
  std::string name;
  ControlNode root;

  friend bool operator==(const ControlProgram&, const ControlProgram&) = default;
};

// Every event name mentioned anywhere in the tree, in first-visit order.
std::vector<std::string> referenced_events(const ControlNode& node);

const ControlProgram* find_program(const std::vector<ControlProgram>& programs,
                                   const std::string& name);

// "{first, last} < bound": last's end minus first's start stays under bound.
struct Deadline {
  std::string first;
  std::string last;
  Tick bound = 0;

  friend bool operator==(const Deadline&, const Deadline&) = default;
};

// While `guard` reads true, `target` accepts no incoming hops.
struct Inhibit {
  StageRef target;
  std::string guard;

  friend bool operator==(const Inhibit&, const Inhibit&) = default;
};

using Constraint = std::variant<Deadline, Inhibit>;

std::string describe(const Constraint& constraint);

struct Seed {
  StageRef stage;
  Tick tick = 0;

  friend bool operator==(const Seed&, const Seed&) = default;
};

// Environment of a run. Guard schedules are consumed one value per evaluation
// and read false once exhausted.
struct Scenario {
  static constexpr Tick kDefaultTickLimit = 1000;

  std::vector<Seed> seeds;
  std::map<std::string, std::vector<bool>> guard_schedule;
  Tick tick_limit = kDefaultTickLimit;
  std::map<StageRef, Tick> delays;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

}  // namespace fm
