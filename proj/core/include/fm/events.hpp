#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fm/diagnostic.hpp"
#include "fm/model.hpp"

namespace fm {

// Identifies a flow or trigger arc by its endpoints; (from, to) is unique per arc family.
struct ArcRef {
  StageRef from;
  StageRef to;

  friend bool operator==(const ArcRef&, const ArcRef&) = default;
  friend auto operator<=>(const ArcRef&, const ArcRef&) = default;
};

// A subgraph of the script: the space an event occupies.
struct Region {
  std::set<StageRef> stages;
  std::set<ArcRef> flows;
  std::set<ArcRef> triggers;

  bool empty() const { return stages.empty() && flows.empty() && triggers.empty(); }
  bool subset_of(const Region& other) const;
  Region& merge(const Region& other);

  friend bool operator==(const Region&, const Region&) = default;
};

struct TimeWindow {
  long long earliest = 0;
  long long latest = 0;

  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

struct EventDef {
  std::string name;
  Region region;
  std::optional<std::string> parent;
  std::optional<TimeWindow> window;

  friend bool operator==(const EventDef&, const EventDef&) = default;
};

class EventError : public std::runtime_error {
 public:
  explicit EventError(Diagnostic diagnostic);
  const Diagnostic& diagnostic() const noexcept { return diagnostic_; }

 private:
  Diagnostic diagnostic_;
};

// Nonempty, closed under arc endpoints, every member present in the model and
// weakly connected over the region's own flow and trigger arcs. Returns the
// first violated rule (V009, then V001, then V008) or nullopt.
std::optional<Diagnostic> region_wellformed(const Model& model, const Region& region);

// Checks `region` and the nesting rule against `existing` and returns the new
// definition. Overlap with other events is allowed. Throws EventError.
EventDef define_event(const Model& model, const std::vector<EventDef>& existing, std::string name,
                      Region region, std::optional<std::string> parent = std::nullopt);

bool is_subevent(const EventDef& a, const EventDef& b);

const EventDef* find_event(const std::vector<EventDef>& events, const std::string& name);

// Region of `name` together with every event nested beneath it.
Region effective_region(const std::vector<EventDef>& events, const std::string& name);

std::set<StageRef> shared_stages(const EventDef& a, const EventDef& b);

// Heuristic decomposition of the script into candidate event regions.
//
// The solid-flow graph is cut at boundary stages: stages with flow in-degree or
// out-degree other than one, endpoints of trigger arcs, and stages entered from
// another sphere. Each maximal flow path between boundaries is one candidate.
// A trigger joins the candidate that starts at its target (or else the first
// that ends there), pulling its source stage in with it; triggers whose target
// lies on no flow path get a candidate of their own. Every arc lands in exactly
// one candidate. Output is sorted by smallest contained stage path.
std::vector<Region> eventize(const Model& model);

std::string candidate_name(std::size_t index);  // E#1, E#2, ...

}  // namespace fm
