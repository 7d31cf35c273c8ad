#include "fm/events.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>

namespace fm {
namespace {

Diagnostic region_diag(std::string code, std::string message, std::string element = {}) {
  return Diagnostic{std::move(code), Severity::Error, std::move(message), std::nullopt,
                    std::move(element)};
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

bool Region::subset_of(const Region& other) const {
  return std::includes(other.stages.begin(), other.stages.end(), stages.begin(), stages.end()) &&
         std::includes(other.flows.begin(), other.flows.end(), flows.begin(), flows.end()) &&
         std::includes(other.triggers.begin(), other.triggers.end(), triggers.begin(),
                       triggers.end());
}

Region& Region::merge(const Region& other) {
  stages.insert(other.stages.begin(), other.stages.end());
  flows.insert(other.flows.begin(), other.flows.end());
  triggers.insert(other.triggers.begin(), other.triggers.end());
  return *this;
}

EventError::EventError(Diagnostic diagnostic)
    : std::runtime_error(diagnostic.code + " " + diagnostic.message),
      diagnostic_(std::move(diagnostic)) {}

std::optional<Diagnostic> region_wellformed(const Model& model, const Region& region) {
  if (region.stages.empty()) return region_diag("V009", "event region has no stages");

  for (const auto& s : region.stages) {
    if (!model.has_stage(s)) return region_diag("V001", "unknown stage '" + s.path() + "'", s.path());
  }
  auto check_arcs = [&](const std::set<ArcRef>& arcs, bool trigger) -> std::optional<Diagnostic> {
    const char* arrow = trigger ? " ~> " : " -> ";
    for (const auto& a : arcs) {
      std::string text = a.from.path() + arrow + a.to.path();
      bool exists = trigger ? model.find_trigger(a.from, a.to) != nullptr
                            : model.find_flow(a.from, a.to) != nullptr;
      if (!exists) return region_diag("V001", "no such arc " + text, text);
      if (!region.stages.contains(a.from) || !region.stages.contains(a.to)) {
        return region_diag("V001", "arc " + text + " has an endpoint outside the region", text);
      }
    }
    return std::nullopt;
  };
  if (auto d = check_arcs(region.flows, false)) return d;
  if (auto d = check_arcs(region.triggers, true)) return d;

  std::vector<StageRef> nodes(region.stages.begin(), region.stages.end());
  auto index_of = [&](const StageRef& s) {
    return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), s) - nodes.begin());
  };
  DisjointSets sets(nodes.size());
  for (const auto* arcs : {&region.flows, &region.triggers}) {
    for (const auto& a : *arcs) sets.unite(index_of(a.from), index_of(a.to));
  }
  const auto root = sets.find(0);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (sets.find(i) != root) {
      return region_diag("V008",
                         "event region is not connected: '" + nodes[i].path() +
                             "' is unreachable from '" + nodes[0].path() + "'",
                         nodes[i].path());
    }
  }
  return std::nullopt;
}

const EventDef* find_event(const std::vector<EventDef>& events, const std::string& name) {
  auto it = std::find_if(events.begin(), events.end(),
                         [&](const EventDef& e) { return e.name == name; });
  return it == events.end() ? nullptr : &*it;
}

EventDef define_event(const Model& model, const std::vector<EventDef>& existing, std::string name,
                      Region region, std::optional<std::string> parent) {
  if (!is_valid_identifier(name)) throw std::invalid_argument("invalid event name '" + name + "'");
  if (find_event(existing, name) != nullptr) {
    throw std::invalid_argument("duplicate event '" + name + "'");
  }
  if (auto d = region_wellformed(model, region)) {
    d->element = name;
    throw EventError(*d);
  }
  if (parent) {
    const auto* p = find_event(existing, *parent);
    if (p == nullptr) throw EventError(region_diag("V001", "unknown parent event '" + *parent + "'", name));
    if (!region.subset_of(p->region)) {
      throw EventError(
          region_diag("V011", "sub-event region is not contained in '" + *parent + "'", name));
    }
  }
  return EventDef{std::move(name), std::move(region), std::move(parent), std::nullopt};
}

bool is_subevent(const EventDef& a, const EventDef& b) { return a.region.subset_of(b.region); }

Region effective_region(const std::vector<EventDef>& events, const std::string& name) {
  Region out;
  for (const auto& e : events) {
    // Walk up the parent chain; bounded by the number of events to survive cycles.
    const EventDef* cur = &e;
    for (std::size_t depth = 0; cur != nullptr && depth <= events.size(); ++depth) {
      if (cur->name == name) {
        out.merge(e.region);
        break;
      }
      cur = cur->parent ? find_event(events, *cur->parent) : nullptr;
    }
  }
  return out;
}

std::set<StageRef> shared_stages(const EventDef& a, const EventDef& b) {
  std::set<StageRef> out;
  std::set_intersection(a.region.stages.begin(), a.region.stages.end(), b.region.stages.begin(),
                        b.region.stages.end(), std::inserter(out, out.begin()));
  return out;
}

std::vector<Region> eventize(const Model& model) {
  std::vector<ArcRef> flows;
  for (const auto& f : model.flows()) flows.push_back({f.from, f.to});
  std::sort(flows.begin(), flows.end());
  std::vector<TriggerArc> triggers = model.triggers();
  std::sort(triggers.begin(), triggers.end());

  std::map<StageRef, int> in_degree;
  std::map<StageRef, std::vector<std::size_t>> outgoing;
  std::set<StageRef> boundary;
  auto sphere_of = [&](const StageRef& s) -> std::string {
    const auto* m = model.find_machine(s.machine);
    return m == nullptr ? std::string() : m->sphere;
  };
  for (std::size_t i = 0; i < flows.size(); ++i) {
    ++in_degree[flows[i].to];
    outgoing[flows[i].from].push_back(i);
    if (sphere_of(flows[i].from) != sphere_of(flows[i].to)) boundary.insert(flows[i].to);
  }
  for (const auto& t : triggers) {
    boundary.insert(t.from);
    boundary.insert(t.to);
  }
  auto is_boundary = [&](const StageRef& s) {
    if (boundary.contains(s)) return true;
    auto in = in_degree.find(s);
    auto out = outgoing.find(s);
    return in == in_degree.end() || in->second != 1 || out == outgoing.end() || out->second.size() != 1;
  };

  std::vector<bool> used(flows.size(), false);
  std::vector<std::vector<std::size_t>> segments;
  auto walk = [&](std::size_t first) {
    std::vector<std::size_t> seg{first};
    used[first] = true;
    StageRef cur = flows[first].to;
    while (!is_boundary(cur)) {
      std::size_t next = outgoing[cur].front();
      if (used[next]) break;
      used[next] = true;
      seg.push_back(next);
      cur = flows[next].to;
    }
    segments.push_back(std::move(seg));
  };
  for (std::size_t i = 0; i < flows.size(); ++i) {
    if (!used[i] && is_boundary(flows[i].from)) walk(i);
  }
  // Whatever remains lies on boundary-free cycles.
  for (std::size_t i = 0; i < flows.size(); ++i) {
    if (!used[i]) walk(i);
  }

  std::vector<Region> candidates;
  for (const auto& seg : segments) {
    Region r;
    for (auto idx : seg) {
      r.flows.insert(flows[idx]);
      r.stages.insert(flows[idx].from);
      r.stages.insert(flows[idx].to);
    }
    candidates.push_back(std::move(r));
  }

  for (const auto& t : triggers) {
    Region* home = nullptr;
    for (std::size_t i = 0; i < segments.size() && home == nullptr; ++i) {
      if (flows[segments[i].front()].from == t.to) home = &candidates[i];
    }
    for (std::size_t i = 0; i < segments.size() && home == nullptr; ++i) {
      if (flows[segments[i].back()].to == t.to) home = &candidates[i];
    }
    if (home == nullptr) {
      candidates.emplace_back();
      home = &candidates.back();
    }
    home->stages.insert(t.from);
    home->stages.insert(t.to);
    home->triggers.insert({t.from, t.to});
  }

  std::sort(candidates.begin(), candidates.end(), [](const Region& a, const Region& b) {
    return std::tie(*a.stages.begin(), a.stages, a.flows, a.triggers) <
           std::tie(*b.stages.begin(), b.stages, b.flows, b.triggers);
  });
  return candidates;
}

std::string candidate_name(std::size_t index) { return "E#" + std::to_string(index + 1); }

}  // namespace fm
