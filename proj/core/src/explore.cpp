#include "fm/explore.hpp"

#include <algorithm>
#include <deque>
#include <optional>

namespace fm {
namespace {

std::string location_of(const ExploreToken& t) {
  return t.stored ? storage_path(t.at) : t.at.path();
}

Tick delay_at(const Scenario& scenario, const StageRef& stage) {
  auto it = scenario.delays.find(stage);
  return it == scenario.delays.end() ? 0 : it->second;
}

bool is_gated(const Model& model, const StageRef& stage) {
  if (stage.kind == StageKind::Create) return false;
  return std::any_of(model.triggers().begin(), model.triggers().end(),
                     [&](const TriggerArc& t) { return t.to == stage; });
}

struct Step {
  std::vector<TraceRecord> records;
  ExploreState next;
  std::optional<StopReason> stop;
};

// One tick of free-run semantics, computed directly from the model.
Step step(const Model& model, const Scenario& scenario, const ExploreState& from) {
  Step out{{}, from, std::nullopt};
  ExploreState& s = out.next;
  const Tick t = s.tick;

  auto emit = [&](RecordKind kind, std::optional<TokenId> token, std::vector<std::string> subjects) {
    out.records.push_back(TraceRecord{t, kind, token, std::move(subjects)});
  };
  auto spawn = [&](const StageRef& at) {
    ExploreToken tok;
    tok.id = s.next_id++;
    tok.at = at;
    tok.born = t;
    tok.ready = t + 1 + delay_at(scenario, at);
    emit(RecordKind::TokenCreated, tok.id, {at.path()});
    s.tokens.push_back(std::move(tok));
  };

  for (const auto& seed : scenario.seeds) {
    if (seed.tick == t) spawn(seed.stage);
  }

  // Hops, visiting tokens by (location, id).
  std::vector<TokenId> order;
  for (const auto& tok : s.tokens) order.push_back(tok.id);
  auto by_id = [&](TokenId id) -> ExploreToken& {
    return *std::find_if(s.tokens.begin(), s.tokens.end(), [&](const ExploreToken& x) { return x.id == id; });
  };
  std::sort(order.begin(), order.end(), [&](TokenId a, TokenId b) {
    auto la = location_of(by_id(a));
    auto lb = location_of(by_id(b));
    return la != lb ? la < lb : a < b;
  });
  for (auto id : order) {
    auto& tok = by_id(id);
    if (tok.born == t || tok.ready > t) continue;

    std::vector<StageRef> targets;
    for (const auto& f : model.flows()) {
      if (f.from == tok.at) targets.push_back(f.to);
    }
    std::sort(targets.begin(), targets.end(),
              [](const StageRef& a, const StageRef& b) { return a.path() < b.path(); });
    std::optional<StageRef> target;
    for (const auto& cand : targets) {
      if (!is_gated(model, cand) || s.permits[cand.path()] > 0) {
        target = cand;
        break;
      }
    }
    const std::string origin = location_of(tok);
    if (target) {
      if (is_gated(model, *target)) --s.permits[target->path()];
      emit(RecordKind::Hop, tok.id, {origin, target->path()});
      tok.at = *target;
      tok.stored = false;
      tok.ready = t + 1 + delay_at(scenario, *target);
      tok.checked.clear();
    } else if (!tok.stored && model.find_machine(tok.at.machine)->has_storage(tok.at.kind)) {
      emit(RecordKind::Hop, tok.id, {origin, storage_path(tok.at)});
      tok.stored = true;
      tok.ready = t + 1;
      tok.checked.clear();
    }
  }

  // Triggers in (from, to) path order; tokens born in this phase wait a tick.
  std::vector<TriggerArc> triggers = model.triggers();
  std::sort(triggers.begin(), triggers.end(), [](const TriggerArc& a, const TriggerArc& b) {
    return std::make_pair(a.from.path(), a.to.path()) < std::make_pair(b.from.path(), b.to.path());
  });
  const TokenId first_new = s.next_id;
  for (const auto& trig : triggers) {
    const ArcKey key{trig.from.path(), trig.to.path()};
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      if (s.tokens[i].id >= first_new) continue;
      if (s.tokens[i].stored || !(s.tokens[i].at == trig.from) || s.tokens[i].checked.contains(key)) {
        continue;
      }
      s.tokens[i].checked.insert(key);
      bool fires = true;
      if (trig.guard) {
        const auto& schedule = scenario.guard_schedule;
        auto it = schedule.find(*trig.guard);
        auto& cursor = s.guard_cursor[*trig.guard];
        fires = it != schedule.end() && cursor < it->second.size() && it->second[cursor];
        if (it != schedule.end() && cursor < it->second.size()) ++cursor;
      }
      if (!fires) continue;
      emit(RecordKind::TriggerFired, s.tokens[i].id, {key.first, key.second});
      if (trig.to.kind == StageKind::Create) {
        spawn(trig.to);
      } else {
        ++s.permits[key.second];
      }
    }
  }

  std::sort(s.tokens.begin(), s.tokens.end(),
            [](const ExploreToken& a, const ExploreToken& b) { return a.id < b.id; });
  s.tick = t + 1;

  const bool future_seed = std::any_of(scenario.seeds.begin(), scenario.seeds.end(),
                                       [&](const Seed& seed) { return seed.tick > t; });
  const bool dwelling = std::any_of(s.tokens.begin(), s.tokens.end(),
                                    [&](const ExploreToken& tok) { return tok.ready > t + 1; });
  if (out.records.empty() && !future_seed && !dwelling) {
    out.stop = StopReason::Quiescent;
  } else if (s.tick >= scenario.tick_limit) {
    out.stop = StopReason::TickLimit;
  }
  return out;
}

}  // namespace

std::vector<std::string> ExploreState::placement() const {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(location_of(t));
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t ExploreResult::placement_count() const {
  std::set<std::vector<std::string>> seen;
  for (const auto& s : states) seen.insert(s.placement());
  return seen.size();
}

ExploreResult brute_force_explore(const Model& model, const Scenario& scenario,
                                  std::size_t max_states) {
  for (const auto& seed : scenario.seeds) {
    if (seed.stage.kind != StageKind::Create || !model.has_stage(seed.stage)) {
      throw std::invalid_argument("seed stage '" + seed.stage.path() + "' is not a create stage");
    }
  }
  if (scenario.tick_limit < 1) throw std::invalid_argument("tick limit must be positive");

  ExploreResult result;
  std::set<ExploreState> visited;
  std::deque<ExploreState> frontier{ExploreState{}};
  while (!frontier.empty()) {
    ExploreState current = std::move(frontier.front());
    frontier.pop_front();
    Step next = step(model, scenario, current);
    for (auto& r : next.records) result.trace.records.push_back(std::move(r));
    if (!visited.insert(next.next).second) continue;
    result.states.push_back(next.next);
    if (result.states.size() > max_states) {
      throw StateCapExceeded("explored more than " + std::to_string(max_states) + " states");
    }
    if (next.stop) {
      result.trace.end_tick = next.next.tick;
      result.trace.reason = *next.stop;
      continue;
    }
    frontier.push_back(std::move(next.next));
  }
  return result;
}

}  // namespace fm
