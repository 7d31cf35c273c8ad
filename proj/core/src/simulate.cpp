#include "fm/simulate.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <set>

namespace fm {
namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Index-based view of the model used by the hot loop.
struct CompiledModel {
  struct Flow {
    std::size_t from;
    std::size_t to;
  };
  struct Trigger {
    std::size_t from;
    std::size_t to;
    std::optional<std::string> guard;
  };

  std::vector<StageRef> stages;  // sorted by path
  std::vector<std::string> paths;
  std::vector<std::string> storage_paths;
  std::vector<std::string> labels;
  std::vector<bool> has_storage;
  std::vector<bool> gated;  // release/process stages that some trigger targets
  std::vector<Tick> delay;
  std::vector<std::size_t> location_rank;  // [stage * 2 + in_storage]
  std::vector<Flow> flows;
  std::vector<std::vector<std::size_t>> out_flows;  // sorted by target path
  std::vector<Trigger> triggers;                    // canonical order
  std::map<StageRef, std::size_t> index;

  std::size_t stage(const StageRef& ref) const {
    auto it = index.find(ref);
    if (it == index.end()) throw SimulationError("unknown stage '" + ref.path() + "'");
    return it->second;
  }
};

CompiledModel compile(const Model& model, const Scenario& scenario) {
  CompiledModel c;
  c.stages = model.stages();
  for (std::size_t i = 0; i < c.stages.size(); ++i) {
    const auto& s = c.stages[i];
    const auto* m = model.find_machine(s.machine);
    c.index[s] = i;
    c.paths.push_back(s.path());
    c.storage_paths.push_back(storage_path(s));
    c.labels.push_back(m->thing_label);
    c.has_storage.push_back(m->has_storage(s.kind));
  }
  const auto n = c.stages.size();
  c.gated.assign(n, false);
  c.delay.assign(n, 0);
  for (const auto& [ref, ticks] : scenario.delays) c.delay[c.stage(ref)] = ticks;

  std::vector<std::pair<std::string, std::size_t>> locations;
  for (std::size_t i = 0; i < n; ++i) {
    locations.emplace_back(c.paths[i], i * 2);
    locations.emplace_back(c.storage_paths[i], i * 2 + 1);
  }
  std::sort(locations.begin(), locations.end());
  c.location_rank.assign(n * 2, 0);
  for (std::size_t r = 0; r < locations.size(); ++r) c.location_rank[locations[r].second] = r;

  c.out_flows.resize(n);
  for (const auto& f : model.flows()) {
    c.out_flows[c.stage(f.from)].push_back(c.flows.size());
    c.flows.push_back({c.stage(f.from), c.stage(f.to)});
  }
  for (auto& outs : c.out_flows) {
    std::sort(outs.begin(), outs.end(), [&](std::size_t a, std::size_t b) {
      return c.paths[c.flows[a].to] < c.paths[c.flows[b].to];
    });
  }
  std::vector<TriggerArc> triggers = model.triggers();
  std::sort(triggers.begin(), triggers.end());
  for (const auto& t : triggers) {
    auto to = c.stage(t.to);
    c.triggers.push_back({c.stage(t.from), to, t.guard});
    if (t.to.kind != StageKind::Create) c.gated[to] = true;
  }
  return c;
}

// Region membership as index bitmaps.
struct RegionMask {
  std::vector<bool> stage;
  std::vector<bool> flow;
  std::vector<bool> trigger;
};

RegionMask compile_region(const CompiledModel& c, const Model& model, const Region& region) {
  RegionMask mask{std::vector<bool>(c.stages.size()), std::vector<bool>(c.flows.size()),
                  std::vector<bool>(c.triggers.size())};
  for (const auto& s : region.stages) mask.stage[c.stage(s)] = true;
  for (std::size_t i = 0; i < model.flows().size(); ++i) {
    const auto& f = model.flows()[i];
    if (region.flows.contains({f.from, f.to})) mask.flow[i] = true;
  }
  for (std::size_t i = 0; i < c.triggers.size(); ++i) {
    const auto& t = c.triggers[i];
    if (region.triggers.contains({c.stages[t.from], c.stages[t.to]})) mask.trigger[i] = true;
  }
  return mask;
}

struct Token {
  TokenId id = 0;
  std::size_t stage = 0;
  bool in_storage = false;
  Tick created = 0;
  Tick ready = 0;
  std::vector<std::size_t> spent;  // triggers already evaluated during this visit

  bool has_spent(std::size_t trigger) const {
    return std::find(spent.begin(), spent.end(), trigger) != spent.end();
  }
};

// Runtime state of one control node.
struct NodeState {
  const ControlNode* node = nullptr;
  enum class Status { Idle, Active, Done } status = Status::Idle;
  std::size_t cursor = 0;
  std::vector<NodeState> kids;
  // RepeatIf: probing its event (acts as a leaf) or running its body.
  bool in_body = false;
  bool executed = false;
  const RegionMask* region = nullptr;  // Run and RepeatIf
};

class Engine {
 public:
  Engine(const Model& model, const std::vector<EventDef>& events, const ControlProgram* program,
         const Scenario& scenario, const std::vector<Constraint>& constraints,
         const SimulationOptions& options)
      : model_(model),
        scenario_(scenario),
        options_(options),
        c_(compile(model, scenario)),
        controlled_(program != nullptr) {
    if (scenario.tick_limit < 1) throw SimulationError("tick limit must be positive");
    for (const auto& seed : scenario.seeds) {
      if (seed.stage.kind != StageKind::Create) {
        throw SimulationError("seed stage '" + seed.stage.path() + "' is not a create stage");
      }
      seeds_.push_back({c_.stage(seed.stage), seed.tick});
    }
    for (const auto& con : constraints) {
      if (const auto* inhibit = std::get_if<Inhibit>(&con)) {
        inhibits_.push_back({c_.stage(inhibit->target), inhibit->guard});
      }
    }
    for (const auto& [guard, values] : scenario.guard_schedule) cursors_[guard] = 0;
    if (program != nullptr) {
      for (const auto& name : referenced_events(program->root)) {
        if (find_event(events, name) == nullptr) {
          throw SimulationError("control program references undefined event '" + name + "'");
        }
        regions_.emplace(name, std::make_unique<RegionMask>(
                                   compile_region(c_, model, effective_region(events, name))));
      }
      root_ = build(program->root);
    }
    flow_enabled_.assign(c_.flows.size(), !controlled_);
    trigger_enabled_.assign(c_.triggers.size(), !controlled_);
    stage_enabled_.assign(c_.stages.size(), !controlled_);
  }

  Trace run() {
    std::vector<TraceRecord> marks;
    if (controlled_) activate(root_, marks);

    for (tick_ = 0; tick_ < scenario_.tick_limit; ++tick_) {
      tick_begin_ = trace_.records.size();
      for (auto& m : marks) emit_mark(std::move(m), tick_);
      marks.clear();
      insert_at_ = trace_.records.size();
      if (controlled_) refresh_enabled();

      touched_flows_.clear();
      touched_triggers_.clear();
      touched_storage_.clear();

      inhibit_phase();
      seed_phase();
      verify("seeding");
      hop_phase();
      verify("hop");
      trigger_phase();
      verify("trigger");

      const bool activity = trace_.records.size() > insert_at_;

      if (controlled_) {
        note_probe_activity(root_);
        advance(root_, marks);
        if (root_.status == NodeState::Status::Done) {
          for (auto& m : marks) emit_mark(std::move(m), tick_ + 1);
          return finish(tick_ + 1, StopReason::Completed);
        }
      } else if (!activity && !pending()) {
        return finish(tick_ + 1, StopReason::Quiescent);
      }
    }
    return finish(scenario_.tick_limit, StopReason::TickLimit);
  }

 private:
  // An event runs while any instance of it is open; nested instances of the
  // same event (par(E, E)) share one start and one end mark.
  void emit_mark(TraceRecord mark, Tick tick) {
    auto& open = open_instances_[mark.subjects.front()];
    if (mark.kind == RecordKind::EventStart) {
      if (open++ > 0) return;
    } else if (--open > 0) {
      return;
    }
    mark.tick = tick;
    trace_.records.push_back(std::move(mark));
  }

  Trace finish(Tick end, StopReason reason) {
    trace_.end_tick = end;
    trace_.reason = reason;
    return std::move(trace_);
  }

  void record(RecordKind kind, std::optional<TokenId> token, std::vector<std::string> subjects) {
    trace_.records.push_back(TraceRecord{tick_, kind, token, std::move(subjects)});
  }

  bool read_guard(const std::string& guard) {
    auto sched = scenario_.guard_schedule.find(guard);
    if (sched == scenario_.guard_schedule.end()) return false;
    auto& cursor = cursors_[guard];
    if (cursor >= sched->second.size()) return false;
    return sched->second[cursor++];
  }

  void create_token(std::size_t stage) {
    Token t;
    t.id = next_id_++;
    t.stage = stage;
    t.created = tick_;
    t.ready = tick_ + 1 + c_.delay[stage];
    record(RecordKind::TokenCreated, t.id, {c_.paths[stage]});
    tokens_.push_back(std::move(t));
  }

  void inhibit_phase() {
    blocked_.assign(c_.stages.size(), false);
    for (const auto& [stage, guard] : inhibits_) {
      if (read_guard(guard)) {
        blocked_[stage] = true;
        record(RecordKind::Inhibited, std::nullopt, {c_.paths[stage], guard});
      }
    }
  }

  void seed_phase() {
    for (const auto& [stage, tick] : seeds_) {
      if (tick == tick_) create_token(stage);
    }
  }

  bool flow_open(std::size_t f) const {
    const auto to = c_.flows[f].to;
    if (!flow_enabled_[f] || blocked_[to]) return false;
    return !c_.gated[to] || permit(to) > 0;
  }

  std::size_t permit(std::size_t stage) const {
    auto it = permits_.find(stage);
    return it == permits_.end() ? 0 : it->second;
  }

  void hop_phase() {
    std::vector<std::size_t> order(tokens_.size());
    std::iota(order.begin(), order.end(), 0);
    auto rank = [&](const Token& t) { return c_.location_rank[t.stage * 2 + (t.in_storage ? 1 : 0)]; };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto ra = rank(tokens_[a]);
      const auto rb = rank(tokens_[b]);
      return ra != rb ? ra < rb : tokens_[a].id < tokens_[b].id;
    });

    for (auto i : order) {
      auto& tok = tokens_[i];
      if (tok.created == tick_ || tok.ready > tick_) continue;
      const auto from = tok.stage;
      const auto& from_path = tok.in_storage ? c_.storage_paths[from] : c_.paths[from];

      std::size_t chosen = kNone;
      for (auto f : c_.out_flows[from]) {
        if (flow_open(f)) {
          chosen = f;
          break;
        }
      }
      if (chosen != kNone) {
        const auto to = c_.flows[chosen].to;
        if (c_.gated[to]) --permits_[to];
        record(RecordKind::Hop, tok.id, {from_path, c_.paths[to]});
        tok.stage = to;
        tok.in_storage = false;
        tok.ready = tick_ + 1 + c_.delay[to];
        tok.spent.clear();
        touched_flows_.push_back(chosen);
      } else if (!tok.in_storage && c_.has_storage[from] && stage_enabled_[from]) {
        record(RecordKind::Hop, tok.id, {from_path, c_.storage_paths[from]});
        tok.in_storage = true;
        tok.ready = tick_ + 1;
        tok.spent.clear();
        touched_storage_.push_back(from);
      }
    }
  }

  void trigger_phase() {
    const auto residents = tokens_.size();
    for (std::size_t tr = 0; tr < c_.triggers.size(); ++tr) {
      if (!trigger_enabled_[tr]) continue;
      const auto& trig = c_.triggers[tr];
      for (std::size_t i = 0; i < residents; ++i) {
        auto& tok = tokens_[i];
        if (tok.in_storage || tok.stage != trig.from || tok.has_spent(tr)) continue;
        tok.spent.push_back(tr);
        if (trig.guard && !read_guard(*trig.guard)) continue;
        const TokenId firer = tok.id;
        record(RecordKind::TriggerFired, firer, {c_.paths[trig.from], c_.paths[trig.to]});
        touched_triggers_.push_back(tr);
        if (c_.stages[trig.to].kind == StageKind::Create) {
          create_token(trig.to);  // may reallocate tokens_; `tok` is not used past here
        } else {
          ++permits_[trig.to];
        }
      }
    }
  }

  bool pending() const {
    for (const auto& [stage, tick] : seeds_) {
      if (tick > tick_) return true;
    }
    return std::any_of(tokens_.begin(), tokens_.end(),
                       [&](const Token& t) { return t.ready > tick_ + 1; });
  }

  void verify(const char* phase) const {
    if (!options_.check_invariants) return;
    std::set<TokenId> ids;
    for (const auto& t : tokens_) {
      if (!ids.insert(t.id).second) {
        throw SimulationError(std::string("duplicate token id after ") + phase);
      }
      if (t.stage >= c_.stages.size() || (t.in_storage && !c_.has_storage[t.stage])) {
        throw SimulationError(std::string("token in impossible location after ") + phase);
      }
    }
    if (tokens_.size() != trace_.count(RecordKind::TokenCreated)) {
      throw SimulationError(std::string("token count diverged from creations after ") + phase);
    }
  }

  // --- control program -------------------------------------------------

  NodeState build(const ControlNode& node) {
    NodeState s;
    s.node = &node;
    if (node.kind == ControlNode::Kind::Run || node.kind == ControlNode::Kind::RepeatIf) {
      s.region = regions_.at(node.event).get();
    }
    for (const auto& child : node.children) s.kids.push_back(build(child));
    return s;
  }

  void activate(NodeState& s, std::vector<TraceRecord>& marks) {
    s.status = NodeState::Status::Active;
    s.cursor = 0;
    s.in_body = false;
    s.executed = false;
    for (auto& k : s.kids) k.status = NodeState::Status::Idle;
    switch (s.node->kind) {
      case ControlNode::Kind::Run:
        marks.push_back(TraceRecord{0, RecordKind::EventStart, std::nullopt, {s.node->event}});
        break;
      case ControlNode::Kind::Seq: activate(s.kids.front(), marks); break;
      case ControlNode::Kind::Par:
        for (auto& k : s.kids) activate(k, marks);
        break;
      case ControlNode::Kind::RepeatIf: break;
    }
  }

  template <typename F>
  void for_active_leaves(NodeState& s, F&& fn) {
    if (s.status != NodeState::Status::Active) return;
    switch (s.node->kind) {
      case ControlNode::Kind::Run: fn(s); break;
      case ControlNode::Kind::Seq: for_active_leaves(s.kids[s.cursor], fn); break;
      case ControlNode::Kind::Par:
        for (auto& k : s.kids) for_active_leaves(k, fn);
        break;
      case ControlNode::Kind::RepeatIf:
        if (s.in_body) {
          for_active_leaves(s.kids.front(), fn);
        } else {
          fn(s);
        }
        break;
    }
  }

  void refresh_enabled() {
    std::fill(flow_enabled_.begin(), flow_enabled_.end(), false);
    std::fill(trigger_enabled_.begin(), trigger_enabled_.end(), false);
    std::fill(stage_enabled_.begin(), stage_enabled_.end(), false);
    for_active_leaves(root_, [&](NodeState& leaf) {
      const auto& r = *leaf.region;
      for (std::size_t i = 0; i < r.flow.size(); ++i) flow_enabled_[i] = flow_enabled_[i] || r.flow[i];
      for (std::size_t i = 0; i < r.trigger.size(); ++i) {
        trigger_enabled_[i] = trigger_enabled_[i] || r.trigger[i];
      }
      for (std::size_t i = 0; i < r.stage.size(); ++i) {
        stage_enabled_[i] = stage_enabled_[i] || r.stage[i];
      }
    });
  }

  bool touched(const RegionMask& r) const {
    return std::any_of(touched_flows_.begin(), touched_flows_.end(),
                       [&](std::size_t f) { return r.flow[f]; }) ||
           std::any_of(touched_triggers_.begin(), touched_triggers_.end(),
                       [&](std::size_t t) { return r.trigger[t]; }) ||
           std::any_of(touched_storage_.begin(), touched_storage_.end(),
                       [&](std::size_t s) { return r.stage[s]; });
  }

  // A repeat_if probe announces its event only once something happens inside it.
  void note_probe_activity(NodeState& root) {
    for_active_leaves(root, [&](NodeState& leaf) {
      if (leaf.node->kind != ControlNode::Kind::RepeatIf || leaf.executed) return;
      if (!touched(*leaf.region)) return;
      leaf.executed = true;
      if (open_instances_[leaf.node->event]++ > 0) return;
      trace_.records.insert(
          trace_.records.begin() + static_cast<std::ptrdiff_t>(insert_at_),
          TraceRecord{tick_, RecordKind::EventStart, std::nullopt, {leaf.node->event}});
      ++insert_at_;
    });
  }

  bool quiescent(const RegionMask& r) const {
    for (const auto& tok : tokens_) {
      if (!r.stage[tok.stage]) continue;
      bool can_move = false;
      for (auto f : c_.out_flows[tok.stage]) {
        const auto to = c_.flows[f].to;
        if (r.flow[f] && (!c_.gated[to] || permit(to) > 0)) {
          can_move = true;
          break;
        }
      }
      if (can_move) return false;
      if (tok.in_storage) continue;
      if (c_.has_storage[tok.stage]) return false;
      for (std::size_t tr = 0; tr < c_.triggers.size(); ++tr) {
        if (r.trigger[tr] && c_.triggers[tr].from == tok.stage && !tok.has_spent(tr)) return false;
      }
    }
    return std::none_of(seeds_.begin(), seeds_.end(), [&](const auto& seed) {
      return seed.second > tick_ && r.stage[seed.first];
    });
  }

  void advance(NodeState& s, std::vector<TraceRecord>& marks) {
    if (s.status != NodeState::Status::Active) return;
    switch (s.node->kind) {
      case ControlNode::Kind::Run:
        if (quiescent(*s.region)) {
          marks.push_back(TraceRecord{0, RecordKind::EventEnd, std::nullopt, {s.node->event}});
          s.status = NodeState::Status::Done;
        }
        break;
      case ControlNode::Kind::Seq: {
        auto& cur = s.kids[s.cursor];
        advance(cur, marks);
        if (cur.status == NodeState::Status::Done) {
          if (++s.cursor == s.kids.size()) {
            s.status = NodeState::Status::Done;
          } else {
            activate(s.kids[s.cursor], marks);
          }
        }
        break;
      }
      case ControlNode::Kind::Par: {
        bool all_done = true;
        for (auto& k : s.kids) {
          advance(k, marks);
          all_done = all_done && k.status == NodeState::Status::Done;
        }
        if (all_done) s.status = NodeState::Status::Done;
        break;
      }
      case ControlNode::Kind::RepeatIf:
        if (!s.in_body) {
          if (!quiescent(*s.region)) break;
          if (s.executed) {
            marks.push_back(TraceRecord{0, RecordKind::EventEnd, std::nullopt, {s.node->event}});
            s.in_body = true;
            activate(s.kids.front(), marks);
          } else {
            s.status = NodeState::Status::Done;
          }
        } else {
          advance(s.kids.front(), marks);
          if (s.kids.front().status == NodeState::Status::Done) {
            s.in_body = false;
            s.executed = false;
          }
        }
        break;
    }
  }

  const Model& model_;
  const Scenario& scenario_;
  SimulationOptions options_;
  CompiledModel c_;
  bool controlled_;

  std::vector<std::pair<std::size_t, Tick>> seeds_;
  std::vector<std::pair<std::size_t, std::string>> inhibits_;
  std::map<std::string, std::size_t> cursors_;
  std::map<std::string, std::unique_ptr<RegionMask>> regions_;
  std::map<std::string, int> open_instances_;
  NodeState root_;

  std::vector<Token> tokens_;
  std::map<std::size_t, std::size_t> permits_;
  std::vector<bool> blocked_;
  std::vector<bool> flow_enabled_;
  std::vector<bool> trigger_enabled_;
  std::vector<bool> stage_enabled_;
  std::vector<std::size_t> touched_flows_;
  std::vector<std::size_t> touched_triggers_;
  std::vector<std::size_t> touched_storage_;

  TokenId next_id_ = 1;
  Tick tick_ = 0;
  std::size_t tick_begin_ = 0;
  std::size_t insert_at_ = 0;
  Trace trace_;
};

}  // namespace

Trace simulate(const Model& model, const std::vector<EventDef>& events,
               const ControlProgram* program, const Scenario& scenario,
               const std::vector<Constraint>& constraints, const SimulationOptions& options) {
  Engine engine(model, events, program, scenario, constraints, options);
  return engine.run();
}

namespace {

std::vector<std::size_t> find_marks(const Trace& trace, RecordKind kind, const std::string& event) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    if (r.kind == kind && !r.subjects.empty() && r.subjects.front() == event) out.push_back(i);
  }
  return out;
}

ConstraintVerdict check_deadline(const Trace& trace, const Deadline& d) {
  ConstraintVerdict v{d, Verdict::Fail, {}, false, std::nullopt};
  auto starts = find_marks(trace, RecordKind::EventStart, d.first);
  if (starts.empty()) {
    v.missing = true;
    return v;
  }
  const auto start = starts.front();
  auto ends = find_marks(trace, RecordKind::EventEnd, d.last);
  auto end = std::find_if(ends.begin(), ends.end(), [&](std::size_t i) {
    return trace.records[i].tick >= trace.records[start].tick;
  });
  if (end == ends.end()) {
    v.missing = true;
    return v;
  }
  v.measured = trace.records[*end].tick - trace.records[start].tick;
  if (*v.measured < d.bound) {
    v.verdict = Verdict::Pass;
    v.witnesses = {start, *end};
  } else {
    v.witnesses = {*end};
  }
  return v;
}

ConstraintVerdict check_inhibit(const Trace& trace, const Inhibit& inhibit) {
  ConstraintVerdict v{inhibit, Verdict::Pass, {}, false, std::nullopt};
  const auto target = inhibit.target.path();
  std::set<Tick> windows;
  for (const auto& r : trace.records) {
    if (r.kind == RecordKind::Inhibited && r.subjects.size() == 2 && r.subjects[0] == target &&
        r.subjects[1] == inhibit.guard) {
      windows.insert(r.tick);
    }
  }
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    if (r.kind == RecordKind::Hop && r.subjects.size() == 2 && r.subjects[1] == target &&
        windows.contains(r.tick)) {
      v.witnesses.push_back(i);
    }
  }
  if (!v.witnesses.empty()) v.verdict = Verdict::Fail;
  return v;
}

}  // namespace

std::vector<ConstraintVerdict> check_constraints(const Trace& trace,
                                                 const std::vector<Constraint>& constraints,
                                                 const std::vector<EventDef>* events) {
  std::vector<ConstraintVerdict> out;
  for (const auto& con : constraints) {
    if (const auto* d = std::get_if<Deadline>(&con)) {
      if (events != nullptr) {
        for (const auto* name : {&d->first, &d->last}) {
          if (find_event(*events, *name) == nullptr) {
            throw UnknownEventName("unknown event '" + *name + "' in deadline");
          }
        }
      }
      out.push_back(check_deadline(trace, *d));
    } else {
      out.push_back(check_inhibit(trace, std::get<Inhibit>(con)));
    }
  }
  return out;
}

std::vector<WindowVerdict> check_windows(const Trace& trace, const std::vector<EventDef>& events) {
  std::vector<WindowVerdict> out;
  for (const auto& e : events) {
    if (!e.window) continue;
    WindowVerdict v{e.name, Verdict::Pass, {}};
    for (auto i : find_marks(trace, RecordKind::EventStart, e.name)) {
      if (trace.records[i].tick < e.window->earliest) v.witnesses.push_back(i);
    }
    for (auto i : find_marks(trace, RecordKind::EventEnd, e.name)) {
      if (trace.records[i].tick > e.window->latest) v.witnesses.push_back(i);
    }
    if (!v.witnesses.empty()) v.verdict = Verdict::Fail;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace fm
