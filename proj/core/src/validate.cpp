#include "fm/validate.hpp"

#include <algorithm>
#include <map>

namespace fm {
namespace {

Diagnostic diag(std::string_view code, std::string message, std::string element,
                Severity severity = Severity::Error) {
  return Diagnostic{std::string(code), severity, std::move(message), std::nullopt,
                    std::move(element)};
}

std::string arc_text(const StageRef& from, const StageRef& to, bool trigger) {
  return from.path() + (trigger ? " ~> " : " -> ") + to.path();
}

class Checker {
 public:
  Checker(const Model& model, const std::vector<EventDef>& events,
          const std::vector<ControlProgram>& controls, const std::vector<Constraint>& constraints)
      : model_(model), events_(events), controls_(controls), constraints_(constraints) {}

  std::vector<Diagnostic> run() {
    machines();
    flows();
    triggers();
    guards();
    event_regions();
    references();
    programs();
    unreachable();
    std::stable_sort(out_.begin(), out_.end(),
                     [](const Diagnostic& a, const Diagnostic& b) { return rank(a) < rank(b); });
    return std::move(out_);
  }

 private:
  static std::pair<int, std::string_view> rank(const Diagnostic& d) {
    return {d.severity == Severity::Error ? 0 : 1, d.code};
  }

  void machines() {
    for (const auto& m : model_.machines()) {
      std::set<StageKind> seen;
      for (auto k : m.stages) {
        if (!seen.insert(k).second) {
          out_.push_back(diag("V003", "machine '" + m.path() + "' declares stage '" +
                                          std::string(keyword(k)) + "' more than once",
                              m.path()));
        }
      }
      if (seen.contains(StageKind::Receive) &&
          (seen.contains(StageKind::Arrive) || seen.contains(StageKind::Accept))) {
        out_.push_back(diag("V004", "machine '" + m.path() + "' mixes receive with arrive/accept",
                            m.path()));
      }
    }
  }

  void flows() {
    for (const auto& f : model_.flows()) {
      const auto text = arc_text(f.from, f.to, false);
      if (!model_.has_stage(f.from) || !model_.has_stage(f.to)) {
        out_.push_back(diag("V001", "flow " + text + " references an unknown stage", text));
        continue;
      }
      const bool same = f.from.machine == f.to.machine;
      if (f.to.kind == StageKind::Create) {
        out_.push_back(diag("V005", "flow " + text + " enters a create stage", text));
      } else if (!same && f.from.kind != StageKind::Transfer) {
        out_.push_back(diag("V007", "cross-machine flow " + text + " does not leave from transfer", text));
      } else if (!is_legal_flow(f.from.kind, f.to.kind, same)) {
        out_.push_back(diag("V002", "flow " + text + " is not in the adjacency table", text));
      }
    }
  }

  void triggers() {
    for (const auto& t : model_.triggers()) {
      const auto text = arc_text(t.from, t.to, true);
      if (!model_.has_stage(t.from) || !model_.has_stage(t.to)) {
        out_.push_back(diag("V001", "trigger " + text + " references an unknown stage", text));
        continue;
      }
      if (!is_trigger_target(t.to.kind)) {
        out_.push_back(diag("V006", "trigger " + text + " targets a " + std::string(keyword(t.to.kind)) +
                                        " stage",
                            text));
      }
    }
  }

  void guards() {
    for (const auto& t : model_.triggers()) {
      if (t.guard && !model_.guards().contains(*t.guard)) {
        const auto text = arc_text(t.from, t.to, true);
        out_.push_back(diag("V010", "guard '" + *t.guard + "' is not declared", text));
      }
    }
    for (const auto& c : constraints_) {
      if (const auto* in = std::get_if<Inhibit>(&c); in && !model_.guards().contains(in->guard)) {
        out_.push_back(diag("V010", "guard '" + in->guard + "' is not declared", describe(c)));
      }
    }
  }

  void event_regions() {
    for (const auto& e : events_) {
      if (auto d = region_wellformed(model_, e.region)) {
        d->element = e.name;
        d->message = "event '" + e.name + "': " + d->message;
        out_.push_back(std::move(*d));
      }
      if (!e.parent) continue;
      const auto* parent = find_event(events_, *e.parent);
      if (parent == nullptr) {
        out_.push_back(diag("V001", "event '" + e.name + "' is within unknown event '" + *e.parent + "'",
                            e.name));
      } else if (in_cycle(e)) {
        out_.push_back(diag("V011", "event '" + e.name + "' is nested within itself", e.name));
      } else if (!e.region.subset_of(parent->region)) {
        out_.push_back(diag("V011", "event '" + e.name + "' region is not contained in '" +
                                        *e.parent + "'",
                            e.name));
      }
    }
  }

  bool in_cycle(const EventDef& start) const {
    const EventDef* e = &start;
    for (std::size_t steps = 0; steps <= events_.size(); ++steps) {
      if (!e->parent) return false;
      e = find_event(events_, *e->parent);
      if (e == nullptr) return false;
      if (e->name == start.name) return true;
    }
    return false;
  }

  void references() {
    for (const auto& c : constraints_) {
      if (const auto* d = std::get_if<Deadline>(&c)) {
        for (const auto* name : {&d->first, &d->last}) {
          if (find_event(events_, *name) == nullptr) {
            out_.push_back(diag("V001", "constraint references unknown event '" + *name + "'",
                                describe(c)));
          }
        }
      } else if (const auto* in = std::get_if<Inhibit>(&c); !model_.has_stage(in->target)) {
        out_.push_back(diag("V001", "constraint references unknown stage '" + in->target.path() + "'",
                            describe(c)));
      }
    }
  }

  void programs() {
    for (const auto& p : controls_) {
      for (const auto& name : referenced_events(p.root)) {
        if (find_event(events_, name) == nullptr) {
          out_.push_back(diag("V012", "control '" + p.name + "' references undefined event '" + name + "'",
                              p.name));
        }
      }
    }
  }

  void unreachable() {
    std::set<StageRef> entered;
    for (const auto& f : model_.flows()) entered.insert(f.to);
    for (const auto& t : model_.triggers()) entered.insert(t.to);
    for (const auto& s : model_.stages()) {
      if (s.kind != StageKind::Create && !entered.contains(s)) {
        out_.push_back(diag("W001", "stage '" + s.path() + "' has no incoming flow or trigger", s.path(),
                            Severity::Warning));
      }
    }
  }

  const Model& model_;
  const std::vector<EventDef>& events_;
  const std::vector<ControlProgram>& controls_;
  const std::vector<Constraint>& constraints_;
  std::vector<Diagnostic> out_;
};

}  // namespace

const std::vector<Rule>& rule_table() {
  static const std::vector<Rule> rules = {
      {"V001", Severity::Error, "unresolved reference in an event, control or constraint"},
      {"V002", Severity::Error, "flow arc outside the adjacency table"},
      {"V003", Severity::Error, "duplicate stage kind in a machine"},
      {"V004", Severity::Error, "receive mixed with arrive/accept in a machine"},
      {"V005", Severity::Error, "create stage with an incoming flow arc"},
      {"V006", Severity::Error, "trigger target outside {create, release, process}"},
      {"V007", Severity::Error, "cross-machine flow arc whose source is not transfer"},
      {"V008", Severity::Error, "event region not weakly connected"},
      {"V009", Severity::Error, "empty event region"},
      {"V010", Severity::Error, "guard used but never declared"},
      {"V011", Severity::Error, "sub-event region not a subset of its parent region"},
      {"V012", Severity::Error, "control program references an undefined event"},
      {"W001", Severity::Warning, "stage with no incoming flow or trigger that is not a create stage"},
  };
  return rules;
}

std::vector<Diagnostic> validate(const Model& model, const std::vector<EventDef>& events,
                                 const std::vector<ControlProgram>& controls,
                                 const std::vector<Constraint>& constraints) {
  return Checker(model, events, controls, constraints).run();
}

std::vector<Diagnostic> validate(const Document& document) {
  return validate(document.model, document.events, document.controls, document.constraints);
}

}  // namespace fm
