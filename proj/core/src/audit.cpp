#include "fm/audit.hpp"

#include <map>
#include <set>
#include <string_view>

namespace fm {
namespace {

constexpr std::string_view kStorageSuffix = ".storage";

bool is_storage(const std::string& location) {
  return location.size() > kStorageSuffix.size() &&
         location.compare(location.size() - kStorageSuffix.size(), kStorageSuffix.size(), kStorageSuffix) == 0;
}

std::string base_of(const std::string& location) {
  return is_storage(location) ? location.substr(0, location.size() - kStorageSuffix.size()) : location;
}

class Auditor {
 public:
  Auditor(const Model& model, const std::vector<EventDef>& events, bool controlled)
      : model_(model), events_(events), controlled_(controlled) {
    for (const auto& f : model.flows()) flows_.insert({f.from.path(), f.to.path()});
    for (const auto& t : model.triggers()) triggers_.insert({t.from.path(), t.to.path()});
    for (const auto& s : model.stages()) {
      stages_.insert(s.path());
      if (const auto* m = model.find_machine(s.machine); m != nullptr && m->has_storage(s.kind)) {
        storage_.insert(s.path());
      }
    }
  }

  std::vector<std::string> run(const Trace& trace) {
    Tick last = 0;
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
      const auto& r = trace.records[i];
      where_ = "record " + std::to_string(i) + " (tick " + std::to_string(r.tick) + ")";
      if (r.tick < last) fail("tick decreases");
      if (r.tick > trace.end_tick) fail("tick after the end tick");
      last = r.tick;
      if (r.tick != tick_) {
        tick_ = r.tick;
        hopped_.clear();
      }
      switch (r.kind) {
        case RecordKind::TokenCreated: created(r); break;
        case RecordKind::Hop: hop(r); break;
        case RecordKind::TriggerFired: fired(r); break;
        case RecordKind::EventStart: start(r); break;
        case RecordKind::EventEnd: end(r); break;
        case RecordKind::Inhibited:
          if (r.subjects.size() != 2 || !stages_.contains(r.subjects[0])) fail("malformed inhibited record");
          break;
      }
    }
    if (where_at_.size() != created_) fail("token count differs from token-created records");
    return std::move(violations_);
  }

 private:
  void fail(const std::string& what) { violations_.push_back(where_ + ": " + what); }

  void created(const TraceRecord& r) {
    if (!r.token || r.subjects.size() != 1) return fail("malformed token-created record");
    ++created_;
    if (!where_at_.emplace(*r.token, r.subjects[0]).second) fail("token id reused");
    if (!stages_.contains(r.subjects[0])) fail("token created at unknown stage");
  }

  void hop(const TraceRecord& r) {
    if (!r.token || r.subjects.size() != 2) return fail("malformed hop record");
    const auto& from = r.subjects[0];
    const auto& to = r.subjects[1];
    auto it = where_at_.find(*r.token);
    if (it == where_at_.end()) return fail("hop by a token that was never created");
    if (it->second != from) fail("token hops from a location it does not occupy");
    if (!hopped_.insert(*r.token).second) fail("token hops twice in one tick");
    it->second = to;

    const bool into_storage = is_storage(to);
    if (into_storage) {
      if (base_of(to) != from || !storage_.contains(from)) fail("illegal storage hop");
    } else if (!flows_.contains({base_of(from), to})) {
      fail("hop " + from + " -> " + to + " follows no flow arc");
    }
    if (controlled_) {
      const auto region = active_region();
      auto base_from = parse_stage_path(base_of(from));
      auto base_to = parse_stage_path(base_of(to));
      if (!base_from || !base_to) return;
      const bool inside = into_storage ? region.stages.contains(*base_from)
                                       : region.flows.contains(ArcRef{*base_from, *base_to});
      if (!inside) fail("hop " + from + " -> " + to + " outside the active regions");
    }
  }

  void fired(const TraceRecord& r) {
    if (r.subjects.size() != 2) return fail("malformed trigger-fired record");
    if (!triggers_.contains({r.subjects[0], r.subjects[1]})) fail("firing of an unknown trigger");
    if (r.token) {
      auto it = where_at_.find(*r.token);
      if (it == where_at_.end() || it->second != r.subjects[0]) fail("firing token is not resident");
    }
    if (controlled_) {
      auto from = parse_stage_path(r.subjects[0]);
      auto to = parse_stage_path(r.subjects[1]);
      if (from && to && !active_region().triggers.contains(ArcRef{*from, *to})) {
        fail("trigger " + r.subjects[0] + " ~> " + r.subjects[1] + " outside the active regions");
      }
    }
  }

  void start(const TraceRecord& r) {
    if (r.subjects.size() != 1) return fail("malformed event-start record");
    if (find_event(events_, r.subjects[0]) == nullptr) fail("start of unknown event");
    if (!open_.emplace(r.subjects[0], r.tick).second) fail("event started twice without ending");
  }

  void end(const TraceRecord& r) {
    if (r.subjects.size() != 1) return fail("malformed event-end record");
    auto it = open_.find(r.subjects[0]);
    if (it == open_.end()) return fail("event ends without a start");
    if (it->second >= r.tick) fail("event ends in the tick it started");
    open_.erase(it);
  }

  Region active_region() const {
    Region region;
    for (const auto& [name, tick] : open_) region.merge(effective_region(events_, name));
    return region;
  }

  const Model& model_;
  const std::vector<EventDef>& events_;
  bool controlled_;
  std::set<std::pair<std::string, std::string>> flows_;
  std::set<std::pair<std::string, std::string>> triggers_;
  std::set<std::string> stages_;
  std::set<std::string> storage_;

  std::map<TokenId, std::string> where_at_;
  std::set<TokenId> hopped_;
  std::map<std::string, Tick> open_;
  std::size_t created_ = 0;
  Tick tick_ = -1;
  std::string where_;
  std::vector<std::string> violations_;
};

}  // namespace

std::vector<std::string> audit_trace(const Model& model, const std::vector<EventDef>& events,
                                     const Trace& trace, bool controlled) {
  return Auditor(model, events, controlled).run(trace);
}

}  // namespace fm
