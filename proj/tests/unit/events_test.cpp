#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "fm/events.hpp"
#include "random_model.hpp"

namespace fm {
namespace {

using SK = StageKind;

StageRef st(const std::string& path) { return *parse_stage_path(path); }
ArcRef arc(const std::string& from, const std::string& to) { return {st(from), st(to)}; }

Diagnostic event_error(auto&& action) {
  try {
    action();
  } catch (const EventError& e) {
    return e.diagnostic();
  }
  ADD_FAILURE() << "no EventError";
  return {};
}

// Arcs of a model as (from, to) pairs, flows and triggers separately.
std::pair<std::set<ArcRef>, std::set<ArcRef>> model_arcs(const Model& m) {
  std::set<ArcRef> flows, triggers;
  for (const auto& f : m.flows()) flows.insert({f.from, f.to});
  for (const auto& t : m.triggers()) triggers.insert({t.from, t.to});
  return {flows, triggers};
}

TEST(DefineEvent, ClassroomEvent1) {
  const auto doc = test::load_fixture("classroom");
  Region r;
  r.stages = {st("Principal.data.create"), st("Principal.data.release"), st("Principal.data.transfer"),
              st("Student.data.receive")};
  r.flows = {arc("Principal.data.create", "Principal.data.release"),
             arc("Principal.data.release", "Principal.data.transfer"),
             arc("Principal.data.transfer", "Student.data.receive")};
  const auto e = define_event(doc.model, {}, "Event1", r);
  EXPECT_EQ(e.name, "Event1");
  EXPECT_EQ(e.region.stages.size(), 4u);
}

TEST(DefineEvent, Errors) {
  const auto doc = test::load_fixture("classroom");
  EXPECT_EQ(event_error([&] { define_event(doc.model, {}, "E", Region{}); }).code, "V009");
  Region one;
  one.stages = {st("Principal.data.create")};
  EXPECT_EQ(event_error([&] { define_event(doc.model, {}, "E", one, "Nope"); }).code, "V001");
  auto e1 = define_event(doc.model, {}, "E1", one);
  Region other;
  other.stages = {st("Student.data.receive")};
  EXPECT_EQ(event_error([&] { define_event(doc.model, {e1}, "Sub", other, "E1"); }).code, "V011");
  EXPECT_NO_THROW(define_event(doc.model, {e1}, "Sub", one, "E1"));
  EXPECT_THROW(define_event(doc.model, {e1}, "E1", one), std::invalid_argument);
  EXPECT_THROW(define_event(doc.model, {}, "9bad", one), std::invalid_argument);
}

TEST(DefineEvent, OverlapIsAllowed) {
  const auto doc = test::load_fixture("it-dept");
  std::vector<EventDef> defined;
  for (const auto& e : doc.events) defined.push_back(define_event(doc.model, defined, e.name, e.region, e.parent));
  ASSERT_EQ(defined.size(), 3u);
  const auto shared = shared_stages(*find_event(defined, "Event1"), *find_event(defined, "Event2"));
  EXPECT_EQ(shared, (std::set<StageRef>{st("Network.core_switch.transfer"), st("Network.server_farm.transfer")}));
}

TEST(RegionWellformed, Cases) {
  const auto doc = test::load_fixture("buzzer");
  Region single;
  single.stages = {st("Box1.signal.create")};
  EXPECT_FALSE(region_wellformed(doc.model, single).has_value());

  Region split;
  split.stages = {st("Box1.signal.create"), st("Box2.signal.receive")};
  EXPECT_EQ(region_wellformed(doc.model, split)->code, "V008");

  Region open;
  open.stages = {st("Box1.signal.create")};
  open.flows = {arc("Box1.signal.create", "Box1.signal.release")};
  EXPECT_EQ(region_wellformed(doc.model, open)->code, "V001");

  Region phantom;
  phantom.stages = {st("Box1.signal.create"), st("Box1.signal.transfer")};
  phantom.flows = {arc("Box1.signal.create", "Box1.signal.transfer")};
  EXPECT_EQ(region_wellformed(doc.model, phantom)->code, "V001");

  Region by_trigger;
  by_trigger.stages = {st("Box2.signal.process"), st("Box2.sound.create")};
  by_trigger.triggers = {arc("Box2.signal.process", "Box2.sound.create")};
  EXPECT_FALSE(region_wellformed(doc.model, by_trigger).has_value());
}

TEST(IsSubevent, Examples) {
  const auto it = test::load_fixture("it-dept");
  const auto* event1 = find_event(it.events, "Event1");
  const auto* assign = find_event(it.events, "AssignComputerName");
  EXPECT_TRUE(is_subevent(*assign, *event1));
  EXPECT_FALSE(is_subevent(*event1, *assign));
  const auto cls = test::load_fixture("classroom");
  EXPECT_FALSE(is_subevent(cls.events[0], cls.events[1]));
  for (const auto& e : cls.events) EXPECT_TRUE(is_subevent(e, e));
}

TEST(EffectiveRegion, IncludesNestedEvents) {
  std::vector<EventDef> events;
  events.push_back(EventDef{"A", {{st("X.m.create")}, {}, {}}, {}, {}});
  events.push_back(EventDef{"B", {{st("X.m.create"), st("X.m.release")}, {}, {}}, "A", {}});
  events.push_back(EventDef{"C", {{st("X.m.transfer")}, {}, {}}, "B", {}});
  EXPECT_EQ(effective_region(events, "A").stages.size(), 3u);
  EXPECT_EQ(effective_region(events, "C").stages.size(), 1u);
  events[0].parent = "C";  // cycles must not hang
  EXPECT_EQ(effective_region(events, "A").stages.size(), 3u);
}

// Criterion: each candidate refines exactly one hand-drawn region and the
// candidates cover every arc.
TEST(Eventize, ClassroomRefinesHandRegions) {
  const auto doc = test::load_fixture("classroom");
  const auto candidates = eventize(doc.model);
  EXPECT_GE(candidates.size(), 4u);
  std::set<ArcRef> flows, triggers;
  for (const auto& c : candidates) {
    int containing = 0;
    for (const auto& e : doc.events) containing += c.subset_of(e.region) ? 1 : 0;
    EXPECT_EQ(containing, 1);
    flows.insert(c.flows.begin(), c.flows.end());
    triggers.insert(c.triggers.begin(), c.triggers.end());
  }
  const auto [model_flows, model_triggers] = model_arcs(doc.model);
  EXPECT_EQ(flows, model_flows);
  EXPECT_EQ(triggers, model_triggers);
}

TEST(Eventize, SingleMachineIsOneCandidate) {
  Model m("M");
  m.add_sphere("S");
  m.add_machine("S", "m", "t", {SK::Create, SK::Release, SK::Transfer});
  m.add_flow(st("S.m.create"), st("S.m.release")).add_flow(st("S.m.release"), st("S.m.transfer"));
  const auto candidates = eventize(m);
  ASSERT_EQ(candidates.size(), 1u);
  EXPECT_EQ(candidates[0].flows.size(), 2u);
  EXPECT_EQ(candidates[0].stages.size(), 3u);
}

TEST(Eventize, BuzzerCoverage) {
  const auto doc = test::load_fixture("buzzer");
  std::set<ArcRef> flows, triggers;
  for (const auto& c : eventize(doc.model)) {
    EXPECT_FALSE(region_wellformed(doc.model, c).has_value());
    flows.insert(c.flows.begin(), c.flows.end());
    triggers.insert(c.triggers.begin(), c.triggers.end());
  }
  EXPECT_EQ(std::make_pair(flows, triggers), model_arcs(doc.model));
}

TEST(Eventize, RandomModelsCoverageWellformednessDeterminism) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto doc = test::random_document(seed);
    const auto candidates = eventize(doc.model);
    EXPECT_EQ(candidates, eventize(doc.model));
    std::set<ArcRef> flows, triggers;
    std::size_t arc_total = 0;
    for (const auto& c : candidates) {
      EXPECT_FALSE(region_wellformed(doc.model, c).has_value()) << seed;
      flows.insert(c.flows.begin(), c.flows.end());
      triggers.insert(c.triggers.begin(), c.triggers.end());
      arc_total += c.flows.size() + c.triggers.size();
    }
    EXPECT_EQ(std::make_pair(flows, triggers), model_arcs(doc.model)) << seed;
    EXPECT_EQ(arc_total, doc.model.flows().size() + doc.model.triggers().size()) << "arc in two candidates";
    for (std::size_t i = 1; i < candidates.size(); ++i) {
      EXPECT_LE(*candidates[i - 1].stages.begin(), *candidates[i].stages.begin());
    }
  }
}

TEST(IsSubevent, PartialOrderOnRandomRegions) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto doc = test::random_document(seed);
    std::vector<EventDef> events;
    Region acc;
    for (const auto& c : eventize(doc.model)) {
      events.push_back(EventDef{"c" + std::to_string(events.size()), c, {}, {}});
      acc.merge(c);
      events.push_back(EventDef{"u" + std::to_string(events.size()), acc, {}, {}});
    }
    for (const auto& a : events) {
      EXPECT_TRUE(is_subevent(a, a));
      for (const auto& b : events) {
        if (is_subevent(a, b) && is_subevent(b, a)) EXPECT_EQ(a.region, b.region);
        for (const auto& c : events) {
          if (is_subevent(a, b) && is_subevent(b, c)) EXPECT_TRUE(is_subevent(a, c));
        }
      }
    }
  }
}

TEST(Eventize, CandidateNames) {
  EXPECT_EQ(candidate_name(0), "E#1");
  EXPECT_EQ(candidate_name(11), "E#12");
}

}  // namespace
}  // namespace fm
