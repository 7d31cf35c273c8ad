#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "fm/audit.hpp"
#include "fm/export.hpp"
#include "fm/simulate.hpp"

namespace fm {
namespace {

using Names = std::vector<std::string>;

struct Run {
  Document doc;
  Trace trace;
};

Run run_fixture(const std::string& fixture, const std::string& scenario, bool controlled) {
  auto doc = test::load_fixture(fixture);
  const auto scn = test::load_scenario(scenario, doc.model);
  const auto* program = controlled ? &doc.controls.front() : nullptr;
  auto trace = simulate(doc.model, doc.events, program, scn, doc.constraints, {true});
  return {std::move(doc), std::move(trace)};
}

std::size_t hops(const Trace& t) { return t.count(RecordKind::Hop); }

// A loop of transfer stages that never goes quiet.
const char* kLoop = R"(model Loop
sphere A {
  machine m carries t stages { create, release, transfer }
  machine n carries t stages { transfer }
}
flow A.m.create -> A.m.release
flow A.m.release -> A.m.transfer
flow A.m.transfer -> A.n.transfer
flow A.n.transfer -> A.m.transfer
event Spin region {
  A.m.create, A.m.release, A.m.transfer, A.n.transfer,
  flow A.m.create -> A.m.release, flow A.m.release -> A.m.transfer,
  flow A.m.transfer -> A.n.transfer, flow A.n.transfer -> A.m.transfer
}
control forever = repeat_if(Spin, Spin)
)";

TEST(Simulate, ClassroomRepeatsOnMismatch) {
  const auto run = run_fixture("classroom", "mismatch-once", true);
  const Names expected{"E1", "E2", "E3", "E4", "E1", "E2", "E3"};
  EXPECT_EQ(run.trace.event_sequence(RecordKind::EventStart), expected);
  EXPECT_EQ(run.trace.event_sequence(RecordKind::EventEnd), expected);
  EXPECT_EQ(run.trace.reason, StopReason::Completed);
  EXPECT_TRUE(audit_trace(run.doc.model, run.doc.events, run.trace, true).empty());
}

TEST(Simulate, ClassroomStopsOnMatch) {
  const auto run = run_fixture("classroom", "match", true);
  EXPECT_EQ(run.trace.event_sequence(), (Names{"E1", "E2", "E3"}));
  EXPECT_EQ(run.trace.reason, StopReason::Completed);
}

TEST(Simulate, DeterministicAcrossRuns) {
  const auto first = render_trace(run_fixture("classroom", "mismatch-once", true).trace);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(render_trace(run_fixture("classroom", "mismatch-once", true).trace), first);
  }
}

TEST(Simulate, GoldenTraces) {
  EXPECT_EQ(render_trace(run_fixture("classroom", "mismatch-once", true).trace),
            test::read_file(test::golden_path("classroom-mismatch-once.trace")));
  EXPECT_EQ(render_trace(run_fixture("classroom", "mismatch-once", false).trace),
            test::read_file(test::golden_path("classroom-free.trace")));
  EXPECT_EQ(render_trace(run_fixture("buzzer", "press", false).trace),
            test::read_file(test::golden_path("buzzer-press.trace")));
  EXPECT_EQ(render_trace(run_fixture("it-dept", "on-time", true).trace),
            test::read_file(test::golden_path("it-dept-on-time.trace")));
}

TEST(Simulate, BuzzerReachesKnowledge) {
  const auto run = run_fixture("buzzer", "press", false);
  EXPECT_EQ(hops(run.trace), 10u);
  const auto& last = run.trace.records.back();
  EXPECT_EQ(last.kind, RecordKind::TokenCreated);
  EXPECT_EQ(last.subjects, Names{"House.Person.knowledge.create"});
  EXPECT_EQ(run.trace.count(RecordKind::TriggerFired), 2u);
  EXPECT_EQ(run.trace.reason, StopReason::Quiescent);
  EXPECT_EQ(run.trace.end_tick, 12);
}

TEST(Simulate, EmptyScenarioStopsAtTickOne) {
  const auto doc = test::load_fixture("buzzer");
  const auto trace = simulate(doc.model, doc.events, nullptr, Scenario{});
  EXPECT_TRUE(trace.records.empty());
  EXPECT_EQ(trace.end_tick, 1);
  EXPECT_EQ(trace.reason, StopReason::Quiescent);
  EXPECT_EQ(render_trace(trace), "end tick=1 reason=quiescent\n");
}

TEST(Simulate, TickLimitCarriesPartialTrace) {
  const auto doc = test::parse_document(kLoop);
  auto scn = test::parse_scenario_text("seed A.m.create at 0\nlimit 25\n", doc.model);
  const auto free = simulate(doc.model, doc.events, nullptr, scn);
  EXPECT_EQ(free.reason, StopReason::TickLimit);
  EXPECT_EQ(free.end_tick, 25);
  EXPECT_EQ(hops(free), 24u);
  const auto controlled = simulate(doc.model, doc.events, &doc.controls.front(), scn);
  EXPECT_EQ(controlled.reason, StopReason::TickLimit);
  EXPECT_EQ(controlled.event_sequence(), Names{"Spin"});
}

TEST(Simulate, ControlledRunsStayInsideRegions) {
  for (const auto& [fixture, scenario] : std::vector<std::pair<std::string, std::string>>{
           {"classroom", "mismatch-once"}, {"classroom", "match"}, {"it-dept", "on-time"}, {"it-dept", "late-login"}}) {
    const auto run = run_fixture(fixture, scenario, true);
    const auto violations = audit_trace(run.doc.model, run.doc.events, run.trace, true);
    EXPECT_TRUE(violations.empty()) << fixture << "/" << scenario << ": " << violations.front();
  }
}

TEST(Simulate, ServerFarmRoutesByActiveEvent) {
  const auto run = run_fixture("it-dept", "on-time", true);
  std::size_t to_directory = 0, to_dhcp = 0;
  for (const auto& r : run.trace.records) {
    if (r.kind != RecordKind::Hop || r.subjects[0] != "Network.server_farm.transfer") continue;
    (r.subjects[1] == "Servers.DomainController.directory.receive" ? to_directory : to_dhcp)++;
  }
  EXPECT_EQ(to_directory, 3u);
  EXPECT_EQ(to_dhcp, 1u);
}

TEST(Simulate, StorageParksBlockedTokens) {
  const auto doc = test::parse_document(R"(model Store
sphere A {
  machine src carries t stages { create, process }
  machine m carries t stages { create, release, transfer } storage { create }
}
flow A.src.create -> A.src.process
flow A.m.create -> A.m.release
flow A.m.release -> A.m.transfer
trigger A.src.process ~> A.m.release
)");
  const auto scn = test::parse_scenario_text("seed A.m.create at 0\nseed A.src.create at 2\n", doc.model);
  const auto trace = simulate(doc.model, doc.events, nullptr, scn, {}, {true});
  std::vector<std::string> lines;
  for (const auto& r : trace.records) {
    if (r.kind == RecordKind::Hop) lines.push_back(std::to_string(r.tick) + " " + r.subjects[0] + " " + r.subjects[1]);
  }
  EXPECT_EQ(lines, (Names{"1 A.m.create A.m.create.storage", "3 A.src.create A.src.process",
                          "4 A.m.create.storage A.m.release", "5 A.m.release A.m.transfer"}));
  EXPECT_TRUE(audit_trace(doc.model, doc.events, trace, false).empty());
}

TEST(Simulate, DelaysHoldTokens) {
  const auto on_time = run_fixture("it-dept", "on-time", true);
  const auto late = run_fixture("it-dept", "late-login", true);
  EXPECT_EQ(late.trace.end_tick - on_time.trace.end_tick, 20);
}

TEST(Simulate, ParallelChildrenInterleave) {
  auto doc = test::load_fixture("classroom");
  const auto scn = test::load_scenario("match", doc.model);
  const ControlProgram par{"p", ControlNode::par({ControlNode::run("E1"), ControlNode::run("E2")})};
  const auto trace = simulate(doc.model, doc.events, &par, scn, {}, {true});
  EXPECT_EQ(trace.event_sequence(), (Names{"E1", "E2"}));
  EXPECT_EQ(trace.records[0].tick, trace.records[1].tick);
  EXPECT_EQ(trace.reason, StopReason::Completed);
  EXPECT_TRUE(audit_trace(doc.model, doc.events, trace, true).empty());
}

TEST(Simulate, ConcurrentInstancesShareMarks) {
  auto doc = test::load_fixture("classroom");
  const auto scn = test::load_scenario("match", doc.model);
  const ControlProgram twice{
      "p", ControlNode::seq({ControlNode::par({ControlNode::run("E1"), ControlNode::run("E1")}),
                             ControlNode::run("E1")})};
  const auto trace = simulate(doc.model, doc.events, &twice, scn, {}, {true});
  EXPECT_EQ(trace.event_sequence(), (Names{"E1", "E1"}));
  EXPECT_EQ(trace.event_sequence(RecordKind::EventEnd), (Names{"E1", "E1"}));
  EXPECT_TRUE(audit_trace(doc.model, doc.events, trace, true).empty());
}

TEST(Simulate, InhibitBlocksTarget) {
  const auto run = run_fixture("it-dept", "alarm", false);
  EXPECT_EQ(run.trace.count(RecordKind::Inhibited), 8u);
  Tick entered = -1;
  for (const auto& r : run.trace.records) {
    if (r.kind == RecordKind::Hop && r.subjects[1] == "Servers.DomainController.relay.receive") entered = r.tick;
  }
  EXPECT_EQ(entered, 8);
  const auto verdicts = check_constraints(run.trace, {run.doc.constraints[1]});
  EXPECT_EQ(verdicts.front().verdict, Verdict::Pass);
}

TEST(CheckConstraints, DeadlineArithmetic) {
  Trace t;
  t.records = {{1, RecordKind::EventStart, {}, {"E1"}},
               {2, RecordKind::EventEnd, {}, {"E1"}},
               {2, RecordKind::EventStart, {}, {"E2"}},
               {4, RecordKind::EventEnd, {}, {"E2"}}};
  t.end_tick = 4;
  t.reason = StopReason::Completed;
  const auto pass = check_constraints(t, {Deadline{"E1", "E2", 10}}).front();
  EXPECT_EQ(pass.verdict, Verdict::Pass);
  EXPECT_EQ(pass.measured, 3);
  EXPECT_EQ(pass.witnesses, (std::vector<std::size_t>{0, 3}));
  const auto fail = check_constraints(t, {Deadline{"E1", "E2", 3}}).front();
  EXPECT_EQ(fail.verdict, Verdict::Fail);
  EXPECT_EQ(fail.witnesses, std::vector<std::size_t>{3});
  const auto missing = check_constraints(t, {Deadline{"E1", "E3", 3}}).front();
  EXPECT_EQ(missing.verdict, Verdict::Fail);
  EXPECT_TRUE(missing.missing);
  EXPECT_TRUE(missing.witnesses.empty());
  const std::vector<EventDef> events{{"E1", {}, {}, {}}, {"E2", {}, {}, {}}};
  EXPECT_THROW(check_constraints(t, {Deadline{"E1", "E3", 3}}, &events), UnknownEventName);
}

TEST(CheckConstraints, InhibitFlagsForgedHops) {
  Trace t;
  t.records = {{3, RecordKind::Inhibited, {}, {"A.m.receive", "g"}},
               {3, RecordKind::Hop, 1, {"A.n.transfer", "A.m.receive"}}};
  const auto v = check_constraints(t, {Inhibit{*parse_stage_path("A.m.receive"), "g"}}).front();
  EXPECT_EQ(v.verdict, Verdict::Fail);
  EXPECT_EQ(v.witnesses, std::vector<std::size_t>{1});
}

TEST(CheckConstraints, ItDeadline) {
  const auto on_time = run_fixture("it-dept", "on-time", true);
  const auto v1 = check_constraints(on_time.trace, on_time.doc.constraints, &on_time.doc.events);
  EXPECT_EQ(v1[0].verdict, Verdict::Pass);
  EXPECT_EQ(v1[0].measured, 22);
  const auto late = run_fixture("it-dept", "late-login", true);
  const auto v2 = check_constraints(late.trace, late.doc.constraints, &late.doc.events);
  EXPECT_EQ(v2[0].verdict, Verdict::Fail);
  EXPECT_EQ(v2[0].measured, 42);
}

TEST(CheckWindows, StartAndEndBounds) {
  auto run = run_fixture("classroom", "match", true);
  auto events = run.doc.events;
  events[1].window = TimeWindow{0, 20};  // E2 runs 4..9
  events[2].window = TimeWindow{10, 20};  // E3 starts at 9
  const auto verdicts = check_windows(run.trace, events);
  ASSERT_EQ(verdicts.size(), 2u);
  EXPECT_EQ(verdicts[0].verdict, Verdict::Pass);
  EXPECT_EQ(verdicts[1].verdict, Verdict::Fail);
}

TEST(Audit, DetectsBrokenTraces) {
  const auto run = run_fixture("buzzer", "press", false);
  auto broken = run.trace;
  broken.records[1].subjects[1] = "Box1.signal.transfer";
  EXPECT_FALSE(audit_trace(run.doc.model, run.doc.events, broken, false).empty());
  auto backwards = run.trace;
  backwards.records[2].tick = 0;
  EXPECT_FALSE(audit_trace(run.doc.model, run.doc.events, backwards, false).empty());
  auto doubled = run.trace;
  doubled.records.push_back(doubled.records.front());
  EXPECT_FALSE(audit_trace(run.doc.model, run.doc.events, doubled, false).empty());
}

}  // namespace
}  // namespace fm
