#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "../../core/src/lexer.hpp"
#include "fixtures.hpp"
#include "fm/dsl.hpp"
#include "random_model.hpp"

namespace fm {
namespace {

ParseResult parse_text(const std::string& text) { return parse(SourceText{text, "t.fm"}); }

Diagnostic only_error(const std::string& text) {
  auto r = parse_text(text);
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.diagnostics.size(), 1u) << text;
  return r.diagnostics.empty() ? Diagnostic{} : r.diagnostics.front();
}

const char* kTwoMachines = R"(model M
sphere A {
  machine m carries t stages { create, process, release, transfer }
}
sphere B {
  machine n carries t stages { receive, process, release, transfer }
}
)";

TEST(Parse, MinimalModel) {
  auto r = parse_text("model M\nsphere S { machine m carries signal stages { create, release, transfer } }\n");
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r.diagnostics.empty());
  const auto& model = r.document->model;
  EXPECT_EQ(model.spheres().size(), 1u);
  EXPECT_EQ(model.machines().size(), 1u);
  EXPECT_EQ(model.stages().size(), 3u);
}

TEST(Parse, ClassroomRootSpheres) {
  const auto doc = test::load_fixture("classroom");
  std::vector<std::string> roots;
  for (const auto* s : doc.model.root_spheres()) roots.push_back(s->name);
  std::sort(roots.begin(), roots.end());
  EXPECT_EQ(roots, (std::vector<std::string>{"Classroom", "Principal", "Student"}));
  EXPECT_EQ(doc.events.size(), 4u);
  EXPECT_EQ(doc.controls.size(), 1u);
}

TEST(Parse, MisspelledStageKeywordIsP003) {
  auto d = only_error("model M\nsphere S {\n  machine m carries t stages { create, procss }\n}\n");
  EXPECT_EQ(d.code, "P003");
  ASSERT_TRUE(d.pos);
  EXPECT_EQ(*d.pos, (SourcePos{3, 40}));
  auto ref = only_error(std::string(kTwoMachines) + "flow A.m.create -> A.m.procss\n");
  EXPECT_EQ(ref.code, "P003");
  EXPECT_EQ(*ref.pos, (SourcePos{8, 24}));
}

TEST(Parse, LexicalErrors) {
  EXPECT_EQ(only_error("model M\nsphere @ {}\n").code, "P001");
  EXPECT_EQ(*only_error("model M\nsphere \xC3\xA9 {}\n").pos, (SourcePos{2, 8}));
  EXPECT_EQ(only_error("model M\nflow A.m.create - A.m.release\n").code, "P001");
  EXPECT_EQ(only_error("model M\nconstraint deadline {a, b} < 99999999999999999999\n").code, "P001");
  EXPECT_EQ(only_error("model M\nconstraint deadline {a, b} < 12ab\n").code, "P001");
}

TEST(Parse, CommentsMayHoldAnyText) {
  auto r = parse_text("# caf\xC3\xA9 \xE2\x80\x94 notes\nmodel M # trailing\n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.document->model.name(), "M");
}

TEST(Parse, UnexpectedTokens) {
  auto d = only_error("model M\nsphere S { machine m carries t stages { create } \n");
  EXPECT_EQ(d.code, "P002");
  EXPECT_EQ(only_error("").code, "P002");
  EXPECT_EQ(only_error("model flow\n").code, "P002");
  EXPECT_EQ(only_error("model M\nbanana\n").code, "P002");
  EXPECT_EQ(only_error(std::string(kTwoMachines) + "flow A.create -> A.m.release\n").code, "P002");
  EXPECT_EQ(only_error(std::string(kTwoMachines) + "control c = seq()\n").code, "P002");
  EXPECT_EQ(only_error(std::string(kTwoMachines) + "event E region { }\n").code, "P002");
}

TEST(Parse, DanglingReferencesAreP004) {
  auto d = only_error(std::string(kTwoMachines) + "flow A.m.release -> A.zz.transfer\n");
  EXPECT_EQ(d.code, "P004");
  EXPECT_EQ(*d.pos, (SourcePos{8, 21}));
  EXPECT_EQ(only_error(std::string(kTwoMachines) + "trigger B.n.process ~> A.m.create guard g\n").code, "V010");
  EXPECT_EQ(only_error("model M\nsphere S { machine m carries t stages { create } storage { process } }\n").code,
            "P004");
}

TEST(Parse, DuplicatesAreP005) {
  EXPECT_EQ(only_error("model M\nsphere A { }\nsphere A { }\n").code, "P005");
  EXPECT_EQ(only_error("model M\nguard g\nguard g\n").code, "P005");
  EXPECT_EQ(only_error(std::string(kTwoMachines) +
                       "flow A.m.release -> A.m.transfer\nflow A.m.release -> A.m.transfer\n")
                .code,
            "P005");
  auto d = only_error(std::string(kTwoMachines) + "event E region { A.m.create }\nevent E region { A.m.create }\n");
  EXPECT_EQ(d.code, "P005");
  EXPECT_EQ(*d.pos, (SourcePos{9, 7}));
  EXPECT_EQ(only_error(std::string(kTwoMachines) +
                       "event E region { A.m.create }\ncontrol c = E\ncontrol c = E\n")
                .code,
            "P005");
}

TEST(Parse, ConstructionRulesReportValidatorCodes) {
  const std::string base = kTwoMachines;
  EXPECT_EQ(only_error(base + "flow A.m.process -> A.m.transfer\n").code, "V002");
  EXPECT_EQ(only_error(base + "flow A.m.transfer -> A.m.create\n").code, "V005");
  EXPECT_EQ(only_error(base + "flow A.m.release -> B.n.receive\n").code, "V007");
  EXPECT_EQ(only_error(base + "trigger A.m.process ~> B.n.transfer\n").code, "V006");
  auto dup = only_error("model M\nsphere S { machine m carries t stages { create, release, create } }\n");
  EXPECT_EQ(dup.code, "V003");
  EXPECT_EQ(*dup.pos, (SourcePos{2, 58}));
  EXPECT_EQ(only_error("model M\nsphere S { machine m carries t stages { receive, arrive } }\n").code, "V004");
}

TEST(Parse, DeclarationOrderIsFree) {
  auto r = parse_text(
      "model M\ncontrol c = E\nevent E region { A.m.create }\nflow A.m.create -> A.m.release\n"
      "sphere A { machine m carries t stages { create, release } }\n");
  ASSERT_TRUE(r.ok()) << r.diagnostics.front().format("t.fm");
}

TEST(Parse, GuardAfterTriggerBindsToTrigger) {
  auto r = parse_text(std::string(kTwoMachines) + "trigger B.n.process ~> A.m.create\nguard g\n");
  EXPECT_FALSE(r.ok());
  auto ok = parse_text(std::string("model M\nguard g\n") + (kTwoMachines + 8) +
                       "trigger B.n.process ~> A.m.create guard g\n");
  ASSERT_TRUE(ok.ok());
  EXPECT_EQ(ok.document->model.triggers().front().guard, "g");
}

TEST(Parse, ControlsAndConstraints) {
  auto r = parse_text(std::string("model M\nguard g\n") + (kTwoMachines + 8) +
                      "event E1 region { A.m.create }\nevent E2 within E1 region { A.m.create }\n"
                      "control c = seq(E1, par(E1, E2), repeat_if(E2, seq(E1)))\n"
                      "constraint deadline {E1, E2} < 5\nconstraint inhibit B.n.receive when g\n");
  ASSERT_TRUE(r.ok());
  const auto& doc = *r.document;
  EXPECT_EQ(doc.events[1].parent, "E1");
  const auto& root = doc.controls.front().root;
  EXPECT_EQ(root.kind, ControlNode::Kind::Seq);
  EXPECT_EQ(root.children[2].kind, ControlNode::Kind::RepeatIf);
  EXPECT_EQ(root.children[2].event, "E2");
  EXPECT_EQ(std::get<Deadline>(doc.constraints[0]).bound, 5);
  EXPECT_EQ(std::get<Inhibit>(doc.constraints[1]).target.path(), "B.n.receive");
}

TEST(Parse, Deterministic) {
  const auto text = test::read_file(test::fixture_path("it-dept.fm"));
  auto a = parse(SourceText{text, "x"});
  auto b = parse(SourceText{text, "x"});
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(serialize(*a.document), serialize(*b.document));
  EXPECT_TRUE(structurally_equal(*a.document, *b.document));
}

TEST(Serialize, EmptyModelIsHeaderOnly) {
  EXPECT_EQ(serialize(Document{Model("M"), {}, {}, {}}), "model M\n");
}

TEST(Serialize, FixturesRoundTrip) {
  for (const auto* name : {"classroom", "buzzer", "it-dept"}) {
    const auto doc = test::load_fixture(name);
    const auto text = serialize(doc);
    auto again = parse(SourceText{text, name});
    ASSERT_TRUE(again.ok()) << name << "\n" << again.diagnostics.front().format(name);
    EXPECT_TRUE(structurally_equal(doc, *again.document)) << name;
    EXPECT_EQ(serialize(*again.document), text) << name;
  }
}

TEST(Serialize, ArcOrderDoesNotMatter) {
  const std::string head = kTwoMachines;
  const std::string a = head + "flow A.m.create -> A.m.release\nflow A.m.release -> A.m.transfer\n"
                               "flow A.m.transfer -> B.n.receive\n";
  const std::string b = head + "flow A.m.transfer -> B.n.receive\nflow A.m.create -> A.m.release\n"
                               "flow A.m.release -> A.m.transfer\n";
  EXPECT_EQ(serialize(*parse_text(a).document), serialize(*parse_text(b).document));
}

// Shuffling the arc declarations of a canonical text collapses to the same bytes.
TEST(Serialize, RandomModelsRoundTripCanonically) {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto doc = test::random_document(seed);
    const auto text = serialize(doc);
    auto again = parse(SourceText{text, "r"});
    ASSERT_TRUE(again.ok()) << text << again.diagnostics.front().format("r");
    ASSERT_TRUE(structurally_equal(doc, *again.document)) << text;

    std::istringstream in(text);
    std::vector<std::string> arcs;
    std::string rest;
    for (std::string line; std::getline(in, line);) {
      if (line.rfind("flow ", 0) == 0 || line.rfind("trigger ", 0) == 0) {
        arcs.push_back(line);
      } else {
        rest += line + "\n";
      }
    }
    std::shuffle(arcs.begin(), arcs.end(), rng);
    for (const auto& line : arcs) rest += line + "\n";
    auto shuffled = parse(SourceText{rest, "s"});
    ASSERT_TRUE(shuffled.ok()) << rest;
    EXPECT_EQ(serialize(*shuffled.document), text);
  }
}

// Replacing a token with a bad one reports an error exactly at that token.
TEST(ParseProperty, PositionFidelityOnMutatedFixtures) {
  std::mt19937_64 rng(3);
  for (const auto* name : {"classroom", "buzzer", "it-dept"}) {
    const auto text = test::read_file(test::fixture_path(std::string(name) + ".fm"));
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    std::vector<detail::LexToken> words;
    for (auto& t : detail::lex(text)) {
      if (t.kind == detail::TokenKind::Word) words.push_back(t);
    }
    for (int round = 0; round < 100; ++round) {
      const auto& victim = words[rng() % words.size()];
      const bool is_kind = stage_kind_from_keyword(victim.text).has_value();
      const std::string replacement = is_kind && rng() % 2 ? "procss" : rng() % 2 ? "@" : "42";
      auto mutated = lines;
      // Columns equal byte offsets here: the fixtures are ASCII outside comments.
      auto& line = mutated[static_cast<std::size_t>(victim.pos.line - 1)];
      line.replace(static_cast<std::size_t>(victim.pos.column - 1), victim.text.size(), replacement);
      std::string joined;
      for (const auto& l : mutated) joined += l + "\n";
      auto r = parse(SourceText{joined, name});
      ASSERT_FALSE(r.ok()) << victim.text << " at " << victim.pos.line << ":" << victim.pos.column;
      ASSERT_TRUE(r.diagnostics.front().pos.has_value());
      EXPECT_EQ(*r.diagnostics.front().pos, victim.pos) << name << " " << victim.text << " -> " << replacement;
      const char* expected = replacement == "@" ? "P001" : replacement == "42" ? "P002" : "P003";
      EXPECT_EQ(r.diagnostics.front().code, expected);
    }
  }
}

TEST(Diagnostic, Format) {
  Diagnostic positioned{"P003", Severity::Error, "unknown stage keyword 'procss'", SourcePos{3, 7}, {}};
  EXPECT_EQ(positioned.format("a.fm"), "a.fm:3:7: P003 unknown stage keyword 'procss'");
  Diagnostic element{"W001", Severity::Warning, "no way in", std::nullopt, "A.m.process"};
  EXPECT_EQ(element.format("a.fm"), "a.fm: W001 warning: no way in (at A.m.process)");
}

}  // namespace
}  // namespace fm
