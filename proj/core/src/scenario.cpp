#include "fm/scenario.hpp"

#include <sstream>

#include "lexer.hpp"

namespace fm {
namespace {

using detail::LexToken;
using detail::TokenKind;

struct LineFailure {
  Diagnostic diagnostic;
};

class LineReader {
 public:
  LineReader(const std::vector<LexToken>& tokens, const Model& model)
      : tokens_(tokens), model_(model) {}

  void read(Scenario& scn) {
    const auto& head = word("a directive");
    if (head.text == "seed") {
      const auto [stage, pos] = stage_path();
      if (!model_.has_stage(stage)) fail("S002", pos, "unknown stage '" + stage.path() + "'");
      if (stage.kind != StageKind::Create) {
        fail("S002", pos, "seed stage '" + stage.path() + "' is not a create stage");
      }
      if (word("'at'").text != "at") fail("S001", tokens_[i_ - 1].pos, "expected 'at'");
      scn.seeds.push_back(Seed{stage, integer()});
    } else if (head.text == "guard") {
      const auto& name = word("a guard name");
      if (!model_.guards().contains(name.text)) {
        fail("S002", name.pos, "undeclared guard '" + name.text + "'");
      }
      symbol("=");
      auto& values = scn.guard_schedule[name.text];
      values.clear();
      do {
        if (!values.empty()) ++i_;
        const auto& v = word("true or false");
        if (v.text != "true" && v.text != "false") fail("S001", v.pos, "expected true or false");
        values.push_back(v.text == "true");
      } while (at_symbol(","));
    } else if (head.text == "delay") {
      const auto [stage, pos] = stage_path();
      if (!model_.has_stage(stage)) fail("S002", pos, "unknown stage '" + stage.path() + "'");
      scn.delays[stage] = integer();
    } else if (head.text == "limit") {
      const auto at = here();
      scn.tick_limit = integer();
      if (scn.tick_limit < 1) fail("S001", at, "tick limit must be at least 1");
    } else {
      fail("S001", head.pos, "unknown directive '" + head.text + "'");
    }
    if (i_ != tokens_.size() && tokens_[i_].kind != TokenKind::End) {
      fail("S001", tokens_[i_].pos, "unexpected '" + tokens_[i_].text + "'");
    }
  }

 private:
  [[noreturn]] static void fail(const char* code, SourcePos pos, std::string message) {
    throw LineFailure{Diagnostic{code, Severity::Error, std::move(message), pos, {}}};
  }

  SourcePos here() const {
    return i_ < tokens_.size() ? tokens_[i_].pos : tokens_.empty() ? SourcePos{} : tokens_.back().pos;
  }
  bool at_symbol(std::string_view s) const {
    return i_ < tokens_.size() && tokens_[i_].kind == TokenKind::Symbol && tokens_[i_].text == s;
  }

  const LexToken& word(const std::string& wanted) {
    if (i_ >= tokens_.size() || tokens_[i_].kind != TokenKind::Word) fail("S001", here(), "expected " + wanted);
    return tokens_[i_++];
  }
  void symbol(std::string_view s) {
    if (!at_symbol(s)) fail("S001", here(), "expected '" + std::string(s) + "'");
    ++i_;
  }
  Tick integer() {
    if (i_ >= tokens_.size() || tokens_[i_].kind != TokenKind::Int) {
      fail("S001", here(), "expected a non-negative integer");
    }
    return tokens_[i_++].value;
  }

  std::pair<StageRef, SourcePos> stage_path() {
    const SourcePos start = here();
    std::string text = word("a stage path").text;
    while (at_symbol(".")) {
      ++i_;
      text += "." + word("a stage path component").text;
    }
    auto ref = parse_stage_path(text);
    if (!ref) fail("S001", start, "malformed stage path '" + text + "'");
    return {*ref, start};
  }

  const std::vector<LexToken>& tokens_;
  const Model& model_;
  std::size_t i_ = 0;
};

}  // namespace

ScenarioResult parse_scenario(const std::string& text, const Model& model) {
  std::vector<std::vector<LexToken>> lines;
  try {
    lines = detail::lex_lines(text, "S001");
  } catch (const detail::LexFailure& f) {
    return {std::nullopt, {f.diagnostic}};
  }
  Scenario scn;
  std::vector<Diagnostic> diagnostics;
  for (const auto& line : lines) {
    if (line.empty() || line.front().kind == TokenKind::End) continue;
    try {
      LineReader(line, model).read(scn);
    } catch (const LineFailure& f) {
      diagnostics.push_back(f.diagnostic);
    }
  }
  if (!diagnostics.empty()) return {std::nullopt, std::move(diagnostics)};
  return {std::move(scn), {}};
}

std::string serialize(const Scenario& scenario) {
  std::ostringstream os;
  for (const auto& s : scenario.seeds) os << "seed " << s.stage.path() << " at " << s.tick << "\n";
  for (const auto& [guard, values] : scenario.guard_schedule) {
    os << "guard " << guard << " =";
    for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : " ") << (values[i] ? "true" : "false");
    os << "\n";
  }
  for (const auto& [stage, ticks] : scenario.delays) os << "delay " << stage.path() << " " << ticks << "\n";
  os << "limit " << scenario.tick_limit << "\n";
  return os.str();
}

}  // namespace fm
