#include "fm/dsl.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "lexer.hpp"

namespace fm {
namespace {

using detail::LexToken;
using detail::TokenKind;

struct ParseFailure {
  Diagnostic diagnostic;
};

Diagnostic error_at(std::string code, SourcePos pos, std::string message) {
  return Diagnostic{std::move(code), Severity::Error, std::move(message), pos, {}};
}

struct Named {
  std::string name;
  SourcePos pos;
};

struct RefAst {
  StageRef ref;
  SourcePos pos;
};

struct KindAst {
  StageKind kind;
  SourcePos pos;
};

struct MachineAst {
  Named name;
  std::string thing;
  std::vector<KindAst> kinds;
  std::vector<KindAst> storage;
};

struct SphereAst {
  Named name;
  std::vector<Named> things;
  std::vector<MachineAst> machines;
  std::vector<SphereAst> spheres;
};

struct FlowAst {
  RefAst from;
  RefAst to;
};

struct TriggerAst {
  RefAst from;
  RefAst to;
  std::optional<Named> guard;
};

struct EventAst {
  Named name;
  std::optional<std::string> parent;
  Region region;
};

struct ControlAst {
  Named name;
  ControlNode root;
};

struct FileAst {
  Named model;
  std::vector<SphereAst> spheres;
  std::vector<Named> guards;
  std::vector<FlowAst> flows;
  std::vector<TriggerAst> triggers;
  std::vector<EventAst> events;
  std::vector<ControlAst> controls;
  std::vector<Constraint> constraints;
};

class Parser {
 public:
  explicit Parser(std::vector<LexToken> tokens) : tokens_(std::move(tokens)) {}

  FileAst file() {
    FileAst f;
    expect_keyword("model");
    f.model = identifier("model name");
    while (peek().kind != TokenKind::End) {
      const auto& t = peek();
      if (is_word("sphere")) {
        f.spheres.push_back(sphere());
      } else if (is_word("flow")) {
        next();
        auto from = stage_ref();
        expect_symbol("->");
        f.flows.push_back({from, stage_ref()});
      } else if (is_word("trigger")) {
        next();
        auto from = stage_ref();
        expect_symbol("~>");
        TriggerAst trig{from, stage_ref(), std::nullopt};
        if (is_word("guard")) {
          next();
          trig.guard = identifier("guard name");
        }
        f.triggers.push_back(std::move(trig));
      } else if (is_word("guard")) {
        next();
        f.guards.push_back(identifier("guard name"));
      } else if (is_word("event")) {
        f.events.push_back(event());
      } else if (is_word("control")) {
        next();
        ControlAst c{identifier("control name"), {}};
        expect_symbol("=");
        c.root = control_expr();
        f.controls.push_back(std::move(c));
      } else if (is_word("constraint")) {
        f.constraints.push_back(constraint());
      } else {
        unexpected(t, "a declaration");
      }
    }
    return f;
  }

 private:
  const LexToken& peek() const { return tokens_[i_]; }
  const LexToken& next() {
    const auto& t = tokens_[i_];
    if (t.kind != TokenKind::End) ++i_;
    return t;
  }
  bool is_word(std::string_view w) const { return peek().kind == TokenKind::Word && peek().text == w; }
  bool is_symbol(std::string_view s) const {
    return peek().kind == TokenKind::Symbol && peek().text == s;
  }

  [[noreturn]] void unexpected(const LexToken& t, const std::string& wanted) {
    std::string found = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
    throw ParseFailure{error_at("P002", t.pos, "expected " + wanted + ", found " + found)};
  }

  void expect_keyword(std::string_view w) {
    if (!is_word(w)) unexpected(peek(), "'" + std::string(w) + "'");
    next();
  }
  void expect_symbol(std::string_view s) {
    if (!is_symbol(s)) unexpected(peek(), "'" + std::string(s) + "'");
    next();
  }

  Named identifier(const std::string& what) {
    const auto& t = peek();
    if (t.kind != TokenKind::Word || is_keyword(t.text)) unexpected(t, what);
    next();
    return {t.text, t.pos};
  }

  KindAst kind() {
    const auto& t = peek();
    if (t.kind == TokenKind::Word) {
      if (auto k = stage_kind_from_keyword(t.text)) {
        next();
        return {*k, t.pos};
      }
      if (!is_keyword(t.text)) {
        throw ParseFailure{error_at("P003", t.pos, "unknown stage keyword '" + t.text + "'")};
      }
    }
    unexpected(t, "a stage keyword");
  }

  std::vector<KindAst> kind_list() {
    expect_symbol("{");
    std::vector<KindAst> out{kind()};
    while (is_symbol(",")) {
      next();
      out.push_back(kind());
    }
    expect_symbol("}");
    return out;
  }

  // sphere-path.machine.kind
  RefAst stage_ref() {
    const SourcePos start = peek().pos;
    std::vector<Named> parts{identifier("a stage reference")};
    while (true) {
      if (!is_symbol(".")) {
        const auto& last = parts.back();
        if (parts.size() >= 2) {
          throw ParseFailure{error_at("P003", last.pos, "unknown stage keyword '" + last.name + "'")};
        }
        unexpected(peek(), "'.'");
      }
      next();
      const auto& t = peek();
      if (t.kind == TokenKind::Word) {
        if (auto k = stage_kind_from_keyword(t.text)) {
          next();
          if (parts.size() < 2) {
            throw ParseFailure{error_at("P002", start, "stage reference needs sphere.machine.kind")};
          }
          std::string machine;
          for (const auto& p : parts) {
            if (!machine.empty()) machine += '.';
            machine += p.name;
          }
          return {StageRef{machine, *k}, start};
        }
      }
      parts.push_back(identifier("an identifier or stage keyword"));
    }
  }

  SphereAst sphere() {
    expect_keyword("sphere");
    SphereAst s{identifier("sphere name"), {}, {}, {}};
    expect_symbol("{");
    while (!is_symbol("}")) {
      if (is_word("sphere")) {
        s.spheres.push_back(sphere());
      } else if (is_word("machine")) {
        next();
        MachineAst m{identifier("machine name"), {}, {}, {}};
        expect_keyword("carries");
        m.thing = identifier("thing label").name;
        expect_keyword("stages");
        m.kinds = kind_list();
        if (is_word("storage")) {
          next();
          m.storage = kind_list();
        }
        s.machines.push_back(std::move(m));
      } else if (is_word("thing")) {
        next();
        s.things.push_back(identifier("thing name"));
      } else {
        unexpected(peek(), "'sphere', 'machine', 'thing' or '}'");
      }
    }
    expect_symbol("}");
    return s;
  }

  EventAst event() {
    expect_keyword("event");
    EventAst e{identifier("event name"), std::nullopt, {}};
    if (is_word("within")) {
      next();
      e.parent = identifier("parent event name").name;
    }
    expect_keyword("region");
    expect_symbol("{");
    do {
      if (!e.region.empty()) next();  // the separating comma
      if (is_word("flow")) {
        next();
        auto from = stage_ref();
        expect_symbol("->");
        e.region.flows.insert({from.ref, stage_ref().ref});
      } else if (is_word("trigger")) {
        next();
        auto from = stage_ref();
        expect_symbol("~>");
        e.region.triggers.insert({from.ref, stage_ref().ref});
      } else {
        e.region.stages.insert(stage_ref().ref);
      }
    } while (is_symbol(","));
    expect_symbol("}");
    return e;
  }

  ControlNode control_expr() {
    const auto& t = peek();
    if (is_word("seq") || is_word("par")) {
      const bool is_seq = t.text == "seq";
      next();
      expect_symbol("(");
      std::vector<ControlNode> kids{control_expr()};
      while (is_symbol(",")) {
        next();
        kids.push_back(control_expr());
      }
      expect_symbol(")");
      return is_seq ? ControlNode::seq(std::move(kids)) : ControlNode::par(std::move(kids));
    }
    if (is_word("repeat_if")) {
      next();
      expect_symbol("(");
      auto event = identifier("event name").name;
      expect_symbol(",");
      auto body = control_expr();
      expect_symbol(")");
      return ControlNode::repeat_if(std::move(event), std::move(body));
    }
    return ControlNode::run(identifier("an event name or 'seq', 'par', 'repeat_if'").name);
  }

  Constraint constraint() {
    expect_keyword("constraint");
    if (is_word("deadline")) {
      next();
      expect_symbol("{");
      Deadline d;
      d.first = identifier("event name").name;
      expect_symbol(",");
      d.last = identifier("event name").name;
      expect_symbol("}");
      expect_symbol("<");
      if (peek().kind != TokenKind::Int) unexpected(peek(), "an integer bound");
      d.bound = next().value;
      return d;
    }
    if (is_word("inhibit")) {
      next();
      Inhibit in;
      in.target = stage_ref().ref;
      expect_keyword("when");
      in.guard = identifier("guard name").name;
      return in;
    }
    unexpected(peek(), "'deadline' or 'inhibit'");
  }

  std::vector<LexToken> tokens_;
  std::size_t i_ = 0;
};

std::string_view code_for(const ModelError& e, bool same_machine) {
  switch (e.code()) {
    case ModelErrc::DuplicateSphere:
    case ModelErrc::DuplicateMachine:
    case ModelErrc::DuplicateArc:
    case ModelErrc::DuplicateGuard: return "P005";
    case ModelErrc::UnknownParent:
    case ModelErrc::UnknownSphere:
    case ModelErrc::UnknownStage:
    case ModelErrc::StorageWithoutStage: return "P004";
    case ModelErrc::UnknownGuard: return "V010";
    case ModelErrc::DuplicateStage: return "V003";
    case ModelErrc::MixedReceive: return "V004";
    case ModelErrc::IllegalTriggerTarget: return "V006";
    case ModelErrc::IllegalAdjacency: {
      const auto [from, to] = *e.kind_pair();
      if (to == StageKind::Create) return "V005";
      if (!same_machine && from != StageKind::Transfer) return "V007";
      return "V002";
    }
    case ModelErrc::InvalidIdentifier:
    case ModelErrc::EmptyStageSet: return "P002";
  }
  return "P002";
}

class Builder {
 public:
  explicit Builder(const FileAst& ast) : ast_(ast), model_(ast.model.name) {}

  ParseResult build() {
    for (const auto& s : ast_.spheres) add_sphere(s, "");
    for (const auto& g : ast_.guards) {
      attempt(g.pos, false, [&] { model_.declare_guard(g.name); });
    }
    for (const auto& f : ast_.flows) {
      const auto pos = model_.has_stage(f.from.ref) ? f.to.pos : f.from.pos;
      const auto anchor = model_.has_stage(f.from.ref) && model_.has_stage(f.to.ref) ? f.from.pos : pos;
      attempt(anchor, f.from.ref.machine == f.to.ref.machine,
              [&] { model_.add_flow(f.from.ref, f.to.ref); });
    }
    for (const auto& t : ast_.triggers) {
      SourcePos anchor = t.from.pos;
      if (model_.has_stage(t.from.ref) && !model_.has_stage(t.to.ref)) anchor = t.to.pos;
      if (model_.has_stage(t.from.ref) && model_.has_stage(t.to.ref) && t.guard &&
          !model_.guards().contains(t.guard->name)) {
        anchor = t.guard->pos;
      }
      std::optional<std::string> guard;
      if (t.guard) guard = t.guard->name;
      attempt(anchor, false, [&] { model_.add_trigger(t.from.ref, t.to.ref, guard); });
    }

    Document doc{std::move(model_), {}, {}, {}};
    for (const auto& e : ast_.events) {
      if (find_event(doc.events, e.name.name) != nullptr) {
        diagnostics_.push_back(error_at("P005", e.name.pos, "duplicate event '" + e.name.name + "'"));
        continue;
      }
      doc.events.push_back(EventDef{e.name.name, e.region, e.parent, std::nullopt});
    }
    for (const auto& c : ast_.controls) {
      if (find_program(doc.controls, c.name.name) != nullptr) {
        diagnostics_.push_back(
            error_at("P005", c.name.pos, "duplicate control '" + c.name.name + "'"));
        continue;
      }
      doc.controls.push_back(ControlProgram{c.name.name, c.root});
    }
    doc.constraints = ast_.constraints;

    if (!diagnostics_.empty()) return ParseResult{std::nullopt, std::move(diagnostics_)};
    return ParseResult{std::move(doc), {}};
  }

 private:
  template <typename F>
  bool attempt(SourcePos pos, bool same_machine, F&& action) {
    try {
      action();
      return true;
    } catch (const ModelError& e) {
      diagnostics_.push_back(error_at(std::string(code_for(e, same_machine)), pos, e.what()));
      return false;
    }
  }

  void add_sphere(const SphereAst& s, const std::string& parent) {
    const std::string path = parent.empty() ? s.name.name : parent + "." + s.name.name;
    if (!attempt(s.name.pos, false, [&] { model_.add_sphere(path); })) return;
    for (const auto& t : s.things) {
      attempt(t.pos, false, [&] { model_.add_thing(path, t.name); });
    }
    for (const auto& m : s.machines) add_machine(m, path);
    for (const auto& child : s.spheres) add_sphere(child, path);
  }

  void add_machine(const MachineAst& m, const std::string& sphere) {
    std::vector<StageKind> kinds;
    SourcePos anchor = m.name.pos;
    for (const auto& k : m.kinds) {
      if (std::find(kinds.begin(), kinds.end(), k.kind) != kinds.end() && anchor == m.name.pos) {
        anchor = k.pos;
      }
      kinds.push_back(k.kind);
    }
    std::set<StageKind> storage;
    for (const auto& k : m.storage) {
      if (std::find(kinds.begin(), kinds.end(), k.kind) == kinds.end() && anchor == m.name.pos) {
        anchor = k.pos;
      }
      storage.insert(k.kind);
    }
    try {
      model_.add_machine(sphere, m.name.name, m.thing, kinds, storage);
    } catch (const ModelError& e) {
      diagnostics_.push_back(error_at(std::string(code_for(e, true)), anchor, e.what()));
      if (e.code() == ModelErrc::DuplicateStage || e.code() == ModelErrc::MixedReceive) {
        // Register a repaired machine so later references do not cascade into P004.
        std::vector<StageKind> repaired;
        const bool receive = std::find(kinds.begin(), kinds.end(), StageKind::Receive) != kinds.end();
        for (auto k : kinds) {
          if (std::find(repaired.begin(), repaired.end(), k) != repaired.end()) continue;
          if (receive && (k == StageKind::Arrive || k == StageKind::Accept)) continue;
          repaired.push_back(k);
        }
        std::erase_if(storage, [&](StageKind k) {
          return std::find(repaired.begin(), repaired.end(), k) == repaired.end();
        });
        attempt(anchor, true, [&] { model_.add_machine(sphere, m.name.name, m.thing, repaired, storage); });
      }
    }
  }

  const FileAst& ast_;
  Model model_;
  std::vector<Diagnostic> diagnostics_;
};

}  // namespace

ParseResult parse(const SourceText& text) {
  try {
    auto tokens = detail::lex(text.content);
    auto ast = Parser(std::move(tokens)).file();
    return Builder(ast).build();
  } catch (const detail::LexFailure& f) {
    return ParseResult{std::nullopt, {f.diagnostic}};
  } catch (const ParseFailure& f) {
    return ParseResult{std::nullopt, {f.diagnostic}};
  }
}

// --- serialization ---------------------------------------------------------

namespace {

void write_kinds(std::ostream& os, std::vector<StageKind> kinds) {
  std::sort(kinds.begin(), kinds.end());
  os << "{ ";
  for (std::size_t i = 0; i < kinds.size(); ++i) os << (i ? ", " : "") << keyword(kinds[i]);
  os << " }";
}

void write_sphere(std::ostream& os, const Model& model, const Sphere& sphere, int depth) {
  const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  os << indent << "sphere " << sphere.name << " {\n";
  for (const auto& thing : sphere.things) os << indent << "  thing " << thing << "\n";

  std::vector<const Machine*> machines;
  for (const auto& path : sphere.machines) machines.push_back(model.find_machine(path));
  std::sort(machines.begin(), machines.end(),
            [](const Machine* a, const Machine* b) { return a->name < b->name; });
  for (const auto* m : machines) {
    os << indent << "  machine " << m->name << " carries " << m->thing_label << " stages ";
    write_kinds(os, m->stages);
    if (!m->storage.empty()) {
      os << " storage ";
      write_kinds(os, {m->storage.begin(), m->storage.end()});
    }
    os << "\n";
  }

  std::vector<const Sphere*> children;
  for (const auto& path : sphere.children) children.push_back(model.find_sphere(path));
  std::sort(children.begin(), children.end(),
            [](const Sphere* a, const Sphere* b) { return a->name < b->name; });
  for (const auto* child : children) write_sphere(os, model, *child, depth + 1);
  os << indent << "}\n";
}

void write_control(std::ostream& os, const ControlNode& node) {
  switch (node.kind) {
    case ControlNode::Kind::Run: os << node.event; return;
    case ControlNode::Kind::Seq:
    case ControlNode::Kind::Par:
      os << (node.kind == ControlNode::Kind::Seq ? "seq(" : "par(");
      for (std::size_t i = 0; i < node.children.size(); ++i) {
        if (i) os << ", ";
        write_control(os, node.children[i]);
      }
      os << ")";
      return;
    case ControlNode::Kind::RepeatIf:
      os << "repeat_if(" << node.event << ", ";
      write_control(os, node.children.front());
      os << ")";
      return;
  }
}

}  // namespace

std::string serialize(const Document& doc) {
  std::ostringstream os;
  const Model& model = doc.model;
  os << "model " << model.name() << "\n";

  if (!model.guards().empty()) {
    os << "\n";
    for (const auto& g : model.guards()) os << "guard " << g << "\n";
  }

  auto roots = model.root_spheres();
  std::sort(roots.begin(), roots.end(),
            [](const Sphere* a, const Sphere* b) { return a->name < b->name; });
  for (const auto* s : roots) {
    os << "\n";
    write_sphere(os, model, *s, 0);
  }

  if (!model.flows().empty()) {
    std::vector<FlowArc> flows = model.flows();
    std::sort(flows.begin(), flows.end());
    os << "\n";
    for (const auto& f : flows) os << "flow " << f.from.path() << " -> " << f.to.path() << "\n";
  }
  if (!model.triggers().empty()) {
    std::vector<TriggerArc> triggers = model.triggers();
    std::sort(triggers.begin(), triggers.end());
    os << "\n";
    for (const auto& t : triggers) {
      os << "trigger " << t.from.path() << " ~> " << t.to.path();
      if (t.guard) os << " guard " << *t.guard;
      os << "\n";
    }
  }

  for (const auto& e : doc.events) {
    os << "\nevent " << e.name;
    if (e.parent) os << " within " << *e.parent;
    os << " region {\n";
    std::vector<std::string> items;
    for (const auto& s : e.region.stages) items.push_back(s.path());
    for (const auto& f : e.region.flows) items.push_back("flow " + f.from.path() + " -> " + f.to.path());
    for (const auto& t : e.region.triggers) {
      items.push_back("trigger " + t.from.path() + " ~> " + t.to.path());
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
      os << "  " << items[i] << (i + 1 < items.size() ? ",\n" : "\n");
    }
    os << "}\n";
  }

  if (!doc.controls.empty()) {
    os << "\n";
    for (const auto& c : doc.controls) {
      os << "control " << c.name << " = ";
      write_control(os, c.root);
      os << "\n";
    }
  }
  if (!doc.constraints.empty()) {
    os << "\n";
    for (const auto& con : doc.constraints) {
      if (const auto* d = std::get_if<Deadline>(&con)) {
        os << "constraint deadline {" << d->first << ", " << d->last << "} < " << d->bound << "\n";
      } else {
        const auto& in = std::get<Inhibit>(con);
        os << "constraint inhibit " << in.target.path() << " when " << in.guard << "\n";
      }
    }
  }
  return os.str();
}

bool structurally_equal(const Document& a, const Document& b) {
  return structurally_equal(a.model, b.model) && a.events == b.events && a.controls == b.controls &&
         a.constraints == b.constraints;
}

}  // namespace fm
