#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "fm/dsl.hpp"
#include "fm/events.hpp"
#include "fm/export.hpp"
#include "fm/scenario.hpp"
#include "fm/simulate.hpp"
#include "fm/validate.hpp"

namespace fm::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string file;
  std::string control;
  std::string scenario;
  bool free_run = false;
  bool overlay = false;
  bool canonical = false;
  bool no_color = false;
  std::vector<std::string> events;
};

struct Failure {
  int code;
};

class Session {
 public:
  Session(const Options& opt, std::ostream& out, std::ostream& err, Terminal terminal)
      : opt_(opt), out_(out), err_(err), color_(terminal.color && !opt.no_color) {}

  int parse() {
    const auto doc = load(false);
    if (opt_.canonical) out_ << serialize(doc);
    return kOk;
  }

  int validate() {
    load(true);
    return kOk;
  }

  int events() {
    const auto doc = load(true);
    out_ << "events:\n";
    for (const auto& e : doc.events) {
      out_ << "  " << e.name;
      if (e.parent) out_ << " within " << *e.parent;
      out_ << " " << summary(e.region) << "\n";
    }
    out_ << "candidates:\n";
    const auto candidates = eventize(doc.model);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      out_ << "  " << candidate_name(i) << " " << summary(candidates[i]) << ":";
      for (const auto& s : candidates[i].stages) out_ << " " << s.path();
      out_ << "\n";
    }
    return kOk;
  }

  int export_dot() {
    const auto doc = load(true);
    if (!opt_.overlay && opt_.events.empty()) {
      out_ << to_dot(doc.model);
      return kOk;
    }
    try {
      const auto overlay = make_overlay(doc.events, opt_.events);
      out_ << to_dot(doc.model, &overlay);
    } catch (const std::invalid_argument& e) {
      err_ << opt_.file << ": " << e.what() << "\n";
      return kUsage;
    }
    return kOk;
  }

  int simulate() {
    const auto doc = load(true);
    const auto* program = pick_program(doc, true);
    const auto scn = load_scenario(doc.model);
    const auto trace = fm::simulate(doc.model, doc.events, program, scn, doc.constraints);
    out_ << render_trace(trace);
    return trace.reason == StopReason::TickLimit ? kTickLimit : kOk;
  }

  int check() {
    const auto doc = load(true);
    const auto* program = pick_program(doc, false);
    const auto scn = load_scenario(doc.model);
    const auto trace = fm::simulate(doc.model, doc.events, program, scn, doc.constraints);
    bool failed = false;
    for (const auto& v : check_constraints(trace, doc.constraints, &doc.events)) {
      failed |= v.verdict == Verdict::Fail;
      out_ << verdict_line(v) << "\n";
    }
    for (const auto& w : check_windows(trace, doc.events)) {
      failed |= w.verdict == Verdict::Fail;
      out_ << "window " << w.event << ": " << paint(w.verdict) << "\n";
    }
    if (trace.reason == StopReason::TickLimit) {
      err_ << opt_.file << ": run stopped at the tick limit (" << scn.tick_limit << ")\n";
      return kTickLimit;
    }
    return failed ? kConstraintViolation : kOk;
  }

 private:
  static std::string summary(const Region& r) {
    std::ostringstream os;
    os << "(" << r.stages.size() << " stages, " << r.flows.size() << " flows, " << r.triggers.size()
       << " triggers)";
    return os.str();
  }

  std::string paint(Verdict v) const {
    const char* word = v == Verdict::Pass ? "PASS" : "FAIL";
    if (!color_) return word;
    return std::string(v == Verdict::Pass ? "\033[32m" : "\033[31m") + word + "\033[0m";
  }

  std::string verdict_line(const ConstraintVerdict& v) const {
    std::ostringstream os;
    os << describe(v.constraint) << ": " << paint(v.verdict);
    if (const auto* d = std::get_if<Deadline>(&v.constraint)) {
      if (v.missing) {
        os << " (t=" << d->bound << ", missing event mark)";
      } else if (v.measured) {
        os << " (t=" << d->bound << ", measured=" << *v.measured << ")";
      }
    } else if (!v.witnesses.empty()) {
      os << " (" << v.witnesses.size() << " hops)";
    }
    return os.str();
  }

  static std::optional<std::string> slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  Document load(bool run_validator) {
    auto text = slurp(opt_.file);
    if (!text) {
      err_ << opt_.file << ": cannot read file\n";
      throw Failure{kUsage};
    }
    auto result = fm::parse(SourceText{*text, opt_.file});
    err_ << render_diagnostics(result.diagnostics, opt_.file);
    if (!result.ok()) throw Failure{kDiagnostics};
    if (run_validator) {
      const auto diagnostics = fm::validate(*result.document);
      err_ << render_diagnostics(diagnostics, opt_.file);
      if (has_errors(diagnostics)) throw Failure{kDiagnostics};
    }
    return std::move(*result.document);
  }

  // An explicit --control wins; --free-run forces no program; otherwise
  // `check` falls back to the first declared control.
  const ControlProgram* pick_program(const Document& doc, bool require_choice) {
    if (opt_.free_run) return nullptr;
    if (!opt_.control.empty()) {
      const auto* p = find_program(doc.controls, opt_.control);
      if (p == nullptr) {
        err_ << opt_.file << ": no control program named '" << opt_.control << "'\n";
        throw Failure{kUsage};
      }
      return p;
    }
    if (require_choice) {
      err_ << "simulate: either --control <name> or --free-run is required\n";
      throw Failure{kUsage};
    }
    return doc.controls.empty() ? nullptr : &doc.controls.front();
  }

  Scenario load_scenario(const Model& model) {
    if (opt_.scenario.empty()) return Scenario{};
    fs::path path = opt_.scenario;
    if (!fs::exists(path)) path = fs::path(opt_.file).parent_path() / (opt_.scenario + ".scn");
    auto text = slurp(path);
    if (!text) {
      err_ << opt_.scenario << ": cannot read scenario\n";
      throw Failure{kUsage};
    }
    auto result = parse_scenario(*text, model);
    err_ << render_diagnostics(result.diagnostics, path.string());
    if (!result.ok()) throw Failure{kDiagnostics};
    return std::move(*result.scenario);
  }

  const Options& opt_;
  std::ostream& out_;
  std::ostream& err_;
  bool color_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, Terminal terminal) {
  CLI::App app{"Flowthing machine toolkit", "fmc"};
  app.require_subcommand(1);
  Options opt;
  app.add_flag("--no-color", opt.no_color, "Never color output");

  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("file", opt.file, "Model file (.fm)")->required();
    return sub;
  };
  auto* parse_cmd = add("parse", "Parse a model and report syntax diagnostics");
  parse_cmd->add_flag("--canonical", opt.canonical, "Print the canonical serialization");
  auto* validate_cmd = add("validate", "Parse and validate a model");
  auto* events_cmd = add("events", "List declared events and eventize candidates");
  auto* export_cmd = add("export", "Print the model as Graphviz DOT");
  export_cmd->add_flag("--events", opt.overlay, "Color top-level event regions");
  export_cmd->add_option("--event", opt.events, "Color the named events (repeatable)");
  auto* simulate_cmd = add("simulate", "Run the model and print its trace");
  simulate_cmd->add_option("--control", opt.control, "Control program to run");
  simulate_cmd->add_option("--scenario", opt.scenario, "Scenario file or name")->required();
  simulate_cmd->add_flag("--free-run", opt.free_run, "Run without a control program");
  auto* check_cmd = add("check", "Run the model and evaluate its constraints");
  check_cmd->add_option("--scenario", opt.scenario, "Scenario file or name")->required();
  check_cmd->add_option("--control", opt.control, "Control program to run (default: the first)");
  check_cmd->add_flag("--free-run", opt.free_run, "Run without a control program");
  for (auto* sub : app.get_subcommands({})) sub->add_flag("--no-color", opt.no_color, "Never color output");

  std::vector<const char*> argv{"fmc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "fmc: " << e.what() << "\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kUsage;
  }

  Session session(opt, out, err, terminal);
  try {
    if (parse_cmd->parsed()) return session.parse();
    if (validate_cmd->parsed()) return session.validate();
    if (events_cmd->parsed()) return session.events();
    if (export_cmd->parsed()) return session.export_dot();
    if (simulate_cmd->parsed()) return session.simulate();
    if (check_cmd->parsed()) return session.check();
  } catch (const Failure& f) {
    return f.code;
  }
  return kUsage;
}

}  // namespace fm::cli
