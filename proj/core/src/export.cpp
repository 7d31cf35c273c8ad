#include "fm/export.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace fm {
namespace {

std::string quote(std::string_view s) { return "\"" + std::string(s) + "\""; }

class DotWriter {
 public:
  DotWriter(const Model& model, const Overlay* overlay) : model_(model), overlay_(overlay) {}

  std::string run() {
    os_ << "digraph " << quote(model_.name()) << " {\n";
    os_ << "  rankdir=LR;\n";
    os_ << "  node [shape=plaintext, fontname=\"Helvetica\"];\n";
    os_ << "  edge [fontname=\"Helvetica\"];\n";
    auto roots = model_.root_spheres();
    sort_by_name(roots);
    for (const auto* s : roots) sphere(*s, 1);

    auto flows = model_.flows();
    std::sort(flows.begin(), flows.end());
    for (const auto& f : flows) os_ << "  " << endpoint(f.from) << " -> " << endpoint(f.to) << ";\n";
    auto triggers = model_.triggers();
    std::sort(triggers.begin(), triggers.end());
    for (const auto& t : triggers) {
      os_ << "  " << endpoint(t.from) << " -> " << endpoint(t.to) << " [style=dashed";
      if (t.guard) os_ << ", label=" << quote(*t.guard);
      os_ << "];\n";
    }
    if (overlay_ != nullptr && !overlay_->entries.empty()) legend();
    os_ << "}\n";
    return os_.str();
  }

 private:
  template <typename T>
  static void sort_by_name(std::vector<const T*>& items) {
    std::sort(items.begin(), items.end(), [](const T* a, const T* b) { return a->name < b->name; });
  }

  static std::string endpoint(const StageRef& s) {
    return quote(s.machine) + ":" + quote(keyword(s.kind));
  }

  void sphere(const Sphere& s, int depth) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    os_ << pad << "subgraph " << quote("cluster_" + s.path) << " {\n";
    os_ << pad << "  label=" << quote(s.name) << ";\n";
    std::vector<const Machine*> machines;
    for (const auto& p : s.machines) machines.push_back(model_.find_machine(p));
    sort_by_name(machines);
    for (const auto* m : machines) machine(*m, pad + "  ");
    std::vector<const Sphere*> children;
    for (const auto& p : s.children) children.push_back(model_.find_sphere(p));
    sort_by_name(children);
    for (const auto* c : children) sphere(*c, depth + 1);
    os_ << pad << "}\n";
  }

  void machine(const Machine& m, const std::string& pad) {
    auto kinds = m.stages;
    std::sort(kinds.begin(), kinds.end());
    os_ << pad << quote(m.path()) << " [label=<<TABLE BORDER=\"0\" CELLBORDER=\"1\" CELLSPACING=\"0\">";
    os_ << "<TR><TD><B>" << m.name << "</B> : " << m.thing_label << "</TD></TR>";
    for (auto k : kinds) {
      const StageRef ref{m.path(), k};
      os_ << "<TR><TD PORT=\"" << keyword(k) << "\"";
      if (overlay_ != nullptr) {
        if (auto color = overlay_->fill(ref)) os_ << " BGCOLOR=\"" << *color << "\"";
      }
      os_ << ">" << keyword(k);
      if (m.has_storage(k)) os_ << " [storage]";
      os_ << "</TD></TR>";
    }
    os_ << "</TABLE>>];\n";
  }

  void legend() {
    os_ << "  subgraph \"cluster_legend\" {\n    label=\"events\";\n";
    os_ << "    \"legend\" [label=<<TABLE BORDER=\"0\" CELLBORDER=\"1\" CELLSPACING=\"0\">";
    for (const auto& e : overlay_->entries) {
      os_ << "<TR><TD BGCOLOR=\"" << e.color << "\">" << e.event << " (" << e.legend << ")</TD></TR>";
    }
    os_ << "<TR><TD BGCOLOR=\"" << kSharedColor << "\">shared</TD></TR>";
    os_ << "</TABLE>>];\n  }\n";
  }

  const Model& model_;
  const Overlay* overlay_;
  std::ostringstream os_;
};

}  // namespace

std::optional<std::string> Overlay::fill(const StageRef& stage) const {
  const OverlayEntry* hit = nullptr;
  for (const auto& e : entries) {
    if (!e.region.stages.contains(stage)) continue;
    if (hit != nullptr) return std::string(kSharedColor);
    hit = &e;
  }
  if (hit == nullptr) return std::nullopt;
  return hit->color;
}

Overlay make_overlay(const std::vector<EventDef>& events, const std::vector<std::string>& names) {
  std::vector<std::string> chosen = names;
  if (chosen.empty()) {
    for (const auto& e : events) {
      if (!e.parent) chosen.push_back(e.name);
    }
  }
  Overlay overlay;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    if (find_event(events, chosen[i]) == nullptr) {
      throw std::invalid_argument("unknown event '" + chosen[i] + "'");
    }
    const auto color = std::string(kPalette[i % kPalette.size()]);
    const auto round = i / kPalette.size();
    overlay.entries.push_back(OverlayEntry{chosen[i], color,
                                           round == 0 ? color : color + std::to_string(round + 1),
                                           effective_region(events, chosen[i])});
  }
  return overlay;
}

std::string to_dot(const Model& model, const Overlay* overlay) { return DotWriter(model, overlay).run(); }

std::string render_trace(const Trace& trace) {
  std::ostringstream os;
  for (const auto& r : trace.records) {
    os << "tick=" << r.tick << " kind=" << to_string(r.kind);
    if (r.token) os << " #" << *r.token;
    for (const auto& s : r.subjects) os << " " << s;
    os << "\n";
  }
  os << "end tick=" << trace.end_tick << " reason=" << to_string(trace.reason) << "\n";
  return os.str();
}

std::string render_diagnostics(const std::vector<Diagnostic>& diagnostics, const std::string& origin) {
  std::string out;
  for (const auto& d : diagnostics) out += d.format(origin) + "\n";
  return out;
}

}  // namespace fm
