#include "fm/control.hpp"

#include <algorithm>

namespace fm {

ControlNode ControlNode::run(std::string event) { return ControlNode{Kind::Run, std::move(event), {}}; }

ControlNode ControlNode::seq(std::vector<ControlNode> children) {
  return ControlNode{Kind::Seq, {}, std::move(children)};
}

ControlNode ControlNode::par(std::vector<ControlNode> children) {
  return ControlNode{Kind::Par, {}, std::move(children)};
}

ControlNode ControlNode::repeat_if(std::string event, ControlNode body) {
  std::vector<ControlNode> kids;
  kids.push_back(std::move(body));
  return ControlNode{Kind::RepeatIf, std::move(event), std::move(kids)};
}

namespace {

void collect(const ControlNode& node, std::vector<std::string>& out) {
  if (!node.event.empty() && std::find(out.begin(), out.end(), node.event) == out.end()) {
    out.push_back(node.event);
  }
  for (const auto& c : node.children) collect(c, out);
}

}  // namespace

std::vector<std::string> referenced_events(const ControlNode& node) {
  std::vector<std::string> out;
  collect(node, out);
  return out;
}

const ControlProgram* find_program(const std::vector<ControlProgram>& programs,
                                   const std::string& name) {
  auto it = std::find_if(programs.begin(), programs.end(),
                         [&](const ControlProgram& p) { return p.name == name; });
  return it == programs.end() ? nullptr : &*it;
}

std::string describe(const Constraint& constraint) {
  if (const auto* d = std::get_if<Deadline>(&constraint)) {
    return "deadline {" + d->first + ", " + d->last + "} < t";
  }
  const auto& i = std::get<Inhibit>(constraint);
  return "inhibit " + i.target.path() + " when " + i.guard;
}

}  // namespace fm
