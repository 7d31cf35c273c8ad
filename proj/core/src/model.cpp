#include "fm/model.hpp"

#include <algorithm>
#include <utility>
#include <map>
#include <tuple>

namespace fm {
namespace {

constexpr std::array<std::string_view, 23> kKeywords = {
    "model",   "sphere",    "machine", "carries",   "stages",  "storage", "thing",   "flow",
    "trigger", "guard",     "event",   "within",    "region",  "control", "seq",     "par",
    "repeat_if", "constraint", "deadline", "inhibit", "when",   "create",  "process",
};

constexpr std::array<std::string_view, 5> kMoreKeywords = {"release", "transfer", "arrive", "accept",
                                                           "receive"};

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string kind_list(const std::vector<StageKind>& kinds) {
  std::string out;
  for (auto k : kinds) {
    if (!out.empty()) out += ", ";
    out += keyword(k);
  }
  return out;
}

}  // namespace

std::string_view keyword(StageKind kind) {
  switch (kind) {
    case StageKind::Create: return "create";
    case StageKind::Receive: return "receive";
    case StageKind::Arrive: return "arrive";
    case StageKind::Accept: return "accept";
    case StageKind::Process: return "process";
    case StageKind::Release: return "release";
    case StageKind::Transfer: return "transfer";
  }
  return "?";
}

std::optional<StageKind> stage_kind_from_keyword(std::string_view word) {
  for (auto k : kAllStageKinds) {
    if (keyword(k) == word) return k;
  }
  return std::nullopt;
}

bool is_keyword(std::string_view text) {
  return std::find(kKeywords.begin(), kKeywords.end(), text) != kKeywords.end() ||
         std::find(kMoreKeywords.begin(), kMoreKeywords.end(), text) != kMoreKeywords.end();
}

bool is_valid_identifier(std::string_view text) {
  if (text.empty() || !(is_alpha(text.front()) || text.front() == '_')) return false;
  for (char c : text) {
    if (!is_alpha(c) && !is_digit(c) && c != '_') return false;
  }
  return !is_keyword(text);
}

std::string StageRef::path() const {
  std::string out = machine;
  out += '.';
  out += keyword(kind);
  return out;
}

std::optional<StageRef> parse_stage_path(std::string_view path) {
  auto dot = path.rfind('.');
  if (dot == std::string_view::npos) return std::nullopt;
  auto kind = stage_kind_from_keyword(path.substr(dot + 1));
  auto machine = path.substr(0, dot);
  if (!kind || machine.find('.') == std::string_view::npos) return std::nullopt;
  return StageRef{std::string(machine), *kind};
}

bool Machine::has_stage(StageKind kind) const {
  return std::find(stages.begin(), stages.end(), kind) != stages.end();
}

std::string_view to_string(ModelErrc code) {
  switch (code) {
    case ModelErrc::InvalidIdentifier: return "InvalidIdentifier";
    case ModelErrc::DuplicateSphere: return "DuplicateSphere";
    case ModelErrc::UnknownParent: return "UnknownParent";
    case ModelErrc::UnknownSphere: return "UnknownSphere";
    case ModelErrc::DuplicateMachine: return "DuplicateMachine";
    case ModelErrc::EmptyStageSet: return "EmptyStageSet";
    case ModelErrc::DuplicateStage: return "DuplicateStage";
    case ModelErrc::MixedReceive: return "MixedReceive";
    case ModelErrc::StorageWithoutStage: return "StorageWithoutStage";
    case ModelErrc::UnknownStage: return "UnknownStage";
    case ModelErrc::IllegalAdjacency: return "IllegalAdjacency";
    case ModelErrc::DuplicateArc: return "DuplicateArc";
    case ModelErrc::IllegalTriggerTarget: return "IllegalTriggerTarget";
    case ModelErrc::UnknownGuard: return "UnknownGuard";
    case ModelErrc::DuplicateGuard: return "DuplicateGuard";
  }
  return "?";
}

ModelError::ModelError(ModelErrc code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

ModelError::ModelError(ModelErrc code, const std::string& message, StageKind from, StageKind to)
    : std::runtime_error(message), code_(code), kind_pair_(std::make_pair(from, to)) {}

std::set<StageKind> legal_successors(StageKind kind, bool same_machine) {
  using K = StageKind;
  if (!same_machine) {
    if (kind == K::Transfer) return {K::Transfer, K::Arrive, K::Receive};
    return {};
  }
  switch (kind) {
    case K::Create:
    case K::Accept:
    case K::Receive: return {K::Process, K::Release};
    case K::Arrive: return {K::Accept};
    case K::Process: return {K::Release};
    case K::Release: return {K::Transfer};
    case K::Transfer: return {};
  }
  return {};
}

bool is_legal_flow(StageKind from, StageKind to, bool same_machine) {
  return legal_successors(from, same_machine).contains(to);
}

bool is_trigger_target(StageKind kind) {
  return kind == StageKind::Create || kind == StageKind::Release || kind == StageKind::Process;
}

Model::Model(std::string name) : name_(std::move(name)) {
  if (!is_valid_identifier(name_)) {
    throw ModelError(ModelErrc::InvalidIdentifier, "invalid identifier '" + name_ + "'");
  }
}

Model new_model(std::string_view name) { return Model(std::string(name)); }

std::vector<const Sphere*> Model::root_spheres() const {
  std::vector<const Sphere*> out;
  for (const auto& s : spheres_) {
    if (!s.parent) out.push_back(&s);
  }
  return out;
}

const Sphere* Model::find_sphere(std::string_view path) const {
  for (const auto& s : spheres_) {
    if (s.path == path) return &s;
  }
  return nullptr;
}

Sphere* Model::find_sphere_mut(std::string_view path) {
  return const_cast<Sphere*>(std::as_const(*this).find_sphere(path));
}

const Machine* Model::find_machine(std::string_view path) const {
  for (const auto& m : machines_) {
    if (m.sphere.size() + 1 + m.name.size() == path.size() && m.path() == path) return &m;
  }
  return nullptr;
}

Machine* Model::find_machine_mut(std::string_view path) {
  return const_cast<Machine*>(std::as_const(*this).find_machine(path));
}

bool Model::has_stage(const StageRef& stage) const {
  const auto* m = find_machine(stage.machine);
  return m != nullptr && m->has_stage(stage.kind);
}

std::vector<StageRef> Model::stages() const {
  std::vector<StageRef> out;
  for (const auto& m : machines_) {
    for (auto k : m.stages) out.push_back({m.path(), k});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const FlowArc* Model::find_flow(const StageRef& from, const StageRef& to) const {
  for (const auto& a : flows_) {
    if (a.from == from && a.to == to) return &a;
  }
  return nullptr;
}

const TriggerArc* Model::find_trigger(const StageRef& from, const StageRef& to) const {
  for (const auto& a : triggers_) {
    if (a.from == from && a.to == to) return &a;
  }
  return nullptr;
}

Model& Model::add_sphere(std::string_view path) {
  std::string full(path);
  auto dot = full.rfind('.');
  std::string name = dot == std::string::npos ? full : full.substr(dot + 1);
  std::optional<std::string> parent;
  if (dot != std::string::npos) parent = full.substr(0, dot);

  if (!is_valid_identifier(name)) {
    throw ModelError(ModelErrc::InvalidIdentifier, "invalid sphere name '" + name + "'");
  }
  if (find_sphere(full) != nullptr) {
    throw ModelError(ModelErrc::DuplicateSphere, "duplicate sphere '" + full + "'");
  }
  // A machine path may not be reused as a sphere path; stage paths would collide.
  if (find_machine(full) != nullptr) {
    throw ModelError(ModelErrc::DuplicateSphere, "'" + full + "' already names a machine");
  }
  if (parent) {
    auto* p = find_sphere_mut(*parent);
    if (p == nullptr) {
      throw ModelError(ModelErrc::UnknownParent, "unknown parent sphere '" + *parent + "'");
    }
    p->children.push_back(full);
  }
  spheres_.push_back(Sphere{std::move(name), full, std::move(parent), {}, {}, {}});
  return *this;
}

Model& Model::add_thing(std::string_view sphere, std::string_view thing) {
  auto* s = find_sphere_mut(sphere);
  if (s == nullptr) {
    throw ModelError(ModelErrc::UnknownSphere, "unknown sphere '" + std::string(sphere) + "'");
  }
  if (!is_valid_identifier(thing)) {
    throw ModelError(ModelErrc::InvalidIdentifier, "invalid thing name '" + std::string(thing) + "'");
  }
  s->things.insert(std::string(thing));
  return *this;
}

Model& Model::add_machine(std::string_view sphere, std::string_view name,
                          std::string_view thing_label, const std::vector<StageKind>& stage_kinds,
                          const std::set<StageKind>& storage) {
  auto* s = find_sphere_mut(sphere);
  if (s == nullptr) {
    throw ModelError(ModelErrc::UnknownSphere, "unknown sphere '" + std::string(sphere) + "'");
  }
  if (!is_valid_identifier(name)) {
    throw ModelError(ModelErrc::InvalidIdentifier, "invalid machine name '" + std::string(name) + "'");
  }
  if (!is_valid_identifier(thing_label)) {
    throw ModelError(ModelErrc::InvalidIdentifier,
                     "invalid thing label '" + std::string(thing_label) + "'");
  }
  std::string path = std::string(sphere) + "." + std::string(name);
  if (find_machine(path) != nullptr || find_sphere(path) != nullptr) {
    throw ModelError(ModelErrc::DuplicateMachine, "duplicate machine '" + path + "'");
  }
  if (stage_kinds.empty()) {
    throw ModelError(ModelErrc::EmptyStageSet, "machine '" + path + "' has no stages");
  }
  std::set<StageKind> seen;
  for (auto k : stage_kinds) {
    if (!seen.insert(k).second) {
      throw ModelError(ModelErrc::DuplicateStage, "machine '" + path + "' lists stage '" +
                                                      std::string(keyword(k)) + "' twice");
    }
  }
  if (seen.contains(StageKind::Receive) &&
      (seen.contains(StageKind::Arrive) || seen.contains(StageKind::Accept))) {
    throw ModelError(ModelErrc::MixedReceive,
                     "machine '" + path + "' mixes receive with arrive/accept: " + kind_list(stage_kinds));
  }
  for (auto k : storage) {
    if (!seen.contains(k)) {
      throw ModelError(ModelErrc::StorageWithoutStage,
                       "machine '" + path + "' attaches storage to missing stage '" +
                           std::string(keyword(k)) + "'");
    }
  }
  s->machines.push_back(path);
  machines_.push_back(Machine{std::string(name), std::string(sphere), std::string(thing_label),
                              stage_kinds, storage});
  return *this;
}

Model& Model::add_flow(const StageRef& from, const StageRef& to) {
  for (const auto* ref : {&from, &to}) {
    if (!has_stage(*ref)) {
      throw ModelError(ModelErrc::UnknownStage, "unknown stage '" + ref->path() + "'");
    }
  }
  const bool same = from.machine == to.machine;
  if (to.kind == StageKind::Create) {
    throw ModelError(ModelErrc::IllegalAdjacency,
                     "flow into create stage '" + to.path() + "'", from.kind, to.kind);
  }
  if (!same && from.kind != StageKind::Transfer) {
    throw ModelError(ModelErrc::IllegalAdjacency,
                     "cross-machine flow must leave from transfer, not '" + from.path() + "'",
                     from.kind, to.kind);
  }
  if (!is_legal_flow(from.kind, to.kind, same)) {
    throw ModelError(ModelErrc::IllegalAdjacency,
                     "illegal adjacency " + std::string(keyword(from.kind)) + " -> " +
                         std::string(keyword(to.kind)) + (same ? " within" : " across") +
                         " machines",
                     from.kind, to.kind);
  }
  if (find_flow(from, to) != nullptr) {
    throw ModelError(ModelErrc::DuplicateArc,
                     "duplicate flow " + from.path() + " -> " + to.path());
  }
  flows_.push_back(FlowArc{from, to});
  return *this;
}

Model& Model::add_trigger(const StageRef& from, const StageRef& to, std::optional<std::string> guard) {
  for (const auto* ref : {&from, &to}) {
    if (!has_stage(*ref)) {
      throw ModelError(ModelErrc::UnknownStage, "unknown stage '" + ref->path() + "'");
    }
  }
  if (!is_trigger_target(to.kind)) {
    throw ModelError(ModelErrc::IllegalTriggerTarget,
                     "trigger target '" + to.path() + "' must be create, release or process");
  }
  if (guard && !guards_.contains(*guard)) {
    throw ModelError(ModelErrc::UnknownGuard, "undeclared guard '" + *guard + "'");
  }
  if (find_trigger(from, to) != nullptr) {
    throw ModelError(ModelErrc::DuplicateArc,
                     "duplicate trigger " + from.path() + " ~> " + to.path());
  }
  triggers_.push_back(TriggerArc{from, to, std::move(guard)});
  return *this;
}

Model& Model::declare_guard(std::string_view guard) {
  if (!is_valid_identifier(guard)) {
    throw ModelError(ModelErrc::InvalidIdentifier, "invalid guard name '" + std::string(guard) + "'");
  }
  if (!guards_.insert(std::string(guard)).second) {
    throw ModelError(ModelErrc::DuplicateGuard, "duplicate guard '" + std::string(guard) + "'");
  }
  return *this;
}

void Model::unchecked_set_stages(std::string_view machine, std::vector<StageKind> stages) {
  auto* m = find_machine_mut(machine);
  if (m == nullptr) {
    throw ModelError(ModelErrc::UnknownStage, "unknown machine '" + std::string(machine) + "'");
  }
  m->stages = std::move(stages);
}

namespace {

using SphereKey = std::tuple<std::string, std::optional<std::string>, std::set<std::string>>;
using MachineKey = std::tuple<std::string, std::string, std::multiset<StageKind>, std::set<StageKind>>;

std::map<std::string, SphereKey> sphere_keys(const Model& m) {
  std::map<std::string, SphereKey> out;
  for (const auto& s : m.spheres()) out[s.path] = {s.name, s.parent, s.things};
  return out;
}

std::map<std::string, MachineKey> machine_keys(const Model& m) {
  std::map<std::string, MachineKey> out;
  for (const auto& mc : m.machines()) {
    out[mc.path()] = {mc.sphere, mc.thing_label,
                      std::multiset<StageKind>(mc.stages.begin(), mc.stages.end()), mc.storage};
  }
  return out;
}

template <typename Arc>
std::multiset<Arc> as_multiset(const std::vector<Arc>& arcs) {
  return {arcs.begin(), arcs.end()};
}

}  // namespace

bool structurally_equal(const Model& a, const Model& b) {
  return a.name() == b.name() && a.guards() == b.guards() &&
         a.spheres().size() == b.spheres().size() && sphere_keys(a) == sphere_keys(b) &&
         a.machines().size() == b.machines().size() && machine_keys(a) == machine_keys(b) &&
         as_multiset(a.flows()) == as_multiset(b.flows()) &&
         as_multiset(a.triggers()) == as_multiset(b.triggers());
}

}  // namespace fm
