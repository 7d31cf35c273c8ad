#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fm {

// Canonical order is the serialization order.
enum class StageKind : std::uint8_t {
  Create,
  Receive,
  Arrive,
  Accept,
  Process,
  Release,
  Transfer,
};

inline constexpr std::array<StageKind, 7> kAllStageKinds = {
    StageKind::Create,  StageKind::Receive, StageKind::Arrive,   StageKind::Accept,
    StageKind::Process, StageKind::Release, StageKind::Transfer,
};

std::string_view keyword(StageKind kind);
std::optional<StageKind> stage_kind_from_keyword(std::string_view word);

// Letters, digits and underscore, starting with a letter, and not a DSL keyword.
bool is_valid_identifier(std::string_view text);
bool is_keyword(std::string_view text);

// A stage addressed by its owning machine's qualified path ("Sphere.Sub.machine").
struct StageRef {
  std::string machine;
  StageKind kind = StageKind::Create;

  std::string path() const;

  // Ordered by full path text so that sorting matches the rendered form.
  friend bool operator==(const StageRef& a, const StageRef& b) {
    return a.kind == b.kind && a.machine == b.machine;
  }
  friend std::strong_ordering operator<=>(const StageRef& a, const StageRef& b) {
    return a.path() <=> b.path();
  }
};

// Parses "Sphere.machine.kind"; nullopt when the last component is not a kind
// or fewer than three components are present.
std::optional<StageRef> parse_stage_path(std::string_view path);

struct Sphere {
  std::string name;
  std::string path;
  std::optional<std::string> parent;
  std::vector<std::string> children;  // child sphere paths
  std::vector<std::string> machines;  // machine paths
  std::set<std::string> things;       // thing names declared in this sphere
};

struct Machine {
  std::string name;
  std::string sphere;
  std::string thing_label;
  std::vector<StageKind> stages;
  std::set<StageKind> storage;

  std::string path() const { return sphere + "." + name; }
  bool has_stage(StageKind kind) const;
  bool has_storage(StageKind kind) const { return storage.contains(kind); }
};

struct FlowArc {
  StageRef from;
  StageRef to;

  friend bool operator==(const FlowArc&, const FlowArc&) = default;
  friend auto operator<=>(const FlowArc&, const FlowArc&) = default;
};

struct TriggerArc {
  StageRef from;
  StageRef to;
  std::optional<std::string> guard;

  friend bool operator==(const TriggerArc&, const TriggerArc&) = default;
  friend auto operator<=>(const TriggerArc&, const TriggerArc&) = default;
};

enum class ModelErrc {
  InvalidIdentifier,
  DuplicateSphere,
  UnknownParent,
  UnknownSphere,
  DuplicateMachine,
  EmptyStageSet,
  DuplicateStage,
  MixedReceive,
  StorageWithoutStage,
  UnknownStage,
  IllegalAdjacency,
  DuplicateArc,
  IllegalTriggerTarget,
  UnknownGuard,
  DuplicateGuard,
};

std::string_view to_string(ModelErrc code);

class ModelError : public std::runtime_error {
 public:
  ModelError(ModelErrc code, const std::string& message);
  ModelError(ModelErrc code, const std::string& message, StageKind from, StageKind to);

  ModelErrc code() const noexcept { return code_; }
  // Set for IllegalAdjacency.
  const std::optional<std::pair<StageKind, StageKind>>& kind_pair() const noexcept {
    return kind_pair_;
  }

 private:
  ModelErrc code_;
  std::optional<std::pair<StageKind, StageKind>> kind_pair_;
};

// Stage kinds a flow arc may reach from `kind`. Storage annexes are not
// stage kinds and are handled by Machine::storage.
std::set<StageKind> legal_successors(StageKind kind, bool same_machine);
bool is_legal_flow(StageKind from, StageKind to, bool same_machine);
bool is_trigger_target(StageKind kind);

// The static script: spheres, machines and the arcs between their stages.
// The add_* members enforce every construction invariant and throw ModelError;
// the unchecked_* members exist so that whole-model validation can be
// exercised on deliberately broken models.
class Model {
 public:
  explicit Model(std::string name);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Sphere>& spheres() const noexcept { return spheres_; }
  const std::vector<Machine>& machines() const noexcept { return machines_; }
  const std::vector<FlowArc>& flows() const noexcept { return flows_; }
  const std::vector<TriggerArc>& triggers() const noexcept { return triggers_; }
  const std::set<std::string>& guards() const noexcept { return guards_; }

  std::vector<const Sphere*> root_spheres() const;
  const Sphere* find_sphere(std::string_view path) const;
  const Machine* find_machine(std::string_view path) const;
  bool has_stage(const StageRef& stage) const;
  std::vector<StageRef> stages() const;  // sorted by path

  const FlowArc* find_flow(const StageRef& from, const StageRef& to) const;
  const TriggerArc* find_trigger(const StageRef& from, const StageRef& to) const;

  Model& add_sphere(std::string_view path);
  Model& add_thing(std::string_view sphere, std::string_view thing);
  Model& add_machine(std::string_view sphere, std::string_view name, std::string_view thing_label,
                     const std::vector<StageKind>& stage_kinds,
                     const std::set<StageKind>& storage = {});
  Model& add_flow(const StageRef& from, const StageRef& to);
  Model& add_trigger(const StageRef& from, const StageRef& to,
                     std::optional<std::string> guard = std::nullopt);
  Model& declare_guard(std::string_view guard);

  void unchecked_add_flow(FlowArc arc) { flows_.push_back(std::move(arc)); }
  void unchecked_add_trigger(TriggerArc arc) { triggers_.push_back(std::move(arc)); }
  void unchecked_set_stages(std::string_view machine, std::vector<StageKind> stages);
  void unchecked_remove_guard(std::string_view guard) { guards_.erase(std::string(guard)); }

 private:
  Machine* find_machine_mut(std::string_view path);
  Sphere* find_sphere_mut(std::string_view path);

  std::string name_;
  std::vector<Sphere> spheres_;
  std::vector<Machine> machines_;
  std::vector<FlowArc> flows_;
  std::vector<TriggerArc> triggers_;
  std::set<std::string> guards_;
};

Model new_model(std::string_view name);

// Equality ignoring authoring order of spheres, machines, stages and arcs.
bool structurally_equal(const Model& a, const Model& b);

}  // namespace fm
