#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fm/control.hpp"
#include "fm/model.hpp"
#include "fm/trace.hpp"

namespace fm {

class StateCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ArcKey = std::pair<std::string, std::string>;

struct ExploreToken {
  TokenId id = 0;
  StageRef at;
  bool stored = false;
  Tick born = 0;
  Tick ready = 0;
  std::set<ArcKey> checked;  // (from path, to path) of triggers evaluated this visit

  friend auto operator<=>(const ExploreToken&, const ExploreToken&) = default;
  friend bool operator==(const ExploreToken&, const ExploreToken&) = default;
};

struct ExploreState {
  Tick tick = 0;
  std::vector<ExploreToken> tokens;
  std::map<std::string, std::size_t> guard_cursor;
  std::map<std::string, std::size_t> permits;  // by stage path
  TokenId next_id = 1;

  // Sorted location paths of all tokens.
  std::vector<std::string> placement() const;

  friend auto operator<=>(const ExploreState&, const ExploreState&) = default;
  friend bool operator==(const ExploreState&, const ExploreState&) = default;
};

struct ExploreResult {
  std::vector<ExploreState> states;  // one per processed tick, in visit order
  Trace trace;

  std::size_t placement_count() const;
};

// Breadth-first enumeration of free-run states under the simulator's
// semantics, recomputed from the model on every step rather than through the
// simulator's indexed structures. Serves as the test oracle for simulate().
ExploreResult brute_force_explore(const Model& model, const Scenario& scenario,
                                  std::size_t max_states);

}  // namespace fm
