#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fm/diagnostic.hpp"
#include "fm/events.hpp"
#include "fm/model.hpp"
#include "fm/trace.hpp"

namespace fm {

inline constexpr std::array<std::string_view, 8> kPalette = {
    "yellow", "orange", "lightblue", "palegreen", "pink", "lightgray", "cyan", "tan"};
inline constexpr std::string_view kSharedColor = "mediumpurple";

struct OverlayEntry {
  std::string event;
  std::string color;   // palette entry
  std::string legend;  // color name, with a numeric suffix once the palette wraps
  Region region;       // the event's region including nested sub-events
};

struct Overlay {
  std::vector<OverlayEntry> entries;  // declaration order

  // Fill color for a stage: the entry color, kSharedColor when two or more
  // entries contain it, nullopt when none does.
  std::optional<std::string> fill(const StageRef& stage) const;
};

// Colors `names` in the given order, or every top-level event in declaration
// order when `names` is empty. Throws std::invalid_argument on an unknown name.
Overlay make_overlay(const std::vector<EventDef>& events, const std::vector<std::string>& names = {});

// Graphviz text: one cluster per sphere (nested), one table node per machine
// with a port per stage, solid flow edges, dashed trigger edges labelled with
// their guard. Byte-stable for a given input.
std::string to_dot(const Model& model, const Overlay* overlay = nullptr);

// One line per record, "tick=<n> kind=<kind> [#<token>] <subjects...>",
// followed by "end tick=<n> reason=<reason>".
std::string render_trace(const Trace& trace);

std::string render_diagnostics(const std::vector<Diagnostic>& diagnostics, const std::string& origin);

}  // namespace fm
