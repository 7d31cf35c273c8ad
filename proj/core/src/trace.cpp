#include "fm/trace.hpp"

#include <algorithm>

namespace fm {

std::string_view to_string(RecordKind kind) {
  switch (kind) {
    case RecordKind::Hop: return "hop";
    case RecordKind::TriggerFired: return "trigger-fired";
    case RecordKind::TokenCreated: return "token-created";
    case RecordKind::EventStart: return "event-start";
    case RecordKind::EventEnd: return "event-end";
    case RecordKind::Inhibited: return "inhibited";
  }
  return "?";
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Completed: return "completed";
    case StopReason::Quiescent: return "quiescent";
    case StopReason::TickLimit: return "tick-limit";
  }
  return "?";
}

std::size_t Trace::count(RecordKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [&](const TraceRecord& r) { return r.kind == kind; }));
}

std::vector<std::string> Trace::event_sequence(RecordKind kind) const {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (r.kind == kind && !r.subjects.empty()) out.push_back(r.subjects.front());
  }
  return out;
}

std::string storage_path(const StageRef& stage) { return stage.path() + ".storage"; }

}  // namespace fm
