#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fm/control.hpp"

namespace fm {

enum class RecordKind { Hop, TriggerFired, TokenCreated, EventStart, EventEnd, Inhibited };

std::string_view to_string(RecordKind kind);

enum class StopReason { Completed, Quiescent, TickLimit };

std::string_view to_string(StopReason reason);

using TokenId = std::uint64_t;

// Subjects per kind:
//   token-created  token, {stage}
//   hop            token, {from, to}     (storage locations end in ".storage")
//   trigger-fired  token, {from, to}     (token = the resident that fired it)
//   event-start    {event}
//   event-end      {event}
//   inhibited      {target stage, guard}
struct TraceRecord {
  Tick tick = 0;
  RecordKind kind = RecordKind::Hop;
  std::optional<TokenId> token;
  std::vector<std::string> subjects;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct Trace {
  std::vector<TraceRecord> records;
  Tick end_tick = 0;
  StopReason reason = StopReason::Quiescent;

  std::size_t count(RecordKind kind) const;
  // Event names of event-start (or event-end) records in trace order.
  std::vector<std::string> event_sequence(RecordKind kind = RecordKind::EventStart) const;

  friend bool operator==(const Trace&, const Trace&) = default;
};

std::string storage_path(const StageRef& stage);

}  // namespace fm
