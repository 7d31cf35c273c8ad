#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fm {

enum class Severity { Error, Warning };

// 1-based line and column; columns count code points.
struct SourcePos {
  int line = 1;
  int column = 1;

  friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

struct Diagnostic {
  std::string code;  // P001.., V001.., W001, S001..
  Severity severity = Severity::Error;
  std::string message;
  std::optional<SourcePos> pos;
  std::string element;  // model element path when no source position applies

  bool is_error() const { return severity == Severity::Error; }

  // "file:line:col: CODE message" or "file: CODE message (at element)".
  std::string format(const std::string& origin) const;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

bool has_errors(const std::vector<Diagnostic>& diagnostics);

}  // namespace fm
