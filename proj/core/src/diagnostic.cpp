#include "fm/diagnostic.hpp"

#include <algorithm>
#include <sstream>

namespace fm {

std::string Diagnostic::format(const std::string& origin) const {
  std::ostringstream os;
  os << origin;
  if (pos) os << ':' << pos->line << ':' << pos->column;
  os << ": " << code << ' ';
  if (severity == Severity::Warning) os << "warning: ";
  os << message;
  if (!pos && !element.empty()) os << " (at " << element << ')';
  return os.str();
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.is_error(); });
}

}  // namespace fm
