#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fm/diagnostic.hpp"
#include "fm/document.hpp"

namespace fm {

struct SourceText {
  std::string content;
  std::string origin = "<memory>";
};

struct ParseResult {
  std::optional<Document> document;
  std::vector<Diagnostic> diagnostics;  // empty on success

  bool ok() const { return document.has_value(); }
};

// Parse codes:
//   P001 lexical error          P002 unexpected token
//   P003 unknown stage keyword  P004 dangling reference
//   P005 duplicate declaration
// Construction rule violations are reported under their validator codes
// (V002-V007, V010) with the position of the offending declaration.
ParseResult parse(const SourceText& text);

// Canonical text: guards sorted, spheres and machines by name, stages in kind
// order, flows and triggers sorted by (from, to). Events, controls and
// constraints keep declaration order.
std::string serialize(const Document& document);

}  // namespace fm
