#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fm/diagnostic.hpp"

namespace fm::detail {

enum class TokenKind { Word, Int, Symbol, End };

struct LexToken {
  TokenKind kind = TokenKind::End;
  std::string text;
  SourcePos pos;
  long long value = 0;  // Int only
};

struct LexFailure {
  Diagnostic diagnostic;
};

// Splits FM text into words, integers and the symbols { } ( ) , . = < -> ~>.
// '#' starts a comment running to end of line. Throws LexFailure (P001).
std::vector<LexToken> lex(std::string_view text);

// Same lexical rules, used by the scenario reader.
std::vector<std::vector<LexToken>> lex_lines(std::string_view text, const char* error_code);

}  // namespace fm::detail
