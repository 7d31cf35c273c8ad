#include "lexer.hpp"

#include <limits>

namespace fm::detail {
namespace {

bool word_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool word_char(char c) { return word_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }
bool continuation_byte(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

class Lexer {
 public:
  Lexer(std::string_view text, const char* code) : text_(text), code_(code) {}

  // Appends tokens; a new inner vector is started at every newline when `by_line`.
  std::vector<std::vector<LexToken>> run(bool by_line) {
    std::vector<std::vector<LexToken>> lines(1);
    while (i_ < text_.size()) {
      const char c = text_[i_];
      if (c == '\n') {
        advance();
        if (by_line) lines.emplace_back();
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
        continue;
      }
      if (c == '#') {
        while (i_ < text_.size() && text_[i_] != '\n') advance();
        continue;
      }
      const SourcePos start = pos_;
      if (word_start(c)) {
        std::string w;
        while (i_ < text_.size() && word_char(text_[i_])) w += advance();
        lines.back().push_back({TokenKind::Word, std::move(w), start, 0});
        continue;
      }
      if (digit(c)) {
        std::string digits;
        while (i_ < text_.size() && digit(text_[i_])) digits += advance();
        if (i_ < text_.size() && word_start(text_[i_])) fail(pos_, "malformed number");
        long long value = 0;
        for (char d : digits) {
          if (value > (std::numeric_limits<long long>::max() - (d - '0')) / 10) {
            fail(start, "integer literal '" + digits + "' is too large");
          }
          value = value * 10 + (d - '0');
        }
        lines.back().push_back({TokenKind::Int, std::move(digits), start, value});
        continue;
      }
      if (c == '-' || c == '~') {
        advance();
        if (i_ >= text_.size() || text_[i_] != '>') {
          fail(start, std::string("expected '>' after '") + c + "'");
        }
        advance();
        lines.back().push_back({TokenKind::Symbol, std::string(1, c) + ">", start, 0});
        continue;
      }
      switch (c) {
        case '{':
        case '}':
        case '(':
        case ')':
        case ',':
        case '.':
        case '=':
        case '<':
          advance();
          lines.back().push_back({TokenKind::Symbol, std::string(1, c), start, 0});
          continue;
        default: break;
      }
      if (static_cast<unsigned char>(c) >= 0x80) fail(start, "non-ASCII character outside a comment");
      fail(start, std::string("unexpected character '") + c + "'");
    }
    lines.back().push_back({TokenKind::End, "", pos_, 0});
    return lines;
  }

 private:
  char advance() {
    const char c = text_[i_++];
    if (c == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else if (!continuation_byte(c)) {
      ++pos_.column;  // columns count code points
    }
    return c;
  }

  [[noreturn]] void fail(SourcePos at, std::string message) {
    throw LexFailure{Diagnostic{code_, Severity::Error, std::move(message), at, {}}};
  }

  std::string_view text_;
  const char* code_;
  std::size_t i_ = 0;
  SourcePos pos_;
};

}  // namespace

std::vector<LexToken> lex(std::string_view text) { return Lexer(text, "P001").run(false).front(); }

std::vector<std::vector<LexToken>> lex_lines(std::string_view text, const char* error_code) {
  return Lexer(text, error_code).run(true);
}

}  // namespace fm::detail
