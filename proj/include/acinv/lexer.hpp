#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "acinv/common.hpp"

namespace acinv::c {

struct Token {
  enum class Kind { Ident, IntLit, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  std::int64_t value = 0;  // IntLit
  SourceSpan span;

  bool is(const char* s) const { return text == s; }
  bool is_ident(const char* s) const { return kind == Kind::Ident && text == s; }
};

struct LexResult {
  std::vector<Token> tokens;  // terminated by an End token
  std::map<std::string, std::int64_t> defines;
  int line_count = 0;
};

/// Tokenize the C subset. Comments (including ACSL blocks) and preprocessor
/// lines are skipped; "#define NAME <int>" directives are recorded but never
/// expanded. Throws ParseError on malformed input (stray characters,
/// unterminated comments).
LexResult lex(const std::string& source);

}  // namespace acinv::c
