#include "acinv/lexer.hpp"

#include <cctype>
#include <cstdlib>
#include <cstring>

namespace acinv::c {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Cursor {
public:
  explicit Cursor(const std::string& s) : s_(s) {}

  bool done() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }
  char advance() {
    char c = s_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  int line() const { return line_; }
  int col() const { return col_; }

private:
  const std::string& s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

const char* kThreeCharPuncts[] = {"<<=", ">>="};
const char* kTwoCharPuncts[] = {
    "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=",
    "%=", "&=", "|=", "^=", "->", "<<", ">>",
};

}  // namespace

LexResult lex(const std::string& source) {
  LexResult out;
  Cursor cur(source);

  auto skip_line = [&](std::string* captured) {
    while (!cur.done() && cur.peek() != '\n') {
      if (captured) captured->push_back(cur.peek());
      cur.advance();
    }
  };

  while (!cur.done()) {
    char c = cur.peek();
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      cur.advance();
      continue;
    }
    if (c == '/' && cur.peek(1) == '/') {
      skip_line(nullptr);
      continue;
    }
    if (c == '/' && cur.peek(1) == '*') {
      SourceSpan open{cur.line(), cur.col(), cur.line(), cur.col()};
      cur.advance();
      cur.advance();
      bool closed = false;
      while (!cur.done()) {
        if (cur.peek() == '*' && cur.peek(1) == '/') {
          cur.advance();
          cur.advance();
          closed = true;
          break;
        }
        cur.advance();
      }
      if (!closed) throw ParseError(open, "unterminated comment");
      continue;
    }
    if (c == '#') {
      // Preprocessor line: never expanded. Object-like integer #defines are
      // recorded so symbolic constants can be resolved later.
      std::string line;
      skip_line(&line);
      std::size_t p = 1;
      while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) ++p;
      if (line.compare(p, 6, "define") == 0) {
        p += 6;
        while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) ++p;
        std::size_t name_start = p;
        while (p < line.size() && ident_char(line[p])) ++p;
        std::string name = line.substr(name_start, p - name_start);
        while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) ++p;
        if (!name.empty() && p < line.size()) {
          char* end = nullptr;
          long long v = std::strtoll(line.c_str() + p, &end, 0);
          if (end && end != line.c_str() + p) {
            while (*end && std::isspace(static_cast<unsigned char>(*end))) ++end;
            if (*end == '\0') out.defines[name] = v;
          }
        }
      }
      continue;
    }

    Token tok;
    tok.span.start_line = cur.line();
    tok.span.start_col = cur.col();

    if (ident_start(c)) {
      tok.kind = Token::Kind::Ident;
      while (!cur.done() && ident_char(cur.peek())) {
        tok.span.end_line = cur.line();
        tok.span.end_col = cur.col();
        tok.text.push_back(cur.advance());
      }
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      tok.kind = Token::Kind::IntLit;
      bool hex = c == '0' && (cur.peek(1) == 'x' || cur.peek(1) == 'X');
      auto take = [&] {
        tok.span.end_line = cur.line();
        tok.span.end_col = cur.col();
        tok.text.push_back(cur.advance());
      };
      if (hex) {
        take();
        take();
        while (!cur.done() && std::isxdigit(static_cast<unsigned char>(cur.peek()))) take();
      } else {
        while (!cur.done() && std::isdigit(static_cast<unsigned char>(cur.peek()))) take();
      }
      std::string digits = tok.text;
      // integer suffixes accepted and ignored
      while (!cur.done() && (cur.peek() == 'u' || cur.peek() == 'U' || cur.peek() == 'l' ||
                             cur.peek() == 'L')) {
        take();
      }
      tok.value = std::strtoll(digits.c_str(), nullptr, 0);
    } else {
      tok.kind = Token::Kind::Punct;
      auto match = [&](const char* p) {
        std::size_t n = std::strlen(p);
        for (std::size_t i = 0; i < n; ++i) {
          if (cur.peek(i) != p[i]) return false;
        }
        return true;
      };
      const char* matched = nullptr;
      for (const char* p : kThreeCharPuncts) {
        if (match(p)) {
          matched = p;
          break;
        }
      }
      if (!matched) {
        for (const char* p : kTwoCharPuncts) {
          if (match(p)) {
            matched = p;
            break;
          }
        }
      }
      std::size_t len = matched ? std::strlen(matched) : 1;
      static const std::string kSingles = "+-*/%<>=!&|^~(){}[];,.?:";
      if (!matched && kSingles.find(c) == std::string::npos) {
        throw ParseError({cur.line(), cur.col(), cur.line(), cur.col()},
                         std::string("unexpected character '") + c + "'");
      }
      for (std::size_t i = 0; i < len; ++i) {
        tok.span.end_line = cur.line();
        tok.span.end_col = cur.col();
        tok.text.push_back(cur.advance());
      }
    }
    out.tokens.push_back(std::move(tok));
  }

  // physical lines; a trailing newline terminates the last one
  int lines = 0;
  for (char ch : source) {
    if (ch == '\n') ++lines;
  }
  if (!source.empty() && source.back() != '\n') ++lines;
  out.line_count = lines;

  Token end;
  end.kind = Token::Kind::End;
  end.span = {cur.line(), cur.col(), cur.line(), cur.col()};
  out.tokens.push_back(std::move(end));
  return out;
}

}  // namespace acinv::c
