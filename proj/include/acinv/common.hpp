#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace acinv {

/// 1-based, inclusive source coordinates.
struct SourceSpan {
  int start_line = 1;
  int start_col = 1;
  int end_line = 1;
  int end_col = 1;

  bool operator==(const SourceSpan&) const = default;
  bool valid() const {
    if (start_line < 1 || start_col < 1 || end_line < 1 || end_col < 1) return false;
    return start_line < end_line || (start_line == end_line && start_col <= end_col);
  }
};

std::string to_string(const SourceSpan& s);

enum class Severity { Note, Warning, Error };

struct Diagnostic {
  Severity severity = Severity::Warning;
  std::optional<SourceSpan> span;
  std::string message;
};

std::string to_string(const Diagnostic& d);

class ParseError : public std::runtime_error {
public:
  ParseError(SourceSpan span, std::string message);
  const SourceSpan& span() const { return span_; }
  const std::string& message() const { return message_; }

private:
  SourceSpan span_;
  std::string message_;
};

class InsertError : public std::runtime_error {
public:
  explicit InsertError(const std::string& what) : std::runtime_error(what) {}
};

class AcslSyntaxError : public std::runtime_error {
public:
  AcslSyntaxError(std::size_t offset, std::string message);
  std::size_t offset() const { return offset_; }
  const std::string& message() const { return message_; }

private:
  std::size_t offset_;
  std::string message_;
};

/// Stable 64-bit FNV-1a over bytes, rendered as 16 hex digits. Used to key
/// replay fixtures; must never change across platforms or releases.
std::string stable_hash_hex(const std::string& text);

}  // namespace acinv
