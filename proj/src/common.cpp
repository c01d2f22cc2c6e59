#include "acinv/common.hpp"

#include <sstream>

namespace acinv {

std::string to_string(const SourceSpan& s) {
  std::ostringstream os;
  os << s.start_line << ':' << s.start_col << '-' << s.end_line << ':' << s.end_col;
  return os.str();
}

std::string to_string(const Diagnostic& d) {
  std::ostringstream os;
  switch (d.severity) {
    case Severity::Note: os << "note"; break;
    case Severity::Warning: os << "warning"; break;
    case Severity::Error: os << "error"; break;
  }
  if (d.span) os << " at " << to_string(*d.span);
  os << ": " << d.message;
  return os.str();
}

ParseError::ParseError(SourceSpan span, std::string message)
    : std::runtime_error("parse error at " + acinv::to_string(span) + ": " + message),
      span_(span),
      message_(std::move(message)) {}

AcslSyntaxError::AcslSyntaxError(std::size_t offset, std::string message)
    : std::runtime_error("ACSL syntax error at offset " + std::to_string(offset) + ": " + message),
      offset_(offset),
      message_(std::move(message)) {}

std::string stable_hash_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace acinv
