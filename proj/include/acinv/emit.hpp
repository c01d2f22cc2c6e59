#pragma once

#include <string>
#include <vector>

namespace acinv {

// A block of text to splice in directly above the given 1-based source line.
// The block may span several lines; every line is re-indented to match the
// leading whitespace of the target line.
struct Insertion {
  int line = 0;
  std::string text;
};

// Returns the source with all insertions applied. Insertions aimed at the
// same line keep their given order. Throws InsertError when a target line
// is outside [1, line count]. With no insertions the result is the input,
// byte for byte.
std::string emit_annotated(const std::string& source, const std::vector<Insertion>& insertions);

}  // namespace acinv
