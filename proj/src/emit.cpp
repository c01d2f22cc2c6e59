#include "acinv/emit.hpp"

#include <map>

#include "acinv/common.hpp"

namespace acinv {

namespace {

std::vector<std::string> split_lines_keep_ends(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\n') {
      out.push_back(s.substr(start, i - start + 1));
      start = i + 1;
    }
  }
  if (start < s.size()) out.push_back(s.substr(start));
  return out;
}

std::string leading_ws(const std::string& line) {
  std::size_t n = 0;
  while (n < line.size() && (line[n] == ' ' || line[n] == '\t')) ++n;
  return line.substr(0, n);
}

}  // namespace

std::string emit_annotated(const std::string& source, const std::vector<Insertion>& insertions) {
  if (insertions.empty()) return source;

  auto lines = split_lines_keep_ends(source);
  const int line_count = static_cast<int>(lines.size());

  std::map<int, std::vector<const Insertion*>> by_line;
  for (const auto& ins : insertions) {
    if (ins.line < 1 || ins.line > line_count) {
      throw InsertError("insertion line " + std::to_string(ins.line) + " outside 1.." +
                        std::to_string(line_count));
    }
    by_line[ins.line].push_back(&ins);
  }

  std::string out;
  out.reserve(source.size() + insertions.size() * 40);
  for (int ln = 1; ln <= line_count; ++ln) {
    auto it = by_line.find(ln);
    if (it != by_line.end()) {
      const std::string indent = leading_ws(lines[ln - 1]);
      for (const Insertion* ins : it->second) {
        for (const auto& piece : split_lines_keep_ends(ins->text)) {
          out += indent;
          out += piece;
          if (piece.empty() || piece.back() != '\n') out += '\n';
        }
      }
    }
    out += lines[ln - 1];
  }
  return out;
}

}  // namespace acinv
