#pragma once

#include <string>
#include <utility>
#include <vector>

#include "acinv/cst.hpp"

// Static extraction pass. Walks the parsed program once, bottom up, and
// produces the two inputs the generation phase needs: the data structures
// defined by the program and its loops, numbered so that any loop's number is
// larger than the numbers of all loops nested inside it (innermost first,
// siblings in textual order, children before their parent).

namespace acinv {

struct DataStructureFact {
  std::string name;
  std::vector<std::pair<std::string, std::string>> fields;  // name, rendered type
  // A structure is recursive when one of its own members refers back to it,
  // through any number of pointers. Cycles through other structs do not
  // count; they are reported as diagnostics instead.
  bool recursive = false;
  std::string definition;  // verbatim source of the declaration
};

enum class MutationKind { Assigned, PointerArg };

struct MutatedVar {
  std::string name;
  std::string display;  // name, with [] appended for arrays and pointers to scalars
  std::string type_text;
  bool is_data_structure = false;
  MutationKind kind = MutationKind::Assigned;
};

struct LoopInfo {
  int number = 0;
  std::string function;
  int depth = 1;  // 1 for a top-level loop
  c::LoopForm form = c::LoopForm::While;
  SourceSpan span;
  std::string guard_text;
  std::vector<MutatedVar> mutated_vars;  // sorted by name
  std::vector<int> inner_loops;          // numbers of directly nested loops
  int annotation_line = 0;               // invariants are inserted above this line
  // Variables visible at the loop head (parameters and earlier declarations).
  // Used to screen generated invariants; not part of the dump output.
  std::vector<std::string> scope_vars;
};

struct ExtractionResult {
  std::vector<DataStructureFact> data_structures;  // sorted by name
  std::vector<LoopInfo> loops;                     // ordered by number, 1-based
  std::vector<Diagnostic> diagnostics;
  int stmt_visits = 0;  // statements touched by the walk; equals the statement count

  const LoopInfo* find_loop(int number) const;
};

ExtractionResult extract(const c::Ast& ast);

/// JSON rendering for --dump-extraction.
std::string to_json(const ExtractionResult& result);

}  // namespace acinv
