#pragma once

#include <map>
#include <string>
#include <vector>

#include "acinv/acsl.hpp"
#include "acinv/cst.hpp"
#include "acinv/extraction.hpp"

// Prompt construction. Four templates drive the model: predicate generation
// per data structure, invariant generation per loop, evaluation of a
// candidate set, and optimization (strengthen or weaken) of a candidate set.
// Worked examples are embedded in the templates; everything the model sees is
// a single system plus user message.

namespace acinv {

struct Shot {
  std::string input;
  std::string output;
};

struct PromptTemplates {
  std::string system;
  std::string predicate;
  std::string invariant;
  std::string evaluate;
  std::string optimize;
  std::vector<Shot> predicate_shots;
  std::vector<Shot> invariant_shots;
  std::vector<Shot> evaluate_shots;
  std::vector<Shot> optimize_shots;

  static PromptTemplates defaults();
  /// defaults(), with any of system.txt, predicate.txt, invariant.txt,
  /// evaluate.txt, optimize.txt, shots.json present in dir replacing the
  /// built-in version.
  static PromptTemplates load_dir(const std::string& dir);
};

struct PromptRequest {
  std::string system;
  std::string user;
};

enum class OptimizeDirection { Strengthen, Weaken };

/// Finalized invariant sets, keyed by loop number.
using FinalizedMap = std::map<int, std::vector<acsl::Invariant>>;

/// Replace [[Name]] placeholders. A placeholder that is alone on its line and
/// maps to an empty value takes the whole line with it; an unknown
/// placeholder is an error.
std::string substitute(const std::string& templ, const std::map<std::string, std::string>& values);

/// "i (int), pcm[] (int16_t *), vd (struct VolDetectContext *, data structure)"
std::string render_key_variables(const LoopInfo& loop);

/// The program as the model sees it: finalized annotations of earlier loops
/// in place, a TARGET comment naming the modified variables above the loop in
/// question, and (when given) that loop's current invariants right below the
/// comment.
std::string render_program_for_loop(const c::Ast& ast, const LoopInfo& target,
                                    const FinalizedMap& finalized, const ExtractionResult& ex,
                                    const std::vector<acsl::Invariant>* target_invariants);

PromptRequest build_predicate_prompt(const PromptTemplates& t, const c::Ast& ast,
                                     const DataStructureFact& ds);

PromptRequest build_invariant_prompt(const PromptTemplates& t, const c::Ast& ast,
                                     const ExtractionResult& ex, const LoopInfo& loop,
                                     const std::vector<acsl::PredicateTemplate>& predicates,
                                     const FinalizedMap& finalized);

PromptRequest build_evaluate_prompt(const PromptTemplates& t, const c::Ast& ast,
                                    const ExtractionResult& ex, const LoopInfo& loop,
                                    const std::vector<acsl::PredicateTemplate>& predicates,
                                    const FinalizedMap& finalized,
                                    const std::vector<acsl::Invariant>& candidates);

PromptRequest build_optimize_prompt(const PromptTemplates& t, const c::Ast& ast,
                                    const ExtractionResult& ex, const LoopInfo& loop,
                                    const std::vector<acsl::PredicateTemplate>& predicates,
                                    const FinalizedMap& finalized,
                                    const std::vector<acsl::Invariant>& candidates,
                                    OptimizeDirection direction);

}  // namespace acinv
