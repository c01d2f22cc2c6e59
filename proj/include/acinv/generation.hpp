#pragma once

#include <set>
#include <vector>

#include "acinv/augmentation.hpp"
#include "acinv/extraction.hpp"
#include "acinv/llm_client.hpp"
#include "acinv/prompting.hpp"

// The generation phase. Predicates are requested once per extracted data
// structure, then loops are processed in ascending number order: candidates
// for a loop are requested with every earlier loop's finalized annotation in
// view, scope-checked, and handed to the augmentation cycle.

namespace acinv {

struct GenerationOptions {
  /// Augmentation cycle budget per loop.
  int k = 5;
  /// At most this many candidates survive into augmentation.
  int max_candidates = 8;
};

struct LoopGenerationResult {
  int loop_number = 0;
  /// Deduplicated, in-scope candidates, capped at max_candidates.
  std::vector<acsl::Invariant> candidates;
  AugmentationResult augmentation;
  /// The set written into the annotation; empty when the loop was rejected
  /// or everything augmentation settled on fell out of scope.
  std::vector<acsl::Invariant> finalized;
};

struct GenerationResult {
  std::vector<acsl::PredicateTemplate> predicates;
  std::vector<LoopGenerationResult> loops;
  FinalizedMap finalized;
  std::vector<Diagnostic> diagnostics;
};

/// True when every free variable of the invariant is in vars and every
/// predicate it calls is in predicates; otherwise *offender names the first
/// missing name ("variable x" or "predicate p").
bool invariant_in_scope(const acsl::Invariant& inv, const std::set<std::string>& vars,
                        const std::set<std::string>& predicates, std::string* offender);

/// One query per data structure. A recursive structure is expected to come
/// back as an inductive definition and a flat one as a plain predicate;
/// responses of the wrong kind trigger a single corrective re-query.
std::vector<acsl::PredicateTemplate> generate_predicates(Session& session, const c::Ast& ast,
                                                         const ExtractionResult& ex,
                                                         const PromptTemplates& templates,
                                                         std::vector<Diagnostic>& diags);

/// Evaluate and optimize hooks for one loop, self-contained: the finalized
/// map is captured by value so the hooks stay valid after later loops run.
AugmentationHooks make_augmentation_hooks(const PromptTemplates& templates, const c::Ast& ast,
                                          const ExtractionResult& ex, const LoopInfo& loop,
                                          std::vector<acsl::PredicateTemplate> predicates,
                                          FinalizedMap finalized);

GenerationResult run_generation(Session& session, const c::Ast& ast, const ExtractionResult& ex,
                                const PromptTemplates& templates,
                                const GenerationOptions& options);

}  // namespace acinv
