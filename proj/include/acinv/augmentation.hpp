#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "acinv/acsl.hpp"
#include "acinv/llm_client.hpp"
#include "acinv/prompting.hpp"

// The evaluate/optimize refinement loop that runs after raw invariants are
// generated for a loop. Each cycle asks the evaluator for a verdict on the
// current set, then steers: a correct set is snapshotted and the optimizer
// is asked to strengthen it; an incorrect set is either reverted to the
// last snapshot or, if none exists yet, handed to the optimizer to weaken.
// The loop stops when the optimizer declines, when a strengthened set
// breaks, or when the cycle budget k runs out.

namespace acinv {

enum class AugmentationOutcome { Validated, Rejected };

struct AugmentationStep {
    int cycle = 0;
    bool evaluated_correct = false;
    std::string evaluator_reason;
    bool optimizer_called = false;
    OptimizeDirection direction = OptimizeDirection::Strengthen;
    OptimizeResult optimizer_result = OptimizeResult::Declined;
    std::vector<acsl::Invariant> set_after;
    std::string note;
};

struct AugmentationResult {
    AugmentationOutcome outcome = AugmentationOutcome::Rejected;
    std::vector<acsl::Invariant> invariants;  // empty when rejected
    int cycles = 0;  // completed evaluator calls
    std::vector<AugmentationStep> history;
    std::vector<Diagnostic> diagnostics;
};

// Prompt builders supplied by the caller; augmentation itself knows nothing
// about programs or loops, only invariant sets.
struct AugmentationHooks {
    std::function<PromptRequest(const std::vector<acsl::Invariant>&)>
        evaluate_prompt;
    std::function<PromptRequest(const std::vector<acsl::Invariant>&,
                                OptimizeDirection)>
        optimize_prompt;
};

AugmentationResult augment(Session& session,
                           std::vector<acsl::Invariant> candidates, int k,
                           const AugmentationHooks& hooks);

}  // namespace acinv
