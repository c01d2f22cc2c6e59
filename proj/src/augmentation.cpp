#include "acinv/augmentation.hpp"

#include <utility>

namespace acinv {

namespace {

std::vector<acsl::Invariant> dedup(std::vector<acsl::Invariant> set) {
    std::vector<acsl::Invariant> out;
    for (auto& inv : set) {
        bool seen = false;
        for (const auto& kept : out) {
            if (kept == inv) seen = true;
        }
        if (!seen) out.push_back(std::move(inv));
    }
    return out;
}

}  // namespace

AugmentationResult augment(Session& session,
                           std::vector<acsl::Invariant> candidates, int k,
                           const AugmentationHooks& hooks) {
    AugmentationResult out;
    candidates = dedup(std::move(candidates));
    if (candidates.empty()) {
        out.outcome = AugmentationOutcome::Rejected;
        return out;
    }

    std::vector<acsl::Invariant> cur = std::move(candidates);
    std::optional<std::vector<acsl::Invariant>> snapshot;

    auto settle = [&](const std::string& note) {
        if (snapshot) {
            out.outcome = AugmentationOutcome::Validated;
            out.invariants = *snapshot;
        } else {
            out.outcome = AugmentationOutcome::Rejected;
        }
        if (!note.empty()) {
            out.diagnostics.push_back({Severity::Warning, std::nullopt, note});
            if (!out.history.empty() && out.history.back().note.empty()) {
                out.history.back().note = note;
            }
        }
        return out;
    };

    for (int cycle = 1; cycle <= k; ++cycle) {
        AugmentationStep step;
        step.cycle = cycle;

        Verdict verdict;
        try {
            verdict = request_evaluation(session, hooks.evaluate_prompt(cur),
                                         out.diagnostics);
        } catch (const std::runtime_error& e) {
            step.note = std::string("evaluation aborted: ") + e.what();
            step.set_after = cur;
            out.history.push_back(std::move(step));
            return settle("");
        }
        ++out.cycles;
        step.evaluated_correct = verdict.correct;
        step.evaluator_reason = verdict.reason;

        if (verdict.correct) {
            snapshot = cur;
            step.direction = OptimizeDirection::Strengthen;
        } else if (snapshot) {
            // A previously validated set exists; revert to it rather than
            // weakening the broken refinement.
            step.set_after = *snapshot;
            step.note = "reverted to the last validated set";
            out.history.push_back(std::move(step));
            out.outcome = AugmentationOutcome::Validated;
            out.invariants = *snapshot;
            return out;
        } else {
            step.direction = OptimizeDirection::Weaken;
        }

        Optimization opt;
        try {
            opt = request_optimization(
                session, hooks.optimize_prompt(cur, step.direction),
                out.diagnostics);
        } catch (const std::runtime_error& e) {
            step.note = std::string("optimization aborted: ") + e.what();
            step.set_after = cur;
            out.history.push_back(std::move(step));
            return settle("");
        }
        step.optimizer_called = true;
        step.optimizer_result = opt.result;

        const OptimizeResult expected =
            step.direction == OptimizeDirection::Strengthen
                ? OptimizeResult::Strengthened
                : OptimizeResult::Weakened;
        if (opt.result != OptimizeResult::Declined && opt.result != expected) {
            step.note = "optimizer answered against the requested direction; "
                        "treating it as declined";
            out.diagnostics.push_back({Severity::Warning, std::nullopt, step.note});
            opt.result = OptimizeResult::Declined;
            step.optimizer_result = OptimizeResult::Declined;
        }

        if (opt.result == OptimizeResult::Declined) {
            step.set_after = cur;
            out.history.push_back(std::move(step));
            if (snapshot) {
                out.outcome = AugmentationOutcome::Validated;
                out.invariants = *snapshot;
            } else {
                out.outcome = AugmentationOutcome::Rejected;
            }
            return out;
        }

        cur = dedup(std::move(opt.invariants));
        step.set_after = cur;
        out.history.push_back(std::move(step));
    }

    return settle("");
}

}  // namespace acinv
