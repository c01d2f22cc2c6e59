#include "acinv/generation.hpp"

#include <algorithm>
#include <memory>
#include <set>

namespace acinv {

namespace {

const char* kind_word(acsl::PredicateTemplate::Kind k) {
    return k == acsl::PredicateTemplate::Kind::Inductive ? "an inductive definition"
                                                         : "a plain predicate";
}

std::vector<acsl::PredicateTemplate> keep_kind(std::vector<acsl::PredicateTemplate> in,
                                               acsl::PredicateTemplate::Kind want,
                                               const std::string& struct_name,
                                               std::vector<Diagnostic>& diags) {
    std::vector<acsl::PredicateTemplate> out;
    for (auto& t : in) {
        if (t.kind == want) {
            out.push_back(std::move(t));
        } else {
            diags.push_back({Severity::Note, std::nullopt,
                             "dropped definition " + t.name + ": expected " + kind_word(want) +
                                 " for struct " + struct_name});
        }
    }
    return out;
}

std::vector<acsl::Invariant> dedup(std::vector<acsl::Invariant> in) {
    std::vector<acsl::Invariant> out;
    for (auto& inv : in) {
        bool seen = false;
        for (const auto& have : out) seen = seen || have == inv;
        if (!seen) out.push_back(std::move(inv));
    }
    return out;
}

}  // namespace

bool invariant_in_scope(const acsl::Invariant& inv, const std::set<std::string>& vars,
                        const std::set<std::string>& predicates, std::string* offender) {
    std::set<std::string> free;
    std::set<std::string> called;
    acsl::free_vars(*inv.expr, free);
    acsl::pred_names(*inv.expr, called);
    for (const auto& v : free) {
        if (!vars.count(v)) {
            *offender = "variable " + v;
            return false;
        }
    }
    for (const auto& p : called) {
        if (!predicates.count(p)) {
            *offender = "predicate " + p;
            return false;
        }
    }
    return true;
}

std::vector<acsl::PredicateTemplate> generate_predicates(Session& session, const c::Ast& ast,
                                                         const ExtractionResult& ex,
                                                         const PromptTemplates& templates,
                                                         std::vector<Diagnostic>& diags) {
    std::vector<acsl::PredicateTemplate> out;
    std::set<std::string> names;
    for (const auto& ds : ex.data_structures) {
        const auto want = ds.recursive ? acsl::PredicateTemplate::Kind::Inductive
                                       : acsl::PredicateTemplate::Kind::Predicate;
        PromptRequest req = build_predicate_prompt(templates, ast, ds);
        auto usable = keep_kind(request_predicates(session, req, diags), want, ds.name, diags);
        if (usable.empty()) {
            PromptRequest again = req;
            again.user += std::string("\n\nNOTE: struct ") + ds.name +
                          (ds.recursive ? " is recursive; define it with " : " is flat; define it with ") +
                          kind_word(want) + ".";
            usable = keep_kind(request_predicates(session, again, diags), want, ds.name, diags);
        }
        if (usable.empty()) {
            diags.push_back({Severity::Warning, std::nullopt,
                             "no usable definition for struct " + ds.name});
            continue;
        }
        for (auto& t : usable) {
            if (!names.insert(t.name).second) {
                diags.push_back({Severity::Note, std::nullopt,
                                 "dropped duplicate definition " + t.name});
                continue;
            }
            out.push_back(std::move(t));
        }
    }
    return out;
}

AugmentationHooks make_augmentation_hooks(const PromptTemplates& templates, const c::Ast& ast,
                                          const ExtractionResult& ex, const LoopInfo& loop,
                                          std::vector<acsl::PredicateTemplate> predicates,
                                          FinalizedMap finalized) {
    struct Ctx {
        const PromptTemplates& templates;
        const c::Ast& ast;
        const ExtractionResult& ex;
        const LoopInfo& loop;
        std::vector<acsl::PredicateTemplate> predicates;
        FinalizedMap finalized;
    };
    auto ctx = std::make_shared<Ctx>(Ctx{templates, ast, ex, loop, std::move(predicates),
                                         std::move(finalized)});
    AugmentationHooks hooks;
    hooks.evaluate_prompt = [ctx](const std::vector<acsl::Invariant>& set) {
        return build_evaluate_prompt(ctx->templates, ctx->ast, ctx->ex, ctx->loop,
                                     ctx->predicates, ctx->finalized, set);
    };
    hooks.optimize_prompt = [ctx](const std::vector<acsl::Invariant>& set,
                                  OptimizeDirection direction) {
        return build_optimize_prompt(ctx->templates, ctx->ast, ctx->ex, ctx->loop,
                                     ctx->predicates, ctx->finalized, set, direction);
    };
    return hooks;
}

GenerationResult run_generation(Session& session, const c::Ast& ast, const ExtractionResult& ex,
                                const PromptTemplates& templates,
                                const GenerationOptions& options) {
    GenerationResult out;
    if (!ex.data_structures.empty()) {
        out.predicates = generate_predicates(session, ast, ex, templates, out.diagnostics);
    }

    std::set<std::string> predicate_names;
    for (const auto& t : out.predicates) predicate_names.insert(t.name);

    std::vector<const LoopInfo*> order;
    for (const auto& loop : ex.loops) order.push_back(&loop);
    std::sort(order.begin(), order.end(),
              [](const LoopInfo* a, const LoopInfo* b) { return a->number < b->number; });

    for (const LoopInfo* loop : order) {
        LoopGenerationResult lr;
        lr.loop_number = loop->number;

        std::set<std::string> scope(loop->scope_vars.begin(), loop->scope_vars.end());
        for (const auto& [name, value] : ast.defines) {
            (void)value;
            scope.insert(name);
        }

        PromptRequest req =
            build_invariant_prompt(templates, ast, ex, *loop, out.predicates, out.finalized);
        auto raw = dedup(request_invariants(session, req, out.diagnostics));
        for (auto& inv : raw) {
            std::string offender;
            if (!invariant_in_scope(inv, scope, predicate_names, &offender)) {
                out.diagnostics.push_back(
                    {Severity::Note, std::nullopt,
                     "loop " + std::to_string(loop->number) + ": dropped candidate " + inv.text +
                         " (" + offender + " is not in scope)"});
                continue;
            }
            if (static_cast<int>(lr.candidates.size()) >= options.max_candidates) {
                out.diagnostics.push_back({Severity::Note, std::nullopt,
                                           "loop " + std::to_string(loop->number) +
                                               ": dropped candidate beyond the cap: " + inv.text});
                continue;
            }
            lr.candidates.push_back(std::move(inv));
        }

        auto hooks =
            make_augmentation_hooks(templates, ast, ex, *loop, out.predicates, out.finalized);
        lr.augmentation = augment(session, lr.candidates, options.k, hooks);
        for (auto& d : lr.augmentation.diagnostics) out.diagnostics.push_back(d);

        if (lr.augmentation.outcome == AugmentationOutcome::Validated) {
            for (const auto& inv : lr.augmentation.invariants) {
                std::string offender;
                if (invariant_in_scope(inv, scope, predicate_names, &offender)) {
                    lr.finalized.push_back(inv);
                } else {
                    out.diagnostics.push_back(
                        {Severity::Note, std::nullopt,
                         "loop " + std::to_string(loop->number) + ": dropped finalized invariant " +
                             inv.text + " (" + offender + " is not in scope)"});
                }
            }
        }
        if (!lr.finalized.empty()) out.finalized[loop->number] = lr.finalized;
        out.loops.push_back(std::move(lr));
    }
    return out;
}

}  // namespace acinv
