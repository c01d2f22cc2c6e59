#include "acinv/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "acinv/emit.hpp"
#include "acinv/parser.hpp"

namespace acinv {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw std::runtime_error("cannot read " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out.good()) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out.good()) throw std::runtime_error("cannot write " + path);
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string fixture_key(const std::string& path) {
    std::string stem = fs::path(path).stem().string();
    for (char& c : stem) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        if (!ok) c = '_';
    }
    return stem.empty() ? "program" : stem;
}

const char* severity_name(Severity s) {
    switch (s) {
        case Severity::Note: return "note";
        case Severity::Warning: return "warning";
        case Severity::Error: return "error";
    }
    return "note";
}

const char* check_status_name(dyn::CheckStatus s) {
    switch (s) {
        case dyn::CheckStatus::Pass: return "pass";
        case dyn::CheckStatus::Fail: return "fail";
        case dyn::CheckStatus::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

const char* outcome_name(AugmentationOutcome o) {
    return o == AugmentationOutcome::Validated ? "validated" : "rejected";
}

const char* action_name(const AugmentationStep& step) {
    if (!step.optimizer_called) return "none";
    switch (step.optimizer_result) {
        case OptimizeResult::Strengthened: return "strengthened";
        case OptimizeResult::Weakened: return "weakened";
        case OptimizeResult::Declined: return "declined";
    }
    return "none";
}

std::vector<std::string> texts(const std::vector<acsl::Invariant>& invs) {
    std::vector<std::string> out;
    for (const auto& inv : invs) out.push_back(inv.text);
    return out;
}

/// The variables an invariant for this loop may mention.
std::set<std::string> scope_for(const LoopInfo& loop, const c::Ast& ast) {
    std::set<std::string> scope(loop.scope_vars.begin(), loop.scope_vars.end());
    for (const auto& [name, value] : ast.defines) {
        (void)value;
        scope.insert(name);
    }
    return scope;
}

OracleCheck run_oracle_check(const ProgramRun& pr, int loop_number, const acsl::Invariant& inv) {
    OracleCheck oc;
    oc.invariant = inv.text;
    dyn::CheckContext ctx;
    ctx.predicates = &pr.generation.predicates;
    ctx.defines = &pr.ast.defines;
    auto it = pr.traces.loops.find(loop_number);
    if (it == pr.traces.loops.end()) {
        oc.status = dyn::CheckStatus::Inconclusive;
        oc.note = "no trace for this loop";
        return oc;
    }
    dyn::CheckOutcome out = dyn::check_invariant(inv, it->second, ctx);
    oc.status = out.status;
    if (out.counterexample) {
        oc.phase = out.counterexample->phase;
        oc.counterexample = dyn::render_state(out.counterexample->state);
    }
    oc.note = out.note;
    return oc;
}

ProgramRun run_one(const std::string& path, const PipelineOptions& opt,
                   const PromptTemplates& templates, Backend* live, FixtureStore* store) {
    ProgramRun pr;
    pr.path = path;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        try {
            pr.ast = c::parse_program(read_file(path));
        } catch (const ParseError& e) {
            pr.status = "parse_error";
            pr.error = e.what();
        }
        if (pr.status == "ok") {
            pr.extraction = extract(pr.ast);
            if (!opt.dump_extraction) {
                std::unique_ptr<Backend> owned;
                Backend* backend = live;
                if (opt.backend == BackendMode::Replay) {
                    owned = std::make_unique<ReplayBackend>(*store);
                    backend = owned.get();
                } else if (opt.backend == BackendMode::Record) {
                    owned = std::make_unique<RecordingBackend>(*live, *store, fixture_key(path));
                    backend = owned.get();
                }
                Session session(*backend);
                try {
                    pr.generation = run_generation(session, pr.ast, pr.extraction, templates,
                                                   {opt.k, opt.max_candidates});
                } catch (const std::exception& e) {
                    pr.status = "error";
                    pr.error = e.what();
                }
                for (const auto& call : session.calls()) pr.calls[role_name(call.role)]++;

                if (pr.status == "ok") {
                    if (opt.oracle != OracleMode::Off) {
                        dyn::TraceOptions topt;
                        topt.seed = opt.seed;
                        topt.fuel = opt.fuel;
                        pr.traces = dyn::collect_traces(pr.ast, pr.extraction, topt);
                        pr.traces_ok = true;
                    }
                    for (const auto& lr : pr.generation.loops) {
                        if (lr.finalized.empty()) continue;
                        std::vector<acsl::Invariant> keep;
                        for (const auto& inv : lr.finalized) {
                            if (!pr.traces_ok) {
                                keep.push_back(inv);
                                continue;
                            }
                            OracleCheck oc = run_oracle_check(pr, lr.loop_number, inv);
                            if (opt.oracle == OracleMode::Gate &&
                                oc.status == dyn::CheckStatus::Fail) {
                                oc.gated = true;
                            } else {
                                keep.push_back(inv);
                            }
                            pr.checks[lr.loop_number].push_back(std::move(oc));
                        }
                        if (!keep.empty()) pr.emitted[lr.loop_number] = std::move(keep);
                    }

                    const std::string annotated =
                        annotate_program(pr.ast, pr.generation.predicates, pr.extraction, pr.emitted);
                    pr.output_path = output_path_for(path);
                    write_file(pr.output_path, annotated);

                    if (!opt.verifier_cmd.empty()) {
                        pr.verifier = run_external_verifier(pr.output_path, opt.verifier_cmd,
                                                            opt.verifier_timeout, opt.verifier_pattern);
                        pr.verifier_ran = true;
                    }

                    bool all_loops_annotated = true;
                    for (const auto& loop : pr.extraction.loops) {
                        if (!pr.emitted.count(loop.number)) all_loops_annotated = false;
                    }
                    if (pr.verifier_ran) {
                        pr.solved = all_loops_annotated &&
                                    pr.verifier.status == VerifierResult::Status::Pass;
                    } else if (pr.traces_ok) {
                        bool all_pass = true;
                        for (const auto& [number, checks] : pr.checks) {
                            (void)number;
                            for (const auto& oc : checks) {
                                if (!oc.gated && oc.status != dyn::CheckStatus::Pass) all_pass = false;
                            }
                        }
                        pr.solved = all_loops_annotated && all_pass;
                    }
                }
            }
        }
    } catch (const std::exception& e) {
        pr.status = "error";
        pr.error = e.what();
    }
    pr.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    return pr;
}

dyn::CheckStatus cached_check(const ProgramRun& pr, int loop_number, const acsl::Invariant& inv,
                              std::map<std::pair<int, std::string>, dyn::CheckStatus>& cache) {
    const auto key = std::make_pair(loop_number, inv.text);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const dyn::CheckStatus status = run_oracle_check(pr, loop_number, inv).status;
    cache.emplace(key, status);
    return status;
}

ordered_json diagnostics_json(const std::vector<Diagnostic>& diags) {
    ordered_json arr = ordered_json::array();
    for (const auto& d : diags) {
        ordered_json e;
        e["severity"] = severity_name(d.severity);
        if (d.span) e["line"] = d.span->start_line;
        e["message"] = d.message;
        arr.push_back(std::move(e));
    }
    return arr;
}

ordered_json program_json(const ProgramRun& pr, const PipelineOptions& opt) {
    ordered_json je;
    je["path"] = pr.path;
    je["status"] = pr.status;
    if (!pr.error.empty()) je["error"] = pr.error;
    if (pr.status == "parse_error" || pr.status == "error") {
        if (pr.status == "error" && !pr.ast.source_text.empty()) {
            je["extraction"] = ordered_json::parse(to_json(pr.extraction));
        }
        return je;
    }
    je["extraction"] = ordered_json::parse(to_json(pr.extraction));
    if (opt.dump_extraction) return je;

    je["output"] = pr.output_path;
    ordered_json preds = ordered_json::array();
    for (const auto& t : pr.generation.predicates) preds.push_back(t.render());
    je["predicates"] = std::move(preds);

    ordered_json loops = ordered_json::array();
    for (const auto& lr : pr.generation.loops) {
        ordered_json jl;
        jl["number"] = lr.loop_number;
        jl["candidates"] = texts(lr.candidates);
        jl["outcome"] = outcome_name(lr.augmentation.outcome);
        jl["cycles"] = lr.augmentation.cycles;
        ordered_json steps = ordered_json::array();
        for (const auto& s : lr.augmentation.history) {
            ordered_json js;
            js["cycle"] = s.cycle;
            js["verdict"] = s.evaluated_correct ? "correct" : "incorrect";
            if (!s.evaluator_reason.empty()) js["reason"] = s.evaluator_reason;
            js["action"] = action_name(s);
            js["set"] = texts(s.set_after);
            if (!s.note.empty()) js["note"] = s.note;
            steps.push_back(std::move(js));
        }
        jl["augmentation"] = std::move(steps);
        auto emitted = pr.emitted.find(lr.loop_number);
        jl["finalized"] = emitted == pr.emitted.end() ? std::vector<std::string>{}
                                                      : texts(emitted->second);
        ordered_json checks = ordered_json::array();
        auto ck = pr.checks.find(lr.loop_number);
        if (ck != pr.checks.end()) {
            for (const auto& oc : ck->second) {
                ordered_json jc;
                jc["invariant"] = oc.invariant;
                jc["status"] = check_status_name(oc.status);
                if (!oc.phase.empty()) jc["phase"] = oc.phase;
                if (!oc.counterexample.empty()) jc["counterexample"] = oc.counterexample;
                if (!oc.note.empty()) jc["note"] = oc.note;
                if (oc.gated) jc["gated"] = true;
                checks.push_back(std::move(jc));
            }
        }
        jl["checks"] = std::move(checks);
        loops.push_back(std::move(jl));
    }
    je["loops"] = std::move(loops);

    ordered_json calls;
    for (const char* role : {"predicate", "invariant", "evaluate", "optimize"}) {
        auto it = pr.calls.find(role);
        calls[role] = it == pr.calls.end() ? 0 : it->second;
    }
    je["calls"] = std::move(calls);
    je["solved"] = pr.solved ? ordered_json(*pr.solved) : ordered_json(nullptr);

    if (pr.verifier_ran) {
        ordered_json jv;
        jv["status"] = verifier_status_name(pr.verifier.status);
        if (pr.verifier.exit_code >= 0) jv["exit_code"] = pr.verifier.exit_code;
        jv["output"] = pr.verifier.output.substr(0, 2000);
        je["verifier"] = std::move(jv);
    }

    std::vector<Diagnostic> all = pr.diagnostics;
    all.insert(all.end(), pr.generation.diagnostics.begin(), pr.generation.diagnostics.end());
    all.insert(all.end(), pr.extraction.diagnostics.begin(), pr.extraction.diagnostics.end());
    je["diagnostics"] = diagnostics_json(all);
    je["volatile"] = ordered_json{{"elapsed_ms", pr.elapsed_ms}};
    return je;
}

/// Per-invariant accuracy under the external verifier: each invariant is
/// checked on a variant file annotated with it alone.
bool verifier_accepts_alone(const ProgramRun& pr, int loop_number, const acsl::Invariant& inv,
                            const PipelineOptions& opt, int probe_index) {
    FinalizedMap alone;
    alone[loop_number] = {inv};
    const std::string variant =
        annotate_program(pr.ast, pr.generation.predicates, pr.extraction, alone);
    const std::string probe_path =
        pr.output_path + ".probe" + std::to_string(probe_index) + ".c";
    write_file(probe_path, variant);
    VerifierResult vr =
        run_external_verifier(probe_path, opt.verifier_cmd, opt.verifier_timeout, opt.verifier_pattern);
    std::error_code ec;
    fs::remove(probe_path, ec);
    return vr.status == VerifierResult::Status::Pass;
}

ordered_json metrics_json(const std::vector<ProgramRun>& programs, const PipelineOptions& opt,
                          const PromptTemplates& templates, const FixtureStore* store) {
    ordered_json m;
    const bool verifier_checker = !opt.verifier_cmd.empty();
    const bool oracle_checker = !verifier_checker && opt.oracle != OracleMode::Off;
    m["checker"] = verifier_checker ? "verifier" : (oracle_checker ? "oracle" : "none");
    m["programs"] = programs.size();

    if (!verifier_checker && !oracle_checker) {
        m["note"] = "no checker configured; completion, Acc and acc@k are unavailable";
        return m;
    }

    int solved = 0;
    for (const auto& pr : programs) {
        if (pr.solved && *pr.solved) ++solved;
    }
    m["solved"] = solved;
    m["completion"] = double(solved) / double(programs.size());

    long finalized = 0;
    long passing = 0;
    std::vector<std::map<std::pair<int, std::string>, dyn::CheckStatus>> caches(programs.size());
    for (std::size_t i = 0; i < programs.size(); ++i) {
        const ProgramRun& pr = programs[i];
        if (pr.status != "ok") continue;
        int probe = 0;
        for (const auto& [number, invs] : pr.emitted) {
            for (const auto& inv : invs) {
                ++finalized;
                bool pass = false;
                if (verifier_checker) {
                    pass = verifier_accepts_alone(pr, number, inv, opt, probe++);
                } else {
                    pass = cached_check(pr, number, inv, caches[i]) == dyn::CheckStatus::Pass;
                }
                if (pass) ++passing;
            }
        }
    }
    m["finalized"] = finalized;
    m["passing"] = passing;
    m["acc"] = finalized == 0 ? ordered_json(nullptr) : ordered_json(double(passing) / double(finalized));

    // acc@k: the augmentation is replayed from the stored fixtures at every
    // budget from 0 (raw candidates) to k, and each budget's surviving sets
    // are measured against the trace oracle.
    if (opt.oracle == OracleMode::Off) {
        m["acc_at_note"] = "acc@k needs the trace oracle; it was disabled";
        return m;
    }
    if (store == nullptr) {
        m["acc_at_note"] = "acc@k needs stored fixtures; none were available";
        return m;
    }
    ordered_json curve = ordered_json::array();
    for (int budget = 0; budget <= opt.k; ++budget) {
        long fin = 0;
        long pass = 0;
        long rejected = 0;
        for (std::size_t i = 0; i < programs.size(); ++i) {
            const ProgramRun& pr = programs[i];
            if (pr.status != "ok" || !pr.traces_ok) continue;
            std::set<std::string> predicate_names;
            for (const auto& t : pr.generation.predicates) predicate_names.insert(t.name);
            for (const auto& lr : pr.generation.loops) {
                std::vector<acsl::Invariant> set;
                bool was_rejected = false;
                if (budget == 0) {
                    set = lr.candidates;
                    was_rejected = lr.candidates.empty();
                } else {
                    ReplayBackend replay(*store);
                    Session session(replay);
                    FinalizedMap prefix;
                    for (const auto& [number, invs] : pr.generation.finalized) {
                        if (number < lr.loop_number) prefix[number] = invs;
                    }
                    const LoopInfo* loop = pr.extraction.find_loop(lr.loop_number);
                    auto hooks = make_augmentation_hooks(templates, pr.ast, pr.extraction, *loop,
                                                         pr.generation.predicates, prefix);
                    AugmentationResult ar = augment(session, lr.candidates, budget, hooks);
                    was_rejected = ar.outcome == AugmentationOutcome::Rejected;
                    set = std::move(ar.invariants);
                }
                if (was_rejected) {
                    ++rejected;
                    continue;
                }
                const LoopInfo* loop = pr.extraction.find_loop(lr.loop_number);
                const auto scope = scope_for(*loop, pr.ast);
                for (const auto& inv : set) {
                    std::string offender;
                    if (!invariant_in_scope(inv, scope, predicate_names, &offender)) continue;
                    ++fin;
                    if (cached_check(pr, lr.loop_number, inv, caches[i]) == dyn::CheckStatus::Pass) {
                        ++pass;
                    }
                }
            }
        }
        ordered_json row;
        row["budget"] = budget;
        row["rejected"] = rejected;
        row["finalized"] = fin;
        row["passing"] = pass;
        row["acc"] = fin == 0 ? ordered_json(nullptr) : ordered_json(double(pass) / double(fin));
        curve.push_back(std::move(row));
    }
    m["acc_at"] = std::move(curve);
    return m;
}

}  // namespace

std::vector<std::string> collect_inputs(const std::vector<std::string>& paths) {
    std::vector<std::string> out;
    for (const auto& p : paths) {
        fs::path fp(p);
        if (fs::is_regular_file(fp)) {
            out.push_back(p);
        } else if (fs::is_directory(fp)) {
            for (const auto& entry : fs::recursive_directory_iterator(fp)) {
                if (!entry.is_regular_file()) continue;
                const std::string name = entry.path().string();
                if (!ends_with(name, ".c") || ends_with(name, ".acinv.c")) continue;
                out.push_back(entry.path().lexically_normal().string());
            }
        } else {
            throw std::invalid_argument("no such path: " + p);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string output_path_for(const std::string& input) {
    if (ends_with(input, ".c")) {
        return input.substr(0, input.size() - 2) + ".acinv.c";
    }
    return input + ".acinv.c";
}

std::string annotate_program(const c::Ast& ast, const std::vector<acsl::PredicateTemplate>& predicates,
                             const ExtractionResult& ex, const FinalizedMap& emitted) {
    std::vector<Insertion> insertions;
    if (!predicates.empty() && !ast.functions.empty()) {
        int first_line = ast.functions.front().span.start_line;
        for (const auto& fn : ast.functions) {
            first_line = std::min(first_line, fn.span.start_line);
        }
        std::string block;
        for (const auto& t : predicates) {
            if (!block.empty()) block += "\n";
            block += t.render();
        }
        insertions.push_back({first_line, std::move(block)});
    }
    for (const auto& [number, invs] : emitted) {
        if (invs.empty()) continue;
        const LoopInfo* loop = ex.find_loop(number);
        if (loop == nullptr) continue;
        insertions.push_back({loop->annotation_line, acsl::render_loop_annotation(invs)});
    }
    return emit_annotated(ast.source_text, insertions);
}

RunResult run_pipeline(const std::vector<std::string>& inputs, const PipelineOptions& options,
                       Backend* live_backend, FixtureStore* store) {
    if (!options.dump_extraction) {
        if (options.backend == BackendMode::Replay && store == nullptr) {
            throw std::invalid_argument("replay mode needs a fixture store");
        }
        if (options.backend == BackendMode::Record && (store == nullptr || live_backend == nullptr)) {
            throw std::invalid_argument("record mode needs a fixture store and a live backend");
        }
        if (options.backend == BackendMode::Live && live_backend == nullptr) {
            throw std::invalid_argument("live mode needs a backend");
        }
    }

    const auto t0 = std::chrono::steady_clock::now();
    const PromptTemplates templates = options.prompts_dir.empty()
                                          ? PromptTemplates::defaults()
                                          : PromptTemplates::load_dir(options.prompts_dir);

    RunResult result;
    result.programs.resize(inputs.size());
    const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(inputs.size() ? inputs.size() : 1)));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < inputs.size();) {
            result.programs[i] = run_one(inputs[i], options, templates, live_backend, store);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    ordered_json report;
    report["schema"] = 1;
    ordered_json config;
    config["backend"] = options.backend == BackendMode::Live     ? "live"
                        : options.backend == BackendMode::Record ? "record"
                                                                 : "replay";
    config["k"] = options.k;
    config["oracle"] = options.oracle == OracleMode::Off    ? "off"
                       : options.oracle == OracleMode::Gate ? "gate"
                                                            : "report";
    config["seed"] = options.seed;
    config["fuel"] = options.fuel;
    config["jobs"] = options.jobs;
    config["fixtures"] = options.fixtures_dir;
    config["prompts"] = options.prompts_dir;
    config["verifier"] = options.verifier_cmd;
    config["dump_extraction"] = options.dump_extraction;
    report["config"] = std::move(config);

    ordered_json programs = ordered_json::array();
    for (const auto& pr : result.programs) programs.push_back(program_json(pr, options));
    report["programs"] = std::move(programs);

    if (result.programs.empty()) {
        report["note"] = "no programs; metrics omitted";
    } else if (options.dump_extraction) {
        report["note"] = "extraction dump only; metrics omitted";
    } else {
        report["metrics"] = metrics_json(result.programs, options, templates, store);
    }
    const long long total_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::steady_clock::now() - t0)
                                   .count();
    report["volatile"] = ordered_json{{"elapsed_ms", total_ms}};
    result.report = std::move(report);
    return result;
}

}  // namespace acinv
