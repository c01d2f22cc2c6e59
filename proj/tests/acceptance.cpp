// Acceptance gate: one line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "acinv/dynamic_checker.hpp"
#include "acinv/emit.hpp"
#include "acinv/extraction.hpp"
#include "acinv/generation.hpp"
#include "acinv/parser.hpp"
#include "acinv/pipeline.hpp"
#include "support/corpus.hpp"

using namespace acinv;
namespace fs = std::filesystem;
using nlohmann::ordered_json;
using testsupport::slurp;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void accept(bool cond, const std::string& what) {
    if (!cond) throw Failure(what);
}

std::string data_file(const std::string& name) {
    return std::string(ACINV_TEST_DATA_DIR) + "/" + name;
}

std::vector<std::string> names(const std::vector<MutatedVar>& vars) {
    std::vector<std::string> out;
    for (const auto& v : vars) out.push_back(v.name);
    return out;
}

// Scratch corpus shared by the criteria that need recorded fixtures.
struct Scratch {
    std::string data;
    std::string fixtures;
};

const Scratch& scratch() {
    static Scratch s = [] {
        Scratch s;
        const std::string root = testsupport::make_temp_dir();
        s.data = root + "/data";
        s.fixtures = root + "/fixtures";
        testsupport::copy_corpus(ACINV_TEST_DATA_DIR, s.data);
        testsupport::record_fixtures(s.data, s.fixtures);
        return s;
    }();
    return s;
}

RunResult replay(const std::vector<std::string>& paths) {
    FixtureStore store(scratch().fixtures);
    PipelineOptions opt;
    opt.backend = BackendMode::Replay;
    return run_pipeline(collect_inputs(paths), opt, nullptr, &store);
}

// ---- criterion bodies ----

void extraction_goldens() {
    const auto t0 = std::chrono::steady_clock::now();
    ExtractionResult r = extract(c::parse_program(slurp(data_file("fig4.c"))));
    accept(r.loops.size() == 2, "expected two loops in the volume scan");
    const LoopInfo& inner = r.loops[0];
    const LoopInfo& outer = r.loops[1];
    accept(inner.number == 1 && inner.depth == 2, "inner loop must be numbered 1");
    accept(names(inner.mutated_vars) == std::vector<std::string>{"i", "vd"},
           "inner loop variables must be {i, vd}");
    accept(outer.number == 2 && outer.depth == 1, "outer loop must be numbered 2");
    accept(names(outer.mutated_vars) == std::vector<std::string>{"i", "pcm", "plane", "vd"},
           "outer loop variables must be {plane, pcm} plus the inner set");
    bool pcm_display = false;
    for (const auto& v : outer.mutated_vars) {
        if (v.name == "pcm") pcm_display = v.display == "pcm[]";
    }
    accept(pcm_display, "pcm must display as pcm[]");
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    accept(ms < 1000, "extraction took " + std::to_string(ms) + " ms, limit 1000");
}

void recursiveness() {
    ExtractionResult stack = extract(c::parse_program(slurp(data_file("stack.c"))));
    accept(!stack.data_structures.empty() && !stack.data_structures[0].recursive,
           "the array stack must classify as non-recursive");

    ExtractionResult list = extract(c::parse_program(slurp(data_file("fig8.c"))));
    accept(!list.data_structures.empty() && list.data_structures[0].recursive,
           "the linked node must classify as recursive");

    ExtractionResult mutual = extract(c::parse_program(
        "struct A { struct B *b; };\n"
        "struct B { struct A *a; };\n"));
    bool flagged = false;
    for (const auto& d : mutual.diagnostics) {
        if (d.message.find("mutually recursive") != std::string::npos) flagged = true;
    }
    accept(flagged, "mutual recursion must emit a diagnostic");
    accept(!mutual.data_structures[0].recursive && !mutual.data_structures[1].recursive,
           "mutually recursive structs are not self-recursive");
}

void hoare_oracle() {
    const auto t0 = std::chrono::steady_clock::now();

    c::Ast fig1 = c::parse_program(slurp(data_file("fig1.c")));
    ExtractionResult ex1 = extract(fig1);
    dyn::TraceSet traces = dyn::collect_traces(fig1, ex1, {});
    const dyn::LoopTrace& trace = traces.loops.at(1);
    dyn::CheckContext ctx;

    auto inv = [](const char* text) {
        return acsl::Invariant::from(acsl::parse_acsl_expr(text));
    };
    accept(dyn::check_invariant(inv("0 <= i <= 30"), trace, ctx).status ==
               dyn::CheckStatus::Pass,
           "0 <= i <= 30 must pass on the counting loop");

    dyn::CheckOutcome strict = dyn::check_invariant(inv("0 <= i < 30"), trace, ctx);
    accept(strict.status == dyn::CheckStatus::Fail, "0 <= i < 30 must fail");
    accept(strict.counterexample && strict.counterexample->phase == "maintenance",
           "the strict bound must break in the maintenance step");
    bool at29 = false;
    if (strict.counterexample) {
        for (const auto& [name, value] : strict.counterexample->state.vars) {
            if (name == "i") at29 = value.i == 29;
        }
    }
    accept(at29, "the maintenance counterexample must start from i=29");

    accept(dyn::check_invariant(inv("\\true"), trace, ctx).status == dyn::CheckStatus::Pass,
           "\\true must pass");

    c::Ast fig8 = c::parse_program(slurp(data_file("fig8.c")));
    ExtractionResult ex8 = extract(fig8);
    dyn::TraceSet rev = dyn::collect_traces(fig8, ex8, {});
    const dyn::LoopTrace& rtrace = rev.loops.at(1);
    const dyn::State* three = nullptr;
    for (const auto& st : rtrace.exits) {
        if (st.heap.size() == 3) three = &st;
    }
    accept(three != nullptr, "a three node input list must reach the loop exit");
    int newn = -1;
    for (const auto& [name, value] : three->vars) {
        if (name == "newn") newn = value.ptr;
    }
    accept(newn == 1, "newn must point at the old tail");
    accept(three->heap.at(1).members.at("next").ptr == 2 &&
               three->heap.at(2).members.at("next").ptr == 3 &&
               three->heap.at(3).members.at("next").ptr == 0,
           "the exit chain must run tail to head");
    accept(three->heap.at(1).members.at("value").i == 30 &&
               three->heap.at(2).members.at("value").i == 20 &&
               three->heap.at(3).members.at("value").i == 10,
           "the exit chain must carry the values C, B, A");

    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    accept(ms < 5000, "oracle suite took " + std::to_string(ms) + " ms, limit 5000");
}

void augmentation_walkthrough() {
    RunResult rr = replay({scratch().data + "/plane.c", scratch().data + "/planebad.c"});
    accept(rr.programs.size() == 2, "two programs expected");

    const ProgramRun& plane = rr.programs[0];
    accept(plane.status == "ok", "plane must process cleanly");
    const LoopGenerationResult& outer = plane.generation.loops[1];
    accept(outer.loop_number == 2, "the walk-through targets the outer loop");
    std::vector<std::string> finalized;
    for (const auto& i : outer.finalized) finalized.push_back(i.text);
    accept(finalized == std::vector<std::string>{"0 <= plane <= nb_planes"},
           "0 <= plane < nb_planes must finalize as 0 <= plane <= nb_planes");
    accept(outer.augmentation.cycles <= 2, "the weakening must settle within 2 cycles");
    accept(outer.augmentation.history.size() <= 5, "history must stay within k");

    const ProgramRun& bad = rr.programs[1];
    const LoopGenerationResult& loop = bad.generation.loops[0];
    accept(loop.augmentation.outcome == AugmentationOutcome::Rejected,
           "a declined incorrect candidate must be rejected");
    accept(loop.augmentation.cycles == 1, "the rejection must take exactly one cycle");
}

void order_and_budget() {
    accept(GenerationOptions{}.k == 5 && PipelineOptions{}.k == 5, "default k must be 5");

    c::Ast ast = c::parse_program(slurp(data_file("nest4.c")));
    ExtractionResult ex = extract(ast);
    ScriptedBackend backend;
    for (const auto& r : testsupport::script_for("nest4")) backend.push(r);
    Session session(backend);
    GenerationResult gen = run_generation(session, ast, ex, PromptTemplates::defaults(), {});

    accept(gen.loops.size() == 4, "four loops expected");
    for (int i = 0; i < 4; ++i) {
        accept(gen.loops[i].loop_number == i + 1, "loops must be queried 1,2,3,4");
    }
    // The query for loop n sees the annotations finalized for loops 1..n-1
    // and none from later loops, which pins the order the generator used.
    std::vector<std::string> invariant_prompts;
    for (const auto& s : backend.seen) {
        if (s.role == Role::Invariant) invariant_prompts.push_back(s.user);
    }
    accept(invariant_prompts.size() == 4, "one invariant query per loop");
    const char* marks[] = {"loop invariant 0 <= d;", "loop invariant 0 <= c;",
                           "loop invariant 0 <= b;", "loop invariant 0 <= a;"};
    for (int q = 0; q < 4; ++q) {
        for (int m = 0; m < 4; ++m) {
            const bool seen = invariant_prompts[q].find(marks[m]) != std::string::npos;
            accept(seen == (m < q), "query " + std::to_string(q + 1) +
                                        " must carry exactly the earlier annotations");
        }
    }

    int evaluations = 0;
    std::size_t candidates = 0;
    for (const auto& call : session.calls()) {
        if (call.role == Role::Evaluate) ++evaluations;
    }
    for (const auto& lr : gen.loops) candidates += lr.candidates.size();
    accept(evaluations <= 5 * static_cast<int>(candidates),
           "evaluator calls must stay within k times the candidate count");

    // With an endlessly agreeable script the budget itself must stop the loop
    // after exactly k cycles.
    c::Ast fig1 = c::parse_program(slurp(data_file("fig1.c")));
    ExtractionResult ex1 = extract(fig1);
    ScriptedBackend greedy;
    greedy.push(testsupport::invariants({"0 <= i"}));
    for (int cycle = 0; cycle < 5; ++cycle) {
        greedy.push(testsupport::kCorrect);
        greedy.push("RESULT: STRENGTHENED\n" +
                    testsupport::invariants({"i <= " + std::to_string(30 + cycle)}));
    }
    Session gsession(greedy);
    GenerationResult ggen = run_generation(gsession, fig1, ex1, PromptTemplates::defaults(), {});
    accept(ggen.loops[0].augmentation.cycles == 5, "the default budget must stop at 5 cycles");
}

ordered_json strip_volatile(ordered_json v) {
    if (v.is_object()) {
        v.erase("volatile");
        for (auto& [key, value] : v.items()) {
            (void)key;
            value = strip_volatile(value);
        }
    } else if (v.is_array()) {
        for (auto& item : v) item = strip_volatile(item);
    }
    return v;
}

void determinism() {
    const Scratch& s = scratch();
    const std::string r1 = s.data + "/../r1.json";
    const std::string r2 = s.data + "/../r2.json";
    const std::string base = std::string(ACINV_BIN_PATH) + " run " + s.data +
                             " --fixtures " + s.fixtures + " --report ";

    accept(std::system((base + r1 + " > /dev/null 2>&1").c_str()) == 0,
           "first CLI run must exit 0");
    std::map<std::string, std::string> files1;
    for (const auto& entry : fs::recursive_directory_iterator(s.data)) {
        const std::string name = entry.path().string();
        if (name.size() >= 8 && name.compare(name.size() - 8, 8, ".acinv.c") == 0) {
            files1[name] = slurp(name);
        }
    }
    accept(!files1.empty(), "the first run must write annotated files");

    accept(std::system((base + r2 + " > /dev/null 2>&1").c_str()) == 0,
           "second CLI run must exit 0");
    for (const auto& [name, bytes] : files1) {
        accept(slurp(name) == bytes, "annotated file changed between runs: " + name);
    }
    const ordered_json a = strip_volatile(ordered_json::parse(slurp(r1)));
    const ordered_json b = strip_volatile(ordered_json::parse(slurp(r2)));
    accept(a == b, "reports must match once the volatile section is removed");
}

void round_trips() {
    int parsed = 0;
    for (const auto& entry : fs::recursive_directory_iterator(data_file(""))) {
        if (!entry.is_regular_file() || entry.path().extension() != ".c") continue;
        const std::string src = slurp(entry.path().string());
        c::Ast ast;
        try {
            ast = c::parse_program(src);
        } catch (const ParseError&) {
            continue;  // the deliberately broken corpus entry
        }
        ++parsed;
        accept(ast.source_text == src, "parse must keep the bytes of " + entry.path().string());
        accept(emit_annotated(src, {}) == src,
               "emit must reproduce " + entry.path().string());
    }
    accept(parsed >= 17, "the corpus round-trip must cover the whole tree");

    // Every invariant and definition served by the shot library must survive
    // render -> parse structurally intact.
    PromptTemplates t = PromptTemplates::defaults();
    int invariants_checked = 0;
    int templates_checked = 0;
    auto scan = [&](const std::string& text) {
        std::vector<std::string> blocks;
        std::string cur;
        bool in_block = false;
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            std::string trimmed = line;
            trimmed.erase(0, trimmed.find_first_not_of(" \t"));
            if (trimmed.rfind("```", 0) == 0) {
                if (in_block) blocks.push_back(cur);
                cur.clear();
                in_block = !in_block;
                continue;
            }
            if (in_block) cur += line + "\n";
        }
        for (const auto& block : blocks) {
            std::istringstream bl(block);
            while (std::getline(bl, line)) {
                std::string body = line;
                body.erase(0, body.find_first_not_of(" \t"));
                if (body.rfind("loop invariant", 0) != 0) continue;
                body = body.substr(std::string("loop invariant").size());
                if (!body.empty() && body.back() == ';') body.pop_back();
                acsl::AcslExprPtr e = acsl::parse_acsl_expr(body);
                acsl::AcslExprPtr again = acsl::parse_acsl_expr(acsl::render(e));
                accept(acsl::equal(e, again), "invariant must round-trip: " + line);
                ++invariants_checked;
            }
            if (block.find("predicate ") != std::string::npos ||
                block.find("inductive ") != std::string::npos) {
                ParsedTemplates parsed = parse_template_response("```acsl\n" + block + "```\n");
                accept(parsed.rejected_chunks.empty(), "every shot definition must parse");
                for (const auto& def : parsed.templates) {
                    acsl::PredicateTemplate back = acsl::parse_predicate_template(def.render());
                    accept(back.kind == def.kind && back.name == def.name &&
                               back.params == def.params,
                           "definition head must round-trip: " + def.name);
                    if (def.kind == acsl::PredicateTemplate::Kind::Predicate) {
                        accept(acsl::equal(def.body, back.body),
                               "predicate body must round-trip: " + def.name);
                    } else {
                        accept(back.cases.size() == def.cases.size(),
                               "inductive cases must round-trip: " + def.name);
                        for (std::size_t i = 0; i < def.cases.size(); ++i) {
                            accept(back.cases[i].name == def.cases[i].name &&
                                       acsl::equal(back.cases[i].formula, def.cases[i].formula),
                                   "inductive case must round-trip: " + def.name);
                        }
                    }
                    ++templates_checked;
                }
            }
        }
    };
    for (const auto* shots : {&t.predicate_shots, &t.invariant_shots,
                              &t.evaluate_shots, &t.optimize_shots}) {
        for (const auto& shot : *shots) {
            scan(shot.input);
            scan(shot.output);
        }
    }
    accept(invariants_checked > 0 && templates_checked > 0,
           "the shot library must contribute invariants and definitions");
}

void metrics() {
    RunResult rr = replay({scratch().data + "/corpus"});
    const ordered_json& m = rr.report["metrics"];
    accept(m["programs"] == 10, "the synthetic corpus has ten programs");
    accept(m["solved"] == 6 && m["completion"] == 6.0 / 10.0,
           "completion must equal the hand count 6/10");
    accept(m["finalized"] == 12 && m["passing"] == 9 && m["acc"] == 9.0 / 12.0,
           "Acc must equal the hand count 9/12");
    const ordered_json& curve = m["acc_at"];
    accept(curve.size() == 6, "acc@k must cover budgets 0..5");
    for (std::size_t j = 2; j < curve.size(); ++j) {
        accept(curve[j]["rejected"].get<int>() <= curve[j - 1]["rejected"].get<int>(),
               "rejected count must not grow with the budget");
    }
    accept(curve[1]["rejected"] == 2 && curve[5]["rejected"] == 1,
           "the scripted fixtures pin the rejected counts");
    accept(curve[5]["acc"] == m["acc"], "acc@k at full budget must equal Acc");
}

struct Criterion {
    const char* title;
    std::function<void()> body;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"extraction goldens on the volume scan", extraction_goldens},
        {"recursive structure classification", recursiveness},
        {"trace based Hoare oracle", hoare_oracle},
        {"augmentation walk-through on replay fixtures", augmentation_walkthrough},
        {"query order and budget", order_and_budget},
        {"byte identical replay runs", determinism},
        {"parse/emit and ACSL round-trips", round_trips},
        {"metrics on the hand labeled corpus", metrics},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].body();
            const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
            std::cout << "[PASS] " << (i + 1) << ". " << criteria[i].title << " (" << ms
                      << " ms)\n";
        } catch (const std::exception& e) {
            ++failures;
            std::cout << "[FAIL] " << (i + 1) << ". " << criteria[i].title << ": " << e.what()
                      << "\n";
        }
    }
    if (failures == 0) {
        std::cout << "all " << criteria.size() << " acceptance criteria hold\n";
    } else {
        std::cout << failures << " of " << criteria.size() << " acceptance criteria failed\n";
    }
    return failures == 0 ? 0 : 1;
}
