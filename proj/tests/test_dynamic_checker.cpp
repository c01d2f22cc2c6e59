#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "acinv/dynamic_checker.hpp"
#include "acinv/extraction.hpp"
#include "acinv/parser.hpp"

using namespace acinv;
using dyn::CheckStatus;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string data_file(const std::string& name) {
    return std::string(ACINV_TEST_DATA_DIR) + "/" + name;
}

struct Prepared {
    c::Ast ast;
    ExtractionResult ex;
    dyn::TraceSet traces;
};

Prepared run_on(const std::string& source, dyn::TraceOptions options = {}) {
    Prepared p;
    p.ast = c::parse_program(source);
    p.ex = extract(p.ast);
    p.traces = dyn::collect_traces(p.ast, p.ex, options);
    return p;
}

acsl::Invariant inv(const std::string& text) {
    return acsl::Invariant::from(acsl::parse_acsl_expr(text));
}

std::int64_t var_int(const dyn::State& st, const std::string& name) {
    REQUIRE(st.vars.count(name));
    REQUIRE(st.vars.at(name).kind == dyn::Value::Kind::Int);
    return st.vars.at(name).i;
}

int var_ptr(const dyn::State& st, const std::string& name) {
    REQUIRE(st.vars.count(name));
    REQUIRE(st.vars.at(name).kind == dyn::Value::Kind::Ptr);
    return st.vars.at(name).ptr;
}

}  // namespace

TEST_CASE("counting loop traces and Hoare conditions") {
    Prepared p = run_on(read_file(data_file("fig1.c")));
    dyn::CheckContext ctx;
    ctx.defines = &p.ast.defines;

    REQUIRE(p.traces.loops.count(1));
    const dyn::LoopTrace& trace = p.traces.loops.at(1);

    CHECK(p.traces.envs_run == 1);
    CHECK(p.traces.traps.empty());
    REQUIRE(trace.entries.size() == 1);
    CHECK(var_int(trace.entries[0], "i") == 0);
    CHECK(var_int(trace.entries[0], "n") == 30);
    CHECK(trace.pairs.size() == 30);
    CHECK(trace.iterations == 30);
    REQUIRE(trace.exits.size() == 1);
    CHECK(var_int(trace.exits[0], "i") == 30);

    SUBCASE("a true invariant passes") {
        auto out = dyn::check_invariant(inv("0 <= i <= 30"), trace, ctx);
        CHECK(out.status == CheckStatus::Pass);
        CHECK_FALSE(out.counterexample.has_value());
    }
    SUBCASE("the strict bound fails maintenance on the last iteration") {
        auto out = dyn::check_invariant(inv("0 <= i < 30"), trace, ctx);
        REQUIRE(out.status == CheckStatus::Fail);
        REQUIRE(out.counterexample.has_value());
        CHECK(out.counterexample->phase == "maintenance");
        CHECK(var_int(out.counterexample->state, "i") == 29);
        CHECK(dyn::render_state(out.counterexample->state) == "{i = 29, n = 30}");
    }
    SUBCASE("an equality that only holds at entry fails from its first pair") {
        auto out = dyn::check_invariant(inv("i == 0"), trace, ctx);
        REQUIRE(out.status == CheckStatus::Fail);
        CHECK(out.counterexample->phase == "maintenance");
        CHECK(var_int(out.counterexample->state, "i") == 0);
    }
    SUBCASE("quantified invariants evaluate over the extracted range") {
        auto out = dyn::check_invariant(
            inv("\\forall integer k; 0 <= k < i ==> k < 30"), trace, ctx);
        CHECK(out.status == CheckStatus::Pass);
    }
    SUBCASE("an unbounded quantifier is inconclusive, not passing") {
        auto out = dyn::check_invariant(
            inv("\\forall integer k; k <= i ==> k <= 30"), trace, ctx);
        CHECK(out.status == CheckStatus::Inconclusive);
        CHECK(out.note.find("bound") != std::string::npos);
    }
    SUBCASE("an enormous quantifier range is inconclusive") {
        auto out = dyn::check_invariant(
            inv("\\forall integer k; 0 <= k < 100000 ==> k >= 0"), trace, ctx);
        CHECK(out.status == CheckStatus::Inconclusive);
    }
    SUBCASE("an unknown variable is inconclusive with a note") {
        auto out = dyn::check_invariant(inv("z == 0"), trace, ctx);
        CHECK(out.status == CheckStatus::Inconclusive);
        CHECK(out.note.find("unknown variable z") != std::string::npos);
    }
}

TEST_CASE("list reversal produces a reversed heap") {
    Prepared p = run_on(read_file(data_file("fig8.c")));
    dyn::CheckContext ctx;
    ctx.defines = &p.ast.defines;

    REQUIRE(p.traces.loops.count(1));
    const dyn::LoopTrace& trace = p.traces.loops.at(1);

    // One environment per sampled chain length: empty, one, two, three.
    CHECK(p.traces.envs_run == 4);
    CHECK(trace.entries.size() == 4);
    REQUIRE(trace.exits.size() == 4);

    const dyn::State* three = nullptr;
    for (const auto& st : trace.exits) {
        if (st.heap.size() == 3) three = &st;
    }
    REQUIRE(three != nullptr);
    CHECK(var_ptr(*three, "curr") == 0);
    // The sampler allocates the tail first, so the original list is
    // 3 -> 2 -> 1 -> null; reversal leaves newn at the old tail.
    CHECK(var_ptr(*three, "newn") == 1);
    CHECK(var_ptr(*three, "old") == 0);
    CHECK(three->heap.at(1).members.at("next").ptr == 2);
    CHECK(three->heap.at(2).members.at("next").ptr == 3);
    CHECK(three->heap.at(3).members.at("next").ptr == 0);
    CHECK(three->heap.at(1).members.at("value").i == 30);
    CHECK(three->heap.at(3).members.at("value").i == 10);

    SUBCASE("an inductive list predicate holds at every head") {
        std::vector<acsl::PredicateTemplate> preds;
        preds.push_back(acsl::parse_predicate_template(
            "inductive is_linked_list(struct node *c, struct node *t) {\n"
            "  case empty: c == t;\n"
            "  case step: c != \\null && is_linked_list(c->next, t);\n"
            "}"));
        dyn::CheckContext with_preds;
        with_preds.defines = &p.ast.defines;
        with_preds.predicates = &preds;

        auto out = dyn::check_invariant(inv("is_linked_list(curr, \\null)"),
                                        trace, with_preds);
        CHECK(out.status == CheckStatus::Pass);

        auto unknown = dyn::check_invariant(inv("is_sorted(curr)"), trace,
                                            with_preds);
        CHECK(unknown.status == CheckStatus::Inconclusive);
    }
    SUBCASE("validity of the head fails on the empty chain") {
        auto out = dyn::check_invariant(inv("\\valid(head)"), trace, ctx);
        REQUIRE(out.status == CheckStatus::Fail);
        CHECK(out.counterexample->phase == "initialization");
        CHECK(var_ptr(out.counterexample->state, "head") == 0);
    }
}

TEST_CASE("inductive evaluation terminates on cyclic heaps") {
    std::vector<acsl::PredicateTemplate> preds;
    preds.push_back(acsl::parse_predicate_template(
        "inductive is_linked_list(struct node *c, struct node *t) {\n"
        "  case empty: c == t;\n"
        "  case step: c != \\null && is_linked_list(c->next, t);\n"
        "}"));
    dyn::CheckContext ctx;
    ctx.predicates = &preds;

    dyn::State cyclic;
    cyclic.vars["curr"] = dyn::Value::make_ptr(1);
    dyn::HeapNode a;
    a.type_name = "node";
    a.members["value"] = dyn::Value::make_int(1);
    a.members["next"] = dyn::Value::make_ptr(2);
    dyn::HeapNode b;
    b.type_name = "node";
    b.members["value"] = dyn::Value::make_int(2);
    b.members["next"] = dyn::Value::make_ptr(1);
    cyclic.heap[1] = a;
    cyclic.heap[2] = b;

    dyn::LoopTrace trace;
    trace.entries.push_back(cyclic);

    auto out = dyn::check_invariant(inv("is_linked_list(curr, \\null)"), trace, ctx);
    REQUIRE(out.status == CheckStatus::Fail);
    CHECK(out.counterexample->phase == "initialization");
}

TEST_CASE("stack fill exercises calls, structs, and defines") {
    Prepared p = run_on(read_file(data_file("stack.c")));
    dyn::CheckContext ctx;
    ctx.defines = &p.ast.defines;

    REQUIRE(p.traces.loops.count(1));
    const dyn::LoopTrace& trace = p.traces.loops.at(1);
    CHECK(p.traces.envs_run == 8);
    CHECK_FALSE(trace.entries.empty());

    SUBCASE("bounds through a define pass") {
        auto out = dyn::check_invariant(inv("0 <= s->top <= MAX_SIZE"), trace, ctx);
        CHECK(out.status == CheckStatus::Pass);
        auto valid = dyn::check_invariant(inv("\\valid(s)"), trace, ctx);
        CHECK(valid.status == CheckStatus::Pass);
        auto low = dyn::check_invariant(inv("0 <= i"), trace, ctx);
        CHECK(low.status == CheckStatus::Pass);
    }
    SUBCASE("the saturation case breaks the naive equality") {
        auto out = dyn::check_invariant(inv("s->top == i"), trace, ctx);
        REQUIRE(out.status == CheckStatus::Fail);
        CHECK(out.counterexample->phase == "maintenance");
        CHECK(var_int(out.counterexample->state, "i") == 100);
    }
}

TEST_CASE("fuel exhaustion aborts without losing collected states") {
    const std::string source =
        "int spin() {\n"
        "    int x = 0;\n"
        "    while (1) {\n"
        "        x = x + 1;\n"
        "    }\n"
        "    while (x < 0) {\n"
        "        x = x + 1;\n"
        "    }\n"
        "    return x;\n"
        "}\n";
    dyn::TraceOptions options;
    options.fuel = 500;
    Prepared p = run_on(source, options);
    dyn::CheckContext ctx;
    ctx.defines = &p.ast.defines;

    REQUIRE(p.traces.traps.size() == 1);
    CHECK(p.traces.traps[0].kind == dyn::TrapKind::FuelExhausted);
    CHECK(p.traces.fuel_used == 500);

    const dyn::LoopTrace& spin = p.traces.loops.at(1);
    CHECK(spin.entries.size() == 1);
    // Recording caps at 128 pairs plus the final pending one.
    CHECK(spin.pairs.size() == 129);
    CHECK(spin.exits.empty());
    auto out = dyn::check_invariant(inv("x >= 0"), spin, ctx);
    CHECK(out.status == CheckStatus::Pass);

    const dyn::LoopTrace& unreached = p.traces.loops.at(2);
    CHECK(unreached.entries.empty());
    auto un = dyn::check_invariant(inv("x >= 0"), unreached, ctx);
    CHECK(un.status == CheckStatus::Inconclusive);
    CHECK(un.note.find("never reached") != std::string::npos);
}

TEST_CASE("do-while records the entry state before the first iteration") {
    const std::string source =
        "int h(int n) {\n"
        "    int i = 0;\n"
        "    do {\n"
        "        i = i + 1;\n"
        "    } while (i < n);\n"
        "    return i;\n"
        "}\n";
    Prepared p = run_on(source);
    dyn::CheckContext ctx;
    ctx.defines = &p.ast.defines;
    const dyn::LoopTrace& trace = p.traces.loops.at(1);

    CHECK_FALSE(trace.entries.empty());
    for (const auto& entry : trace.entries) {
        CHECK(var_int(entry, "i") == 0);
    }
    auto low = dyn::check_invariant(inv("0 <= i"), trace, ctx);
    CHECK(low.status == CheckStatus::Pass);
    auto wrong = dyn::check_invariant(inv("i >= 1"), trace, ctx);
    REQUIRE(wrong.status == CheckStatus::Fail);
    CHECK(wrong.counterexample->phase == "initialization");
}

TEST_CASE("continue in a for loop still runs the increment") {
    const std::string source =
        "int count_odds(int n) {\n"
        "    int i;\n"
        "    int c = 0;\n"
        "    for (i = 0; i < n; i++) {\n"
        "        if (i % 2 == 0) {\n"
        "            continue;\n"
        "        }\n"
        "        c = c + 1;\n"
        "    }\n"
        "    return c;\n"
        "}\n";
    Prepared p = run_on(source);
    dyn::CheckContext ctx;
    ctx.defines = &p.ast.defines;

    CHECK(p.traces.traps.empty());
    const dyn::LoopTrace& trace = p.traces.loops.at(1);
    auto out = dyn::check_invariant(inv("0 <= c <= i || i == 0"), trace, ctx);
    CHECK(out.status == CheckStatus::Pass);
    auto simple = dyn::check_invariant(inv("0 <= i"), trace, ctx);
    CHECK(simple.status == CheckStatus::Pass);
}

TEST_CASE("break leaves no exit obligation") {
    const std::string source =
        "int b() {\n"
        "    int x = 0;\n"
        "    while (1) {\n"
        "        x = x + 1;\n"
        "        if (x == 5) {\n"
        "            break;\n"
        "        }\n"
        "    }\n"
        "    return x;\n"
        "}\n";
    Prepared p = run_on(source);
    dyn::CheckContext ctx;
    ctx.defines = &p.ast.defines;
    const dyn::LoopTrace& trace = p.traces.loops.at(1);

    CHECK(trace.entries.size() == 1);
    CHECK(trace.iterations == 5);
    CHECK(trace.pairs.size() == 4);
    CHECK(trace.exits.empty());

    auto pass = dyn::check_invariant(inv("x <= 5"), trace, ctx);
    CHECK(pass.status == CheckStatus::Pass);
    auto fail = dyn::check_invariant(inv("x <= 3"), trace, ctx);
    REQUIRE(fail.status == CheckStatus::Fail);
    CHECK(var_int(fail.counterexample->state, "x") == 3);
}

TEST_CASE("traps are recorded per environment and the rest proceed") {
    const std::string source =
        "int g(int d) {\n"
        "    int x = 10 / d;\n"
        "    while (x > 0) {\n"
        "        x = x - 1;\n"
        "    }\n"
        "    return 0;\n"
        "}\n";
    Prepared p = run_on(source);
    dyn::CheckContext ctx;
    ctx.defines = &p.ast.defines;

    CHECK(p.traces.envs_run == 8);
    REQUIRE(p.traces.traps.size() == 1);
    CHECK(p.traces.traps[0].kind == dyn::TrapKind::DivByZero);

    const dyn::LoopTrace& trace = p.traces.loops.at(1);
    CHECK(trace.entries.size() == 7);
    auto out = dyn::check_invariant(inv("x <= 10"), trace, ctx);
    CHECK(out.status == CheckStatus::Pass);
}

TEST_CASE("unsigned parameters sample only nonnegative values") {
    const std::string source =
        "int f(size_t n) {\n"
        "    int i = 0;\n"
        "    while (i < n) {\n"
        "        i = i + 1;\n"
        "    }\n"
        "    return i;\n"
        "}\n";
    Prepared p = run_on(source);
    dyn::CheckContext ctx;
    ctx.defines = &p.ast.defines;
    const dyn::LoopTrace& trace = p.traces.loops.at(1);

    auto out = dyn::check_invariant(inv("0 <= n"), trace, ctx);
    CHECK(out.status == CheckStatus::Pass);
}

TEST_CASE("array inputs are bounds checked and deterministic") {
    const std::string source =
        "int asum(int *a, int n) {\n"
        "    int i = 0;\n"
        "    int s = 0;\n"
        "    while (i < n) {\n"
        "        s = s + a[i];\n"
        "        i = i + 1;\n"
        "    }\n"
        "    return s;\n"
        "}\n";
    Prepared first = run_on(source);
    Prepared second = run_on(source);

    bool saw_oob = false;
    for (const auto& trap : first.traces.traps) {
        if (trap.kind == dyn::TrapKind::OutOfBounds) saw_oob = true;
    }
    CHECK(saw_oob);

    const dyn::LoopTrace& ta = first.traces.loops.at(1);
    const dyn::LoopTrace& tb = second.traces.loops.at(1);
    REQUIRE(ta.entries.size() == tb.entries.size());
    REQUIRE(ta.pairs.size() == tb.pairs.size());
    for (std::size_t i = 0; i < ta.entries.size(); ++i) {
        CHECK(dyn::render_state(ta.entries[i]) == dyn::render_state(tb.entries[i]));
    }
    for (std::size_t i = 0; i < ta.pairs.size(); ++i) {
        CHECK(dyn::render_state(ta.pairs[i].second) ==
              dyn::render_state(tb.pairs[i].second));
    }
    CHECK(first.traces.fuel_used == second.traces.fuel_used);

    dyn::TraceOptions other_seed;
    other_seed.seed = 99;
    Prepared third = run_on(source, other_seed);
    CHECK(third.traces.loops.at(1).entries.size() == ta.entries.size());
}
