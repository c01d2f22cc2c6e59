#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "acinv/acsl.hpp"
#include "acinv/cst.hpp"
#include "acinv/extraction.hpp"

// Trace-based invariant checking. The program under analysis is run on a
// deterministic family of sampled inputs by a small interpreter; every loop
// records the machine state at its head. A candidate invariant is then
// checked against the two Hoare conditions those states witness: it must
// hold on entry, and whenever it holds at the head of an iteration it must
// still hold at the head of the next. A failed condition yields a concrete
// counterexample state; an invariant the evaluator cannot decide (unknown
// variable, unbounded quantifier) is reported as inconclusive, never as
// passing.

namespace acinv::dyn {

struct Value {
    enum class Kind { Int, Ptr, Arr };

    Kind kind = Kind::Int;
    std::int64_t i = 0;  // Int
    int ptr = 0;         // Ptr: heap node id, 0 is null
    std::shared_ptr<std::vector<std::int64_t>> arr;  // Arr

    static Value make_int(std::int64_t v);
    static Value make_ptr(int id);
    static Value make_arr(std::vector<std::int64_t> elems);
};

struct HeapNode {
    std::string type_name;  // struct tag
    std::map<std::string, Value> members;
};

// Deep snapshot of the running function's frame and the heap.
struct State {
    std::map<std::string, Value> vars;
    std::map<int, HeapNode> heap;
};

std::string render_state(const State& state);

struct LoopTrace {
    std::vector<State> entries;  // state at the head, one per activation
    std::vector<std::pair<State, State>> pairs;  // consecutive head states
    std::vector<State> exits;    // state after the guard finally fails
    long long iterations = 0;    // body executions observed, uncapped
};

enum class TrapKind {
    DivByZero,
    NullDeref,
    OutOfBounds,
    UndefinedCallee,
    Unsupported,
    FuelExhausted,
};

const char* trap_name(TrapKind kind);

struct TrapNote {
    TrapKind kind = TrapKind::Unsupported;
    std::string message;
    int env_index = 0;
};

struct TraceOptions {
    std::uint64_t seed = 1;
    long long fuel = 100000;  // shared iteration/call budget for the whole run
    int max_envs = 16;
    std::string function;  // restrict to one function; empty runs every
                           // function that contains a loop
};

struct TraceSet {
    std::map<int, LoopTrace> loops;  // keyed by loop number
    std::vector<TrapNote> traps;
    long long fuel_used = 0;
    int envs_run = 0;
    int envs_skipped = 0;  // left unrun after the fuel gave out
};

TraceSet collect_traces(const c::Ast& ast, const ExtractionResult& extraction,
                        const TraceOptions& options);

struct CheckContext {
    const std::vector<acsl::PredicateTemplate>* predicates = nullptr;
    const std::map<std::string, std::int64_t>* defines = nullptr;
};

enum class CheckStatus { Pass, Fail, Inconclusive };

struct Counterexample {
    std::string phase;  // "initialization" or "maintenance"
    State state;        // head state the invariant fails from
};

struct CheckOutcome {
    CheckStatus status = CheckStatus::Inconclusive;
    std::optional<Counterexample> counterexample;
    std::string note;  // reason when inconclusive
};

CheckOutcome check_invariant(const acsl::Invariant& invariant,
                             const LoopTrace& trace, const CheckContext& ctx);

}  // namespace acinv::dyn
