#include "acinv/prompting.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "acinv/emit.hpp"
#include "json.hpp"

namespace acinv {

namespace {

// ---- default templates ----

const char* kSystem =
    "You are an expert in the formal verification of C programs with Frama-C. "
    "You write ACSL annotations that hold for every execution of the program, "
    "and you answer strictly in the requested format, with no commentary "
    "outside it.";

const char* kPredicateTemplate = R"PROMPT(Your task: write ACSL predicate definitions for one data structure of a C
program, so that loop invariants written later can refer to them.

Rules:
- For a plain structure, write one or more `predicate` definitions over a
  parameter of the structure's type (validity, field ranges, emptiness).
- For a recursive structure, write an `inductive` definition that relates two
  values of the type by following the recursive field.
- Use only fields that exist in the structure.
- Answer with a single fenced ```acsl block containing only the definitions.

[[Examples]]

## Your turn

### Program
```c
[[Program]]
```

### Data structure
```c
[[DataStructure]]
```
[[RecursiveNote]]

### Your definitions
)PROMPT";

const char* kInvariantTemplate = R"PROMPT(Your task: write ACSL loop invariants for one loop of a C program. The loop
is marked with a `// TARGET LOOP` comment naming every variable it modifies.
Loops annotated earlier keep their annotations; take those as given.

Rules:
- Each invariant must hold before the first iteration and after every
  iteration of the marked loop.
- Use only variables that are in scope at the loop head[[PredicateHint]]
- Prefer simple bounds that relate the loop counter to its limits.
- Answer with a single fenced ```acsl block, one `loop invariant <expr>;`
  line per invariant.

[[Examples]]

## Your turn
[[PredicatesSection]]

### Program
```c
[[Program]]
```

### Key variables of the marked loop
[[KeyVariables]]

### Your loop invariants
)PROMPT";

const char* kEvaluateTemplate = R"PROMPT(Your task: judge the candidate ACSL loop invariants of the loop marked with
a `// TARGET LOOP` comment in a C program. The set is correct only if every
invariant holds before the first iteration and after every iteration of that
loop, on every possible input.

Answer in exactly this format and nothing else:
VERDICT: CORRECT
or
VERDICT: INCORRECT
REASON: <one line: which invariant fails and when>

[[Examples]]

## Your turn
[[PredicatesSection]]

### Program
```c
[[Program]]
```

### Candidate invariants
```acsl
[[Candidates]]
```

### Your verdict
)PROMPT";

const char* kOptimizeTemplate = R"PROMPT(Your task: revise the ACSL loop invariants of the loop marked with a
`// TARGET LOOP` comment in a C program.

[[DirectionInstructions]]

Answer in exactly this format:
RESULT: [[DirectionWord]]
followed by a single fenced ```acsl block with the complete replacement set,
one `loop invariant <expr>;` line per invariant. If you make no change,
answer only:
RESULT: DECLINED

[[Examples]]

## Your turn
[[PredicatesSection]]

### Program
```c
[[Program]]
```

### Current invariants
```acsl
[[Candidates]]
```

### Your revision
)PROMPT";

const char* kStrengthenInstructions =
    "The current invariants were judged correct. Strengthen the set if you "
    "can: tighten a bound, add a missing relation between the variables, or "
    "replace an invariant with a stronger one that still holds before the "
    "first iteration and after every iteration. Decline when nothing "
    "stronger holds.";

const char* kWeakenInstructions =
    "The current invariants were judged incorrect. Weaken the set so that it "
    "holds: relax a bound that is too tight (for example, allow the value a "
    "counter reaches when the loop exits), or drop an invariant that cannot "
    "be repaired. Decline when you see no sound revision.";

// ---- default worked examples ----

std::vector<Shot> default_predicate_shots() {
  Shot stack;
  stack.input = R"PROMPT(### Program
```c
#define MAX_SIZE 100

struct stack_int {
    int data[MAX_SIZE];
    int top;
};

int stack_push(struct stack_int *s, int value) {
    if (s->top >= MAX_SIZE) {
        return -1;
    }
    s->data[s->top] = value;
    s->top = s->top + 1;
    return 0;
}
```

### Data structure
```c
struct stack_int {
    int data[MAX_SIZE];
    int top;
};
```)PROMPT";
  stack.output = R"PROMPT(```acsl
predicate valid_stack(struct stack_int *s) = \valid(s) && 0 <= s->top <= MAX_SIZE;
predicate stack_empty(struct stack_int *s) = \valid(s) && s->top == 0;
predicate stack_full(struct stack_int *s) = \valid(s) && s->top == MAX_SIZE;
```)PROMPT";

  Shot list;
  list.input = R"PROMPT(### Program
```c
struct list {
    int value;
    struct list *next;
};

int length(struct list *head) {
    int n = 0;
    struct list *p = head;
    while (p != NULL) {
        n = n + 1;
        p = p->next;
    }
    return n;
}
```

### Data structure
```c
struct list {
    int value;
    struct list *next;
};
```
This structure is recursive.)PROMPT";
  list.output = R"PROMPT(```acsl
inductive is_linked_list(struct list *p1, struct list *p2) {
  case empty: p1 == p2;
  case step: \valid(p1) && is_linked_list(p1->next, p2);
}
```)PROMPT";

  return {stack, list};
}

std::vector<Shot> default_invariant_shots() {
  Shot count;
  count.input = R"PROMPT(### Program
```c
int main() {
    int i = 0;
    int n = 30;
    // TARGET LOOP: modifies i
    while (i < n) {
        i = i + 1;
    }
    return 0;
}
```

### Key variables of the marked loop
i (int))PROMPT";
  count.output = R"PROMPT(```acsl
loop invariant 0 <= i <= 30;
```)PROMPT";

  Shot nested;
  nested.input = R"PROMPT(### Program
```c
int count(int rows, int cols) {
    int r = 0;
    int c = 0;
    int total = 0;
    while (r < rows) {
        c = 0;
        // TARGET LOOP: modifies c, total
        while (c < cols) {
            total = total + 1;
            c = c + 1;
        }
        r = r + 1;
    }
    return total;
}
```

### Key variables of the marked loop
c (int), total (int))PROMPT";
  nested.output = R"PROMPT(```acsl
loop invariant 0 <= c <= cols;
loop invariant total == r * cols + c;
```)PROMPT";

  return {count, nested};
}

std::vector<Shot> default_evaluate_shots() {
  Shot off_by_one;
  off_by_one.input = R"PROMPT(### Program
```c
int fill(int *a, int n) {
    int i = 0;
    // TARGET LOOP: modifies a[], i
    while (i < n) {
        a[i] = 0;
        i = i + 1;
    }
    return 0;
}
```

### Candidate invariants
```acsl
loop invariant 0 <= i < n;
```)PROMPT";
  off_by_one.output =
      "VERDICT: INCORRECT\n"
      "REASON: `0 <= i < n` fails after the last iteration, where i == n, and "
      "already fails on entry when n == 0.";
  return {off_by_one};
}

std::vector<Shot> default_optimize_shots() {
  Shot stronger;
  stronger.input = R"PROMPT(The current invariants were judged correct. Strengthen the set if you can.

### Program
```c
int sum(int n) {
    int s = 0;
    int i = 0;
    // TARGET LOOP: modifies i, s
    while (i < n) {
        s = s + i;
        i = i + 1;
    }
    return s;
}
```

### Current invariants
```acsl
loop invariant 0 <= i;
```)PROMPT";
  stronger.output = R"PROMPT(RESULT: STRENGTHENED
```acsl
loop invariant 0 <= i;
loop invariant 0 <= s;
```)PROMPT";

  Shot weaker;
  weaker.input = R"PROMPT(The current invariants were judged incorrect. Weaken the set so that it holds.

### Program
```c
int rows_done(int rows) {
    int r = 0;
    if (rows < 1) {
        rows = 1;
    }
    // TARGET LOOP: modifies r
    while (r < rows) {
        r = r + 1;
    }
    return r;
}
```

### Current invariants
```acsl
loop invariant 0 <= r < rows;
```)PROMPT";
  weaker.output = R"PROMPT(RESULT: WEAKENED
```acsl
loop invariant 0 <= r <= rows;
```)PROMPT";

  return {stronger, weaker};
}

// ---- helpers ----

std::string chomp(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::string render_examples(const std::vector<Shot>& shots) {
  if (shots.empty()) return {};
  std::string out = "## Worked examples";
  int n = 0;
  for (const auto& shot : shots) {
    ++n;
    out += "\n\n### Example " + std::to_string(n) + "\n" + chomp(shot.input);
    out += "\n\n### Example " + std::to_string(n) + " response\n" + chomp(shot.output);
  }
  return out;
}

std::string render_predicates_section(const std::vector<acsl::PredicateTemplate>& predicates) {
  if (predicates.empty()) return {};
  std::string out = "\n### Predicates already defined for this program";
  for (const auto& p : predicates) out += "\n" + p.render();
  return out;
}

std::string render_candidates(const std::vector<acsl::Invariant>& invariants) {
  std::string out;
  for (const auto& inv : invariants) {
    if (!out.empty()) out += "\n";
    out += "loop invariant " + inv.text + ";";
  }
  return out;
}

std::string read_file_or(const std::filesystem::path& p, const std::string& fallback) {
  std::ifstream in(p);
  if (!in.good()) return fallback;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<Shot> shots_from_json(const nlohmann::json& arr) {
  std::vector<Shot> out;
  for (const auto& item : arr) {
    out.push_back({item.at("input").get<std::string>(), item.at("output").get<std::string>()});
  }
  return out;
}

}  // namespace

PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.system = kSystem;
  t.predicate = kPredicateTemplate;
  t.invariant = kInvariantTemplate;
  t.evaluate = kEvaluateTemplate;
  t.optimize = kOptimizeTemplate;
  t.predicate_shots = default_predicate_shots();
  t.invariant_shots = default_invariant_shots();
  t.evaluate_shots = default_evaluate_shots();
  t.optimize_shots = default_optimize_shots();
  return t;
}

PromptTemplates PromptTemplates::load_dir(const std::string& dir) {
  PromptTemplates t = defaults();
  std::filesystem::path base(dir);
  t.system = chomp(read_file_or(base / "system.txt", t.system));
  t.predicate = read_file_or(base / "predicate.txt", t.predicate);
  t.invariant = read_file_or(base / "invariant.txt", t.invariant);
  t.evaluate = read_file_or(base / "evaluate.txt", t.evaluate);
  t.optimize = read_file_or(base / "optimize.txt", t.optimize);

  std::ifstream shots(base / "shots.json");
  if (shots.good()) {
    nlohmann::json j = nlohmann::json::parse(shots);
    if (j.contains("predicate")) t.predicate_shots = shots_from_json(j["predicate"]);
    if (j.contains("invariant")) t.invariant_shots = shots_from_json(j["invariant"]);
    if (j.contains("evaluate")) t.evaluate_shots = shots_from_json(j["evaluate"]);
    if (j.contains("optimize")) t.optimize_shots = shots_from_json(j["optimize"]);
  }
  return t;
}

std::string substitute(const std::string& templ, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t line_start = 0;
  while (line_start <= templ.size()) {
    std::size_t line_end = templ.find('\n', line_start);
    bool last = line_end == std::string::npos;
    std::string line = templ.substr(line_start, last ? std::string::npos : line_end - line_start);

    // a placeholder alone on its line vanishes with the line when empty
    std::string trimmed = line;
    std::size_t b = trimmed.find_first_not_of(" \t");
    std::size_t e = trimmed.find_last_not_of(" \t");
    trimmed = b == std::string::npos ? std::string() : trimmed.substr(b, e - b + 1);
    bool alone = trimmed.size() > 4 && trimmed.rfind("[[", 0) == 0 &&
                 trimmed.compare(trimmed.size() - 2, 2, "]]") == 0 &&
                 trimmed.find("[[", 2) == std::string::npos &&
                 trimmed.find("]]") == trimmed.size() - 2;
    bool drop_line = false;
    if (alone) {
      std::string name = trimmed.substr(2, trimmed.size() - 4);
      auto it = values.find(name);
      if (it == values.end()) throw std::runtime_error("unknown placeholder [[" + name + "]]");
      if (it->second.empty()) {
        drop_line = true;
      } else {
        line = it->second;
      }
    } else {
      std::string replaced;
      std::size_t pos = 0;
      while (pos < line.size()) {
        std::size_t open = line.find("[[", pos);
        if (open == std::string::npos) {
          replaced += line.substr(pos);
          break;
        }
        std::size_t close = line.find("]]", open + 2);
        if (close == std::string::npos) {
          replaced += line.substr(pos);
          break;
        }
        replaced += line.substr(pos, open - pos);
        std::string name = line.substr(open + 2, close - open - 2);
        auto it = values.find(name);
        if (it == values.end()) throw std::runtime_error("unknown placeholder [[" + name + "]]");
        replaced += it->second;
        pos = close + 2;
      }
      line = replaced;
    }

    if (!drop_line) {
      out += line;
      if (!last) out += '\n';
    }
    if (last) break;
    line_start = line_end + 1;
  }
  return out;
}

std::string render_key_variables(const LoopInfo& loop) {
  if (loop.mutated_vars.empty()) return "(none)";
  std::string out;
  for (const auto& v : loop.mutated_vars) {
    if (!out.empty()) out += ", ";
    out += v.display;
    if (!v.type_text.empty()) {
      out += " (" + v.type_text + (v.is_data_structure ? ", data structure" : "") + ")";
    }
  }
  return out;
}

std::string render_program_for_loop(const c::Ast& ast, const LoopInfo& target,
                                    const FinalizedMap& finalized, const ExtractionResult& ex,
                                    const std::vector<acsl::Invariant>* target_invariants) {
  std::vector<Insertion> ins;
  for (const auto& [number, invariants] : finalized) {
    if (number == target.number || invariants.empty()) continue;
    const LoopInfo* loop = ex.find_loop(number);
    if (!loop) continue;
    ins.push_back({loop->annotation_line, acsl::render_loop_annotation(invariants)});
  }
  std::string marker = "// TARGET LOOP";
  if (!target.mutated_vars.empty()) {
    marker += ": modifies ";
    for (std::size_t i = 0; i < target.mutated_vars.size(); ++i) {
      if (i > 0) marker += ", ";
      marker += target.mutated_vars[i].display;
    }
  }
  ins.push_back({target.annotation_line, marker});
  if (target_invariants && !target_invariants->empty()) {
    ins.push_back({target.annotation_line, acsl::render_loop_annotation(*target_invariants)});
  }
  return emit_annotated(ast.source_text, ins);
}

PromptRequest build_predicate_prompt(const PromptTemplates& t, const c::Ast& ast,
                                     const DataStructureFact& ds) {
  std::map<std::string, std::string> values{
      {"Examples", render_examples(t.predicate_shots)},
      {"Program", chomp(ast.source_text)},
      {"DataStructure", chomp(ds.definition)},
      {"RecursiveNote", ds.recursive ? "This structure is recursive." : ""},
  };
  return {t.system, substitute(t.predicate, values)};
}

PromptRequest build_invariant_prompt(const PromptTemplates& t, const c::Ast& ast,
                                     const ExtractionResult& ex, const LoopInfo& loop,
                                     const std::vector<acsl::PredicateTemplate>& predicates,
                                     const FinalizedMap& finalized) {
  std::map<std::string, std::string> values{
      {"Examples", render_examples(t.invariant_shots)},
      {"PredicatesSection", render_predicates_section(predicates)},
      {"Program", chomp(render_program_for_loop(ast, loop, finalized, ex, nullptr))},
      {"KeyVariables", render_key_variables(loop)},
      {"PredicateHint",
       predicates.empty() ? "." : "; you may apply the predicates listed below."},
  };
  return {t.system, substitute(t.invariant, values)};
}

PromptRequest build_evaluate_prompt(const PromptTemplates& t, const c::Ast& ast,
                                    const ExtractionResult& ex, const LoopInfo& loop,
                                    const std::vector<acsl::PredicateTemplate>& predicates,
                                    const FinalizedMap& finalized,
                                    const std::vector<acsl::Invariant>& candidates) {
  std::map<std::string, std::string> values{
      {"Examples", render_examples(t.evaluate_shots)},
      {"PredicatesSection", render_predicates_section(predicates)},
      {"Program", chomp(render_program_for_loop(ast, loop, finalized, ex, &candidates))},
      {"Candidates", render_candidates(candidates)},
  };
  return {t.system, substitute(t.evaluate, values)};
}

PromptRequest build_optimize_prompt(const PromptTemplates& t, const c::Ast& ast,
                                    const ExtractionResult& ex, const LoopInfo& loop,
                                    const std::vector<acsl::PredicateTemplate>& predicates,
                                    const FinalizedMap& finalized,
                                    const std::vector<acsl::Invariant>& candidates,
                                    OptimizeDirection direction) {
  const bool strengthen = direction == OptimizeDirection::Strengthen;
  std::map<std::string, std::string> values{
      {"Examples", render_examples(t.optimize_shots)},
      {"PredicatesSection", render_predicates_section(predicates)},
      {"Program", chomp(render_program_for_loop(ast, loop, finalized, ex, &candidates))},
      {"Candidates", render_candidates(candidates)},
      {"DirectionInstructions", strengthen ? kStrengthenInstructions : kWeakenInstructions},
      {"DirectionWord", strengthen ? "STRENGTHENED" : "WEAKENED"},
  };
  return {t.system, substitute(t.optimize, values)};
}

}  // namespace acinv
