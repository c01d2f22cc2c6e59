#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "acinv/parser.hpp"
#include "acinv/prompting.hpp"

using namespace acinv;

namespace {

std::string read_file(const std::string& name) {
  std::ifstream in(std::string(ACINV_TEST_DATA_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("substitution replaces, inlines and drops lines") {
  std::map<std::string, std::string> values{{"A", "alpha"}, {"B", ""}, {"C", "c1\nc2"}};

  CHECK(substitute("x [[A]] y", values) == "x alpha y");
  CHECK(substitute("[[A]][[A]]", values) == "alphaalpha");
  CHECK(substitute("pre\n[[B]]\npost\n", values) == "pre\npost\n");
  CHECK(substitute("pre\n  [[B]]\npost", values) == "pre\npost");
  CHECK(substitute("keep [[B]] this line", values) == "keep  this line");
  CHECK(substitute("[[C]]\nend", values) == "c1\nc2\nend");
  CHECK(substitute("no placeholders", values) == "no placeholders");
  CHECK_THROWS_AS(substitute("[[Missing]]", values), std::runtime_error);
  CHECK_THROWS_AS(substitute("inline [[Missing]] too", values), std::runtime_error);
}

TEST_CASE("key variables render with types and structure marker") {
  c::Ast ast = c::parse_program(read_file("fig4.c"));
  ExtractionResult ex = extract(ast);
  CHECK(render_key_variables(ex.loops[0]) ==
        "i (int), vd (struct VolDetectContext *, data structure)");
  CHECK(render_key_variables(ex.loops[1]) ==
        "i (int), pcm[] (int16_t *), plane (int), vd (struct VolDetectContext *, data structure)");
}

TEST_CASE("the embedded program marks exactly the target loop") {
  c::Ast ast = c::parse_program(read_file("fig4.c"));
  ExtractionResult ex = extract(ast);

  std::string inner = render_program_for_loop(ast, ex.loops[0], {}, ex, nullptr);
  CHECK(contains(inner, "        // TARGET LOOP: modifies i, vd\n        for (i = 0;"));
  CHECK_FALSE(contains(inner, "loop invariant"));

  // once the inner loop is finalized, prompts for the outer loop carry its
  // annotation
  FinalizedMap finalized;
  finalized[1] = {acsl::Invariant::from(acsl::parse_acsl_expr("0 <= i <= nb_samples"))};
  std::string outer = render_program_for_loop(ast, ex.loops[1], finalized, ex, nullptr);
  CHECK(contains(outer, "        /*@ loop invariant 0 <= i <= nb_samples; */\n        for (i = 0;"));
  CHECK(contains(outer, "    // TARGET LOOP: modifies i, pcm[], plane, vd\n    for (plane = 0;"));

  // candidate invariants sit between the marker and the loop
  std::vector<acsl::Invariant> cands{
      acsl::Invariant::from(acsl::parse_acsl_expr("0 <= plane <= nb_planes"))};
  std::string with_cands = render_program_for_loop(ast, ex.loops[1], finalized, ex, &cands);
  CHECK(contains(with_cands,
                 "    // TARGET LOOP: modifies i, pcm[], plane, vd\n"
                 "    /*@ loop invariant 0 <= plane <= nb_planes; */\n"
                 "    for (plane = 0;"));
}

TEST_CASE("predicate prompts describe the structure") {
  c::Ast ast = c::parse_program(read_file("fig8.c"));
  ExtractionResult ex = extract(ast);
  PromptTemplates t = PromptTemplates::defaults();

  PromptRequest req = build_predicate_prompt(t, ast, ex.data_structures[0]);
  CHECK(contains(req.system, "formal verification"));
  CHECK(contains(req.user, "struct node {"));
  CHECK(contains(req.user, "This structure is recursive."));
  CHECK(contains(req.user, "### Example 1"));
  CHECK(contains(req.user, "valid_stack"));         // from the worked examples
  CHECK(contains(req.user, "is_linked_list"));
  CHECK_FALSE(contains(req.user, "[["));

  // identical inputs build identical prompts
  CHECK(build_predicate_prompt(t, ast, ex.data_structures[0]).user == req.user);

  c::Ast plain = c::parse_program(read_file("fig4.c"));
  ExtractionResult plain_ex = extract(plain);
  PromptRequest plain_req = build_predicate_prompt(t, plain, plain_ex.data_structures[0]);
  std::size_t turn = plain_req.user.find("## Your turn");
  REQUIRE(turn != std::string::npos);
  CHECK_FALSE(contains(plain_req.user.substr(turn), "This structure is recursive."));
}

TEST_CASE("invariant prompts thread predicates and earlier annotations") {
  c::Ast ast = c::parse_program(read_file("fig4.c"));
  ExtractionResult ex = extract(ast);
  PromptTemplates t = PromptTemplates::defaults();

  PromptRequest bare = build_invariant_prompt(t, ast, ex, ex.loops[0], {}, {});
  CHECK(contains(bare.user, "// TARGET LOOP: modifies i, vd"));
  CHECK(contains(bare.user, "i (int), vd (struct VolDetectContext *, data structure)"));
  CHECK(contains(bare.user, "at the loop head."));
  CHECK_FALSE(contains(bare.user, "Predicates already defined"));
  CHECK_FALSE(contains(bare.user, "[["));

  auto pred = acsl::parse_predicate_template(
      "predicate valid_ctx(struct VolDetectContext *vd) = \\valid(vd);");
  FinalizedMap finalized;
  finalized[1] = {acsl::Invariant::from(acsl::parse_acsl_expr("0 <= i <= nb_samples"))};
  PromptRequest full = build_invariant_prompt(t, ast, ex, ex.loops[1], {pred}, finalized);
  CHECK(contains(full.user, "Predicates already defined"));
  CHECK(contains(full.user, "predicate valid_ctx(struct VolDetectContext *vd) = \\valid(vd);"));
  CHECK(contains(full.user, "you may apply the predicates"));
  CHECK(contains(full.user, "/*@ loop invariant 0 <= i <= nb_samples; */"));
  CHECK_FALSE(contains(full.user, "[["));
}

TEST_CASE("evaluation prompts show the candidates twice") {
  // once inline in the program, once in their own section
  c::Ast ast = c::parse_program(read_file("fig1.c"));
  ExtractionResult ex = extract(ast);
  PromptTemplates t = PromptTemplates::defaults();
  std::vector<acsl::Invariant> cands{
      acsl::Invariant::from(acsl::parse_acsl_expr("0 <= i <= 30"))};

  PromptRequest req = build_evaluate_prompt(t, ast, ex, ex.loops[0], {}, {}, cands);
  CHECK(contains(req.user, "VERDICT: CORRECT"));
  CHECK(contains(req.user, "VERDICT: INCORRECT"));
  CHECK(contains(req.user, "    /*@ loop invariant 0 <= i <= 30; */\n    while (i < n)"));
  CHECK(contains(req.user, "### Candidate invariants\n```acsl\nloop invariant 0 <= i <= 30;\n```"));
  CHECK_FALSE(contains(req.user, "[["));
}

TEST_CASE("optimization prompts carry the direction") {
  c::Ast ast = c::parse_program(read_file("fig1.c"));
  ExtractionResult ex = extract(ast);
  PromptTemplates t = PromptTemplates::defaults();
  std::vector<acsl::Invariant> cands{
      acsl::Invariant::from(acsl::parse_acsl_expr("0 <= i <= 30"))};

  PromptRequest up = build_optimize_prompt(t, ast, ex, ex.loops[0], {}, {}, cands,
                                           OptimizeDirection::Strengthen);
  CHECK(contains(up.user, "judged correct"));
  CHECK(contains(up.user, "RESULT: STRENGTHENED"));
  CHECK(contains(up.user, "RESULT: DECLINED"));

  PromptRequest down = build_optimize_prompt(t, ast, ex, ex.loops[0], {}, {}, cands,
                                             OptimizeDirection::Weaken);
  CHECK(contains(down.user, "judged incorrect"));
  CHECK(contains(down.user, "RESULT: WEAKENED"));
  CHECK(down.user != up.user);
}

TEST_CASE("prompt directories override individual pieces") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "acinv_prompt_override_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "invariant.txt");
    f << "CUSTOM TEMPLATE\n[[Examples]]\n[[PredicatesSection]]\n[[Program]]\n"
         "[[KeyVariables]]\n[[PredicateHint]]\n";
  }
  {
    std::ofstream f(dir / "shots.json");
    f << R"({"evaluate": [{"input": "custom shot input", "output": "VERDICT: CORRECT"}]})";
  }

  PromptTemplates t = PromptTemplates::load_dir(dir.string());
  PromptTemplates defaults = PromptTemplates::defaults();
  CHECK(t.invariant == "CUSTOM TEMPLATE\n[[Examples]]\n[[PredicatesSection]]\n[[Program]]\n"
                       "[[KeyVariables]]\n[[PredicateHint]]\n");
  CHECK(t.evaluate == defaults.evaluate);
  CHECK(t.predicate == defaults.predicate);
  REQUIRE(t.evaluate_shots.size() == 1);
  CHECK(t.evaluate_shots[0].input == "custom shot input");
  CHECK(t.invariant_shots.size() == defaults.invariant_shots.size());

  c::Ast ast = c::parse_program(read_file("fig1.c"));
  ExtractionResult ex = extract(ast);
  PromptRequest req = build_invariant_prompt(t, ast, ex, ex.loops[0], {}, {});
  CHECK(req.user.rfind("CUSTOM TEMPLATE", 0) == 0);
  CHECK(contains(req.user, "// TARGET LOOP: modifies i"));

  fs::remove_all(dir);
}

TEST_CASE("missing prompt directory falls back to defaults") {
  PromptTemplates t = PromptTemplates::load_dir("/nonexistent/prompts");
  CHECK(t.invariant == PromptTemplates::defaults().invariant);
  CHECK(t.predicate_shots.size() == 2);
}
