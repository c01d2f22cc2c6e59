#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "acinv/dynamic_checker.hpp"
#include "acinv/generation.hpp"
#include "acinv/verifier.hpp"

// The end-to-end run: parse, extract, generate, augment, annotate, check.
// One report covers the whole corpus; per-program failures are recorded in
// their entry and never abort the run.

namespace acinv {

enum class BackendMode { Live, Replay, Record };
enum class OracleMode { Off, Report, Gate };

struct PipelineOptions {
  BackendMode backend = BackendMode::Replay;
  std::string fixtures_dir;
  int k = 5;
  std::string prompts_dir;
  OracleMode oracle = OracleMode::Report;
  unsigned seed = 1;
  long long fuel = 100000;
  std::string verifier_cmd;
  std::chrono::milliseconds verifier_timeout = std::chrono::milliseconds(60000);
  std::string verifier_pattern;
  int jobs = 1;
  bool dump_extraction = false;
  int max_candidates = 8;
};

struct OracleCheck {
  std::string invariant;
  dyn::CheckStatus status = dyn::CheckStatus::Inconclusive;
  std::string phase;           // set on failures
  std::string counterexample;  // rendered head state, set on failures
  std::string note;            // set when inconclusive
  bool gated = false;          // dropped from the annotation by --oracle gate
};

struct ProgramRun {
  std::string path;
  std::string status = "ok";  // ok | parse_error | error
  std::string error;
  std::string output_path;    // annotated file, when one was written

  c::Ast ast;
  ExtractionResult extraction;
  GenerationResult generation;
  /// Post-gate invariant sets, exactly what the annotated file contains.
  FinalizedMap emitted;
  std::map<int, std::vector<OracleCheck>> checks;
  std::map<std::string, int> calls;
  std::optional<bool> solved;

  bool verifier_ran = false;
  VerifierResult verifier;

  bool traces_ok = false;
  dyn::TraceSet traces;

  std::vector<Diagnostic> diagnostics;
  long long elapsed_ms = 0;
};

struct RunResult {
  std::vector<ProgramRun> programs;  // sorted by path
  nlohmann::ordered_json report;
};

/// Expands files and directories into the sorted program list: a file names
/// itself, a directory contributes every *.c below it except *.acinv.c
/// outputs. Throws std::invalid_argument for a path that does not exist.
std::vector<std::string> collect_inputs(const std::vector<std::string>& paths);

/// The annotated source: predicate definitions above the first function and
/// one annotation block above each loop with a finalized set.
std::string annotate_program(const c::Ast& ast, const std::vector<acsl::PredicateTemplate>& predicates,
                             const ExtractionResult& ex, const FinalizedMap& emitted);

/// "dir/x.c" -> "dir/x.acinv.c"; a name without the .c suffix gets .acinv.c
/// appended.
std::string output_path_for(const std::string& input);

/// live_backend carries Live traffic and the inner side of Record mode;
/// store holds fixtures for Replay and Record and feeds the acc@k re-runs.
/// Either may be null when the mode does not need it.
RunResult run_pipeline(const std::vector<std::string>& inputs, const PipelineOptions& options,
                       Backend* live_backend, FixtureStore* store);

}  // namespace acinv
