#pragma once

#include <functional>
#include <string>
#include <vector>

#include "reflect/analytics.hpp"
#include "reflect/config.hpp"
#include "reflect/heavy/engine.hpp"
#include "reflect/tools.hpp"

namespace reflect {

/// Per-method knobs. Defaults follow the published settings (3 refine
/// rounds, 3 reflexion episodes, checklist every 3 steps, 0.6/0.95
/// sampling for the baseline drivers); step caps are config values.
struct MethodKnobs {
  int react_max_steps = 8;
  int self_refine_rounds = 3;
  int reflexion_episodes = 3;
  int checklist_interval = 3;
  double baseline_temperature = 0.6;
  double baseline_top_p = 0.95;

  static MethodKnobs from_config(const Config& cfg);
};

/// Single-pass step-by-step generation; the answer is marker-parsed.
SolveOutcome run_direct(const ProblemInstance& p, ToolContext& ctx, const MethodKnobs& knobs);

/// Interleaved Thought -> Action -> Observation with a desk-scale action
/// space: lookup[<term>] over the provided context and finish[<answer>].
SolveOutcome run_react(const ProblemInstance& p, ToolContext& ctx, const MethodKnobs& knobs,
                       int max_steps);

/// Generate, then up to `rounds` critique+revise pairs via separate LLM
/// calls; stops early when the critique reports no issues.
SolveOutcome run_self_refine(const ProblemInstance& p, ToolContext& ctx,
                             const MethodKnobs& knobs, int rounds);

/// Feedback signal for one episode attempt: true = success, stop.
using FeedbackOracle = std::function<bool(const std::optional<std::string>& answer)>;

/// Episode loop with cross-episode memory; each failed episode appends a
/// reflection that appears verbatim in the next episode's prompt.
SolveOutcome run_reflexion(const ProblemInstance& p, ToolContext& ctx,
                           const MethodKnobs& knobs, int episodes,
                           const FeedbackOracle& feedback);

/// Gold-derived binary feedback where gold exists; format validity for
/// structural (patch) problems.
FeedbackOracle make_score_feedback_oracle(const ProblemInstance& p);

/// ReAct plus the 5-point self-check (state, consistency, assumptions,
/// direction, decision) injected into the generation stream every
/// `checklist_interval` steps; reflection blocks are trace-tagged.
SolveOutcome run_minimal_reflect(const ProblemInstance& p, ToolContext& ctx,
                                 const MethodKnobs& knobs, int max_steps,
                                 int checklist_interval);

struct SuiteConfig {
  std::string run_id = "run";
  std::string method = "full";  // direct | react | self_refine | reflexion |
                                // minimal_reflect | full | core | heavyweight
  std::string model = "scripted";
  std::vector<long> seeds = {0};
  std::vector<std::string> domains;  // empty = no filter
  std::string out_dir = ".";
  std::string script_path;  // scripted backend JSONL; empty = live backend
  int workers = 1;
  MethodKnobs knobs;
  Config harness;           // thresholds, sandbox, heavy knobs, registry layer
  std::string prompt_dir;   // template overrides
  std::string verb_lexicon_path;
};

/// Runs every (seed, problem) cell of the grid for the configured
/// method, scoring each outcome and appending one CSV row per cell.
/// Resumable: cells already present in the output CSV are skipped, and
/// an interrupted-and-resumed run produces a byte-identical CSV (with a
/// scripted backend). Per-problem failures become finish_reason=error
/// rows; they never abort the suite. Returns the CSV path.
std::string run_suite(const SuiteConfig& config, const std::vector<ProblemInstance>& problems);

/// Re-scores an existing results CSV against the problem set (matching
/// by problem_id) and returns the rewritten rows.
std::vector<ResultRecord> rescore_records(std::vector<ResultRecord> records,
                                          const std::vector<ProblemInstance>& problems);

/// Serializes a trace to the exported JSONL event-stream format.
std::string trace_to_jsonl(const std::vector<TraceEvent>& trace);

}  // namespace reflect
