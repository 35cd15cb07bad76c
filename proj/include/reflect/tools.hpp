#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "reflect/engines/sandbox.hpp"
#include "reflect/gateway.hpp"
#include "reflect/problem.hpp"
#include "reflect/prompts.hpp"
#include "reflect/router.hpp"

namespace reflect {

enum class FinishReason {
  code_solved,
  chain_committed,
  vote,
  validated,
  fallback,
  null_answer,
  budget_exhausted,
  error,
};

const char* finish_reason_name(FinishReason r);
std::optional<FinishReason> finish_reason_from_name(const std::string& name);

/// One event in a run trace. Tags read by the trajectory analytics:
/// thought, action, observation, reflection, backtrack, contradiction,
/// final_answer; other tags (llm_call, sandbox, chain, vote, validate,
/// operator, regime) are informational.
struct TraceEvent {
  int step = 0;
  std::string tag;
  std::string text;
};

struct SolveOutcome {
  std::optional<std::string> answer;
  FinishReason finish_reason = FinishReason::null_answer;
  int n_steps = 0;
  int n_llm_calls = 0;  // ledger entries with generate/extract purpose
  int n_retries = 0;
  TokenLedger ledger;
  std::vector<TraceEvent> trace;
  Shape shape = Shape::FALLBACK;  // filled by dispatch
  std::string tool;               // filled by dispatch
};

/// Per-tool sampling plan. retry_temperature is meaningful only for
/// tools with a generation-retry path (max_retries > 0).
struct ToolSpec {
  std::string name;
  Shape shape = Shape::FALLBACK;
  int k_samples = 1;
  double primary_temperature = 0.7;
  std::optional<double> retry_temperature;
  int max_retries = 0;
  std::optional<std::string> validator;
};

/// The spec table for the seven registered tools.
ToolSpec tool_spec(const std::string& tool_name);

struct HarnessOptions {
  engines::SandboxOptions sandbox;
  int max_tokens = 1024;  // per-call cap (config value; see README)
  int evidence_top_sections = 5;
  int artifact_max_retries = 3;    // config-overridable to 2
  int procedural_max_retries = 2;
  bool procedural_regenerate_all = true;

  static HarnessOptions from_config(const class Config& cfg);
};

/// Bundles the per-run gateway with the immutable harness configuration.
struct ToolContext {
  ModelGateway& gateway;
  const PromptLibrary& prompts;
  HarnessOptions opts;
};

struct ValidationResult {
  bool ok = false;
  std::string reason;
};
using Validator = std::function<ValidationResult(const std::string&)>;

struct ValidateLoopResult {
  std::optional<std::string> output;
  int n_retries = 0;
};

/// Generate -> validate -> regenerate-with-feedback, bounded by
/// spec.max_retries. The retry prompt appends the rejection reason; the
/// validator never raises. Returns nullopt after exhaustion.
ValidateLoopResult validate_loop(const std::string& base_prompt, const Validator& validator,
                                 const ToolSpec& spec, ToolContext& ctx,
                                 std::vector<TraceEvent>* trace = nullptr);

SolveOutcome tool_symbolic(const ProblemInstance& p, ToolContext& ctx);
SolveOutcome tool_tabular(const ProblemInstance& p, ToolContext& ctx);
SolveOutcome tool_logical(const ProblemInstance& p, ToolContext& ctx);
SolveOutcome tool_evidence(const ProblemInstance& p, ToolContext& ctx);
SolveOutcome tool_procedural(const ProblemInstance& p, ToolContext& ctx);
SolveOutcome tool_artifact(const ProblemInstance& p, ToolContext& ctx);
SolveOutcome tool_fallback(const ProblemInstance& p, ToolContext& ctx);

/// Runs a registered tool by name; unknown names raise.
SolveOutcome solve_with_tool(const std::string& tool_name, const ProblemInstance& p,
                             ToolContext& ctx);

/// Classifies, runs the registered tool, and runs the fallback tool once
/// when the tool returns the null answer. Performs no LLM call itself;
/// tool-internal errors become null answers (triggering fallback) while
/// backend transport errors propagate.
SolveOutcome dispatch(const ProblemInstance& p, const ToolRegistry& registry, ToolContext& ctx,
                      const ClassifierThresholds& thresholds,
                      const std::vector<std::string>& verb_lexicon);

}  // namespace reflect
