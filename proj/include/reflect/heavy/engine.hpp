#pragma once

#include <optional>

#include "reflect/heavy/state.hpp"
#include "reflect/tools.hpp"

namespace reflect::heavy {

enum class Operator { Inspect, Stabilize, Transform, Diversify };
const char* operator_name(Operator op);

/// Controller thresholds. theta_u follows the published default; the
/// step-count knobs and budget gate are config values (see README).
struct ControllerConfig {
  double theta_u = 0.6;
  int k_max = 5;    // steps since last reflection before Stabilize
  int k_stall = 4;  // steps since last progress before Diversify
  int t_max = 20;   // outer-loop step cap
  int diversify_branches = 3;
  int diversify_steps = 5;
  std::int64_t token_budget = 200000;
  std::int64_t diversify_min_budget = 2000;  // tokens that must remain
  int trajectory_verbatim_steps = 5;

  static ControllerConfig from_config(const class reflect::Config& cfg);
};

/// Per-run controller counters. Priority-ordered triggers:
///   1. new conflict            -> Inspect
///   2. u > theta_u             -> Inspect
///   3. steps since reflection  -> Stabilize   (> k_max)
///   4. steps since progress    -> Diversify   (> k_stall)
///   5. pending major decision  -> Inspect
/// At most one operator fires per step.
struct Controller {
  ControllerConfig config;
  int steps_since_reflection = 0;
  int steps_since_progress = 0;
  std::size_t last_unresolved_conflicts = 0;
  std::size_t last_progress_signature = 0;
  bool diversify_used = false;

  explicit Controller(ControllerConfig cfg) : config(cfg) {}
};

/// Pure trigger evaluation over the state and the controller counters.
std::optional<Operator> controller_step(const ReasoningState& s, const Controller& ctrl);

/// Applies the five-regime transition rules; no other transitions exist.
Regime update_regime(const ReasoningState& s);

/// One inspect-purpose call over the rendered state; unparseable replies
/// degrade to a caution/incomplete diagnostic.
Diagnostic op_inspect(ReasoningState& s, ToolContext& ctx, std::vector<TraceEvent>* trace);

/// Compresses the trajectory (recent steps verbatim, older summarized via
/// one LLM call with a deterministic truncation fallback), promotes
/// evidence-backed assumptions, archives done sub-goals, checkpoints, and
/// resets the reflection counter.
void op_stabilize(ReasoningState& s, Controller& ctrl, ToolContext& ctx,
                  std::vector<TraceEvent>* trace);

/// Diagnosis-driven intervention: retraction with cascade (unsupported),
/// LLM-arbitrated conflict resolution (contradiction), rollback + replan
/// (stalled), confidence downgrade (other failure types).
void op_transform(ReasoningState& s, const Diagnostic& dx, ToolContext& ctx,
                  std::vector<TraceEvent>* trace);

/// Forks the state into N branches, advances each k steps, and adopts
/// the winner (most done goals, then lowest uncertainty, then branch
/// index). Gated by the at-most-once policy and the token budget; when
/// the gate fails, falls back to Transform-with-rollback.
void op_diversify(ReasoningState& s, Controller& ctrl, ToolContext& ctx,
                  std::vector<TraceEvent>* trace);

/// The heavyweight loop: compile view, generate, extract delta, apply,
/// controller-selected operator (Inspect chaining into Transform on a
/// critical diagnosis), regime update, completion check; up to t_max
/// steps or the token budget.
SolveOutcome run_heavyweight(const ProblemInstance& p, ToolContext& ctx,
                             const ControllerConfig& cfg);

}  // namespace reflect::heavy
