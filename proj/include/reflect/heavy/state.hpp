#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reflect/problem.hpp"

namespace reflect::heavy {

enum class GoalStatus { open, active, done, blocked };
enum class AssumptionStatus { active, validated, retracted };
enum class Confidence { low, med, high };
enum class Regime { EXPLORE, EXECUTE, VERIFY, RECOVER, CONSOLIDATE };
enum class Severity { low, med, critical };
enum class Health { good, caution, critical };
enum class FailureType { logic, arithmetic, unsupported, incomplete, contradiction, stalled };

const char* goal_status_name(GoalStatus s);
const char* regime_name(Regime r);
const char* health_name(Health h);
const char* failure_type_name(FailureType f);
std::optional<GoalStatus> goal_status_from_name(const std::string& s);
std::optional<Confidence> confidence_from_name(const std::string& s);
std::optional<Severity> severity_from_name(const std::string& s);
std::optional<Health> health_from_name(const std::string& s);
std::optional<FailureType> failure_type_from_name(const std::string& s);

struct GoalNode {
  std::string id;
  std::string text;
  GoalStatus status = GoalStatus::open;
  std::string parent;  // empty for the root
  std::vector<std::string> children;
  bool archived = false;
  bool retracted_by_cascade = false;

  bool operator==(const GoalNode&) const = default;
};

struct Assumption {
  std::string id;
  std::string text;
  std::string justification;
  AssumptionStatus status = AssumptionStatus::active;
  std::vector<std::string> dependents;  // ids of elements depending on this
  bool retracted_by_cascade = false;

  bool operator==(const Assumption&) const = default;
};

struct Evidence {
  std::string id;
  std::string text;
  std::string provenance;
  Confidence confidence = Confidence::med;
  bool retracted = false;
  bool retracted_by_cascade = false;

  bool operator==(const Evidence&) const = default;
};

struct Decision {
  std::string id;
  std::string text;
  std::string rationale;
  bool reversible = true;
  std::string tag;  // "", "strategy", "final_answer", "replan"
  bool pending = false;
  bool retracted = false;
  bool retracted_by_cascade = false;

  bool operator==(const Decision&) const = default;
};

struct Conflict {
  std::string id;
  std::string element_a;
  std::string element_b;
  bool resolved = false;
  Severity severity = Severity::med;

  bool operator==(const Conflict&) const = default;
};

struct TrajectoryStep {
  int index = 0;
  std::string text;
  bool is_summary = false;

  bool operator==(const TrajectoryStep&) const = default;
};

/// Structured diagnostic produced by the Inspect operator.
/// health=critical requires a nonempty affected list; violations are
/// normalized down to caution.
struct Diagnostic {
  FailureType failure_type = FailureType::incomplete;
  std::vector<std::string> affected;
  Severity severity = Severity::med;
  Health health = Health::caution;

  void normalize();
  bool operator==(const Diagnostic&) const = default;
};

/// Everything a checkpoint snapshots (the state minus the checkpoint
/// list itself).
struct StateCore {
  std::vector<GoalNode> goals;
  std::vector<Assumption> assumptions;
  std::vector<Evidence> evidence;
  std::vector<Decision> decisions;
  std::vector<Conflict> conflicts;
  std::vector<TrajectoryStep> trajectory;
  Regime regime = Regime::EXPLORE;
  double uncertainty = 0.0;
  std::optional<Diagnostic> last_diagnostic;
  int next_goal_id = 1;
  int next_assumption_id = 1;
  int next_evidence_id = 1;
  int next_decision_id = 1;
  int next_conflict_id = 1;
  int next_step_index = 1;

  bool operator==(const StateCore&) const = default;

  bool id_exists(const std::string& id) const;
  std::string element_text(const std::string& id) const;
  std::size_t unresolved_conflicts() const;
};

struct Checkpoint {
  int id = 0;
  StateCore snapshot;

  bool operator==(const Checkpoint&) const = default;
};

/// The heavyweight reasoning state: mutable core plus immutable
/// checkpoint snapshots. The uncertainty field is derived and refreshed
/// after every mutation.
struct ReasoningState {
  StateCore core;
  std::vector<Checkpoint> checkpoints;

  bool operator==(const ReasoningState&) const = default;
};

/// Fresh state: root goal from the instruction (placeholder when empty),
/// regime EXPLORE, empty element sets, one initial checkpoint.
ReasoningState init_state(const ProblemInstance& p);

/// Composite uncertainty: the unweighted mean of (1) the unvalidated-
/// assumption ratio, (2) unresolved-conflict density saturating at 3,
/// (3) the low-confidence-evidence ratio, and (4) the blocked-goal
/// ratio. Empty denominators contribute 0; result is in [0,1].
double recompute_uncertainty(const StateCore& core);
void refresh_uncertainty(ReasoningState& s);

/// Appends a checkpoint snapshot of the current core.
void make_checkpoint(ReasoningState& s);

/// Restores the core from the most recent checkpoint; returns false when
/// no checkpoint exists.
bool rollback_to_last_checkpoint(ReasoningState& s);

// --- deltas -----------------------------------------------------------

struct DeltaEvidence {
  std::string text;
  std::string provenance;
  Confidence confidence = Confidence::med;
  std::vector<std::string> depends_on;  // assumption ids this evidence relies on
};

struct DeltaAssumption {
  std::string text;
  std::string justification;
  std::vector<std::string> dependents;  // existing elements depending on it
};

struct DeltaDecision {
  std::string text;
  std::string rationale;
  bool reversible = true;
  std::string tag;
  bool pending = false;
  std::vector<std::string> depends_on;
};

struct DeltaGoal {
  std::string id;      // nonempty: status update of an existing goal
  std::string text;    // new goal text when id is empty
  std::string parent;  // parent for new goals (root when empty)
  std::optional<GoalStatus> status;
};

struct DeltaConflict {
  std::string element_a;
  std::string element_b;
  Severity severity = Severity::med;
};

/// Elements extracted from one reasoning step.
struct StateDelta {
  std::vector<DeltaEvidence> evidence;
  std::vector<DeltaAssumption> assumptions;
  std::vector<DeltaDecision> decisions;
  std::vector<DeltaGoal> goals;
  std::vector<DeltaConflict> conflicts;

  bool empty() const {
    return evidence.empty() && assumptions.empty() && decisions.empty() && goals.empty() &&
           conflicts.empty();
  }
};

/// Parses the extractor's JSON reply (the first JSON object found) into
/// a delta; parse failure or an empty reply yields an empty delta.
StateDelta parse_delta(const std::string& reply_text);

/// Applies the delta atomically: either every element lands and
/// referential integrity holds afterwards, or the state is unchanged and
/// an error is returned.
std::optional<std::string> apply_delta(ReasoningState& s, const StateDelta& delta);

// --- invariant checks (used by tests and the fuzzer) -------------------

/// Every dependents entry, conflict endpoint, and goal parent/child link
/// references an existing element id.
std::optional<std::string> check_referential_integrity(const StateCore& core);

/// No active element transitively depends on a retracted assumption.
std::optional<std::string> check_cascade_completeness(const StateCore& core);

/// Deterministic regime-shaped prompt rendering:
///   EXECUTE hides done goals and resolved conflicts;
///   VERIFY frames assumptions as claims to challenge;
///   RECOVER shows the diagnosis and failed goals first.
std::string compile_view(const ReasoningState& s, Regime regime);

/// The run answer: the latest final_answer-tagged decision, else the
/// last trajectory step's FINAL ANSWER marker.
std::optional<std::string> compile_answer(const ReasoningState& s);

/// Root goal done, or the regime has reached CONSOLIDATE.
bool is_complete(const ReasoningState& s);

}  // namespace reflect::heavy
