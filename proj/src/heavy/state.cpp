#include "reflect/heavy/state.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "reflect/strings.hpp"

namespace reflect::heavy {

using nlohmann::json;

const char* goal_status_name(GoalStatus s) {
  switch (s) {
    case GoalStatus::open: return "open";
    case GoalStatus::active: return "active";
    case GoalStatus::done: return "done";
    case GoalStatus::blocked: return "blocked";
  }
  return "open";
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::EXPLORE: return "EXPLORE";
    case Regime::EXECUTE: return "EXECUTE";
    case Regime::VERIFY: return "VERIFY";
    case Regime::RECOVER: return "RECOVER";
    case Regime::CONSOLIDATE: return "CONSOLIDATE";
  }
  return "EXPLORE";
}

const char* health_name(Health h) {
  switch (h) {
    case Health::good: return "good";
    case Health::caution: return "caution";
    case Health::critical: return "critical";
  }
  return "caution";
}

const char* failure_type_name(FailureType f) {
  switch (f) {
    case FailureType::logic: return "logic";
    case FailureType::arithmetic: return "arithmetic";
    case FailureType::unsupported: return "unsupported";
    case FailureType::incomplete: return "incomplete";
    case FailureType::contradiction: return "contradiction";
    case FailureType::stalled: return "stalled";
  }
  return "incomplete";
}

std::optional<GoalStatus> goal_status_from_name(const std::string& s) {
  if (s == "open") return GoalStatus::open;
  if (s == "active") return GoalStatus::active;
  if (s == "done") return GoalStatus::done;
  if (s == "blocked") return GoalStatus::blocked;
  return std::nullopt;
}

std::optional<Confidence> confidence_from_name(const std::string& s) {
  if (s == "low") return Confidence::low;
  if (s == "med" || s == "medium") return Confidence::med;
  if (s == "high") return Confidence::high;
  return std::nullopt;
}

std::optional<Severity> severity_from_name(const std::string& s) {
  if (s == "low") return Severity::low;
  if (s == "med" || s == "medium") return Severity::med;
  if (s == "critical" || s == "high") return Severity::critical;
  return std::nullopt;
}

std::optional<Health> health_from_name(const std::string& s) {
  if (s == "good") return Health::good;
  if (s == "caution") return Health::caution;
  if (s == "critical") return Health::critical;
  return std::nullopt;
}

std::optional<FailureType> failure_type_from_name(const std::string& s) {
  static const std::pair<const char*, FailureType> table[] = {
      {"logic", FailureType::logic},
      {"arithmetic", FailureType::arithmetic},
      {"unsupported", FailureType::unsupported},
      {"incomplete", FailureType::incomplete},
      {"contradiction", FailureType::contradiction},
      {"stalled", FailureType::stalled},
  };
  for (const auto& [n, f] : table) {
    if (s == n) return f;
  }
  return std::nullopt;
}

void Diagnostic::normalize() {
  if (health == Health::critical && affected.empty()) health = Health::caution;
}

bool StateCore::id_exists(const std::string& id) const {
  auto has = [&](const auto& vec) {
    return std::any_of(vec.begin(), vec.end(), [&](const auto& e) { return e.id == id; });
  };
  return has(goals) || has(assumptions) || has(evidence) || has(decisions) || has(conflicts);
}

std::string StateCore::element_text(const std::string& id) const {
  for (const auto& g : goals) {
    if (g.id == id) return g.text;
  }
  for (const auto& a : assumptions) {
    if (a.id == id) return a.text;
  }
  for (const auto& e : evidence) {
    if (e.id == id) return e.text;
  }
  for (const auto& d : decisions) {
    if (d.id == id) return d.text;
  }
  for (const auto& c : conflicts) {
    if (c.id == id) return c.element_a + " vs " + c.element_b;
  }
  return "";
}

std::size_t StateCore::unresolved_conflicts() const {
  return static_cast<std::size_t>(std::count_if(
      conflicts.begin(), conflicts.end(), [](const Conflict& c) { return !c.resolved; }));
}

ReasoningState init_state(const ProblemInstance& p) {
  ReasoningState s;
  GoalNode root;
  root.id = "g" + std::to_string(s.core.next_goal_id++);
  root.text = strings::trim(p.instruction).empty() ? "(unstated problem goal)"
                                                   : strings::trim(p.instruction);
  root.status = GoalStatus::open;
  s.core.goals.push_back(std::move(root));
  refresh_uncertainty(s);
  make_checkpoint(s);
  return s;
}

double recompute_uncertainty(const StateCore& core) {
  double s1 = 0.0;
  {
    std::size_t total = 0, unvalidated = 0;
    for (const auto& a : core.assumptions) {
      if (a.status == AssumptionStatus::retracted) continue;
      ++total;
      if (a.status == AssumptionStatus::active) ++unvalidated;
    }
    if (total > 0) s1 = static_cast<double>(unvalidated) / static_cast<double>(total);
  }
  double s2 = static_cast<double>(std::min<std::size_t>(core.unresolved_conflicts(), 3)) / 3.0;
  double s3 = 0.0;
  {
    std::size_t total = 0, low = 0;
    for (const auto& e : core.evidence) {
      if (e.retracted) continue;
      ++total;
      if (e.confidence == Confidence::low) ++low;
    }
    if (total > 0) s3 = static_cast<double>(low) / static_cast<double>(total);
  }
  double s4 = 0.0;
  {
    std::size_t total = 0, blocked = 0;
    for (const auto& g : core.goals) {
      if (g.archived || g.retracted_by_cascade) continue;
      ++total;
      if (g.status == GoalStatus::blocked) ++blocked;
    }
    if (total > 0) s4 = static_cast<double>(blocked) / static_cast<double>(total);
  }
  return (s1 + s2 + s3 + s4) / 4.0;
}

void refresh_uncertainty(ReasoningState& s) {
  s.core.uncertainty = recompute_uncertainty(s.core);
}

void make_checkpoint(ReasoningState& s) {
  Checkpoint cp;
  cp.id = static_cast<int>(s.checkpoints.size());
  cp.snapshot = s.core;
  s.checkpoints.push_back(std::move(cp));
}

bool rollback_to_last_checkpoint(ReasoningState& s) {
  if (s.checkpoints.empty()) return false;
  s.core = s.checkpoints.back().snapshot;
  return true;
}

// ---------------------------------------------------------------------------
// Delta parsing and application

namespace {

std::optional<json> first_json_object(const std::string& text) {
  std::size_t start = text.find('{');
  while (start != std::string::npos) {
    int depth = 0;
    bool in_str = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_str) {
        if (c == '\\') ++i;
        else if (c == '"') in_str = false;
        continue;
      }
      if (c == '"') in_str = true;
      else if (c == '{') ++depth;
      else if (c == '}') {
        --depth;
        if (depth == 0) {
          json j = json::parse(text.substr(start, i - start + 1), nullptr, false);
          if (!j.is_discarded() && j.is_object()) return j;
          break;
        }
      }
    }
    start = text.find('{', start + 1);
  }
  return std::nullopt;
}

std::vector<std::string> string_array(const json& j, const char* key) {
  std::vector<std::string> out;
  if (j.contains(key) && j[key].is_array()) {
    for (const auto& v : j[key]) {
      if (v.is_string()) out.push_back(v.get<std::string>());
    }
  }
  return out;
}

}  // namespace

StateDelta parse_delta(const std::string& reply_text) {
  StateDelta delta;
  auto j = first_json_object(reply_text);
  if (!j) return delta;  // documented fallback: empty delta

  if (j->contains("evidence") && (*j)["evidence"].is_array()) {
    for (const auto& e : (*j)["evidence"]) {
      if (!e.is_object()) continue;
      DeltaEvidence de;
      de.text = e.value("text", "");
      if (de.text.empty()) continue;
      de.provenance = e.value("provenance", "");
      de.confidence =
          confidence_from_name(e.value("confidence", "med")).value_or(Confidence::med);
      de.depends_on = string_array(e, "depends_on");
      delta.evidence.push_back(std::move(de));
    }
  }
  if (j->contains("assumptions") && (*j)["assumptions"].is_array()) {
    for (const auto& a : (*j)["assumptions"]) {
      if (!a.is_object()) continue;
      DeltaAssumption da;
      da.text = a.value("text", "");
      if (da.text.empty()) continue;
      da.justification = a.value("justification", "");
      da.dependents = string_array(a, "dependents");
      delta.assumptions.push_back(std::move(da));
    }
  }
  if (j->contains("decisions") && (*j)["decisions"].is_array()) {
    for (const auto& d : (*j)["decisions"]) {
      if (!d.is_object()) continue;
      DeltaDecision dd;
      dd.text = d.value("text", "");
      if (dd.text.empty()) continue;
      dd.rationale = d.value("rationale", "");
      dd.reversible = d.value("reversible", true);
      dd.tag = d.value("tag", "");
      dd.pending = d.value("pending", false);
      dd.depends_on = string_array(d, "depends_on");
      delta.decisions.push_back(std::move(dd));
    }
  }
  if (j->contains("goals") && (*j)["goals"].is_array()) {
    for (const auto& g : (*j)["goals"]) {
      if (!g.is_object()) continue;
      DeltaGoal dg;
      dg.id = g.value("id", "");
      dg.text = g.value("text", "");
      dg.parent = g.value("parent", "");
      if (g.contains("status") && g["status"].is_string()) {
        dg.status = goal_status_from_name(g["status"].get<std::string>());
      }
      if (dg.id.empty() && dg.text.empty()) continue;
      delta.goals.push_back(std::move(dg));
    }
  }
  if (j->contains("conflicts") && (*j)["conflicts"].is_array()) {
    for (const auto& c : (*j)["conflicts"]) {
      if (!c.is_object()) continue;
      DeltaConflict dc;
      dc.element_a = c.value("a", "");
      dc.element_b = c.value("b", "");
      if (dc.element_a.empty() || dc.element_b.empty()) continue;
      dc.severity = severity_from_name(c.value("severity", "med")).value_or(Severity::med);
      delta.conflicts.push_back(std::move(dc));
    }
  }
  return delta;
}

std::optional<std::string> apply_delta(ReasoningState& s, const StateDelta& delta) {
  StateCore next = s.core;  // apply to a copy, commit only on success

  auto find_assumption = [&](const std::string& id) -> Assumption* {
    for (auto& a : next.assumptions) {
      if (a.id == id) return &a;
    }
    return nullptr;
  };

  for (const auto& de : delta.evidence) {
    Evidence e;
    e.id = "e" + std::to_string(next.next_evidence_id++);
    e.text = de.text;
    e.provenance = de.provenance;
    e.confidence = de.confidence;
    next.evidence.push_back(e);
    for (const auto& dep : de.depends_on) {
      Assumption* a = find_assumption(dep);
      if (a == nullptr) {
        return "evidence depends_on references missing assumption: " + dep;
      }
      a->dependents.push_back(e.id);
    }
  }
  for (const auto& da : delta.assumptions) {
    Assumption a;
    a.id = "a" + std::to_string(next.next_assumption_id++);
    a.text = da.text;
    a.justification = da.justification;
    for (const auto& dep : da.dependents) {
      if (!next.id_exists(dep)) {
        return "assumption dependents references missing element: " + dep;
      }
      a.dependents.push_back(dep);
    }
    next.assumptions.push_back(std::move(a));
  }
  for (const auto& dd : delta.decisions) {
    Decision d;
    d.id = "d" + std::to_string(next.next_decision_id++);
    d.text = dd.text;
    d.rationale = dd.rationale;
    d.reversible = dd.reversible;
    d.tag = dd.tag;
    d.pending = dd.pending;
    next.decisions.push_back(d);
    for (const auto& dep : dd.depends_on) {
      Assumption* a = find_assumption(dep);
      if (a == nullptr) {
        return "decision depends_on references missing assumption: " + dep;
      }
      a->dependents.push_back(d.id);
    }
  }
  for (const auto& dg : delta.goals) {
    if (!dg.id.empty()) {
      auto it = std::find_if(next.goals.begin(), next.goals.end(),
                             [&](const GoalNode& g) { return g.id == dg.id; });
      if (it == next.goals.end()) return "goal update references missing goal: " + dg.id;
      if (dg.status) it->status = *dg.status;
      if (!dg.text.empty()) it->text = dg.text;
    } else {
      GoalNode g;
      g.id = "g" + std::to_string(next.next_goal_id++);
      g.text = dg.text;
      g.status = dg.status.value_or(GoalStatus::open);
      std::string parent =
          dg.parent.empty() && !next.goals.empty() ? next.goals.front().id : dg.parent;
      if (!parent.empty()) {
        auto it = std::find_if(next.goals.begin(), next.goals.end(),
                               [&](const GoalNode& n) { return n.id == parent; });
        if (it == next.goals.end()) return "new goal references missing parent: " + parent;
        g.parent = parent;
        it->children.push_back(g.id);
      }
      next.goals.push_back(std::move(g));
    }
  }
  for (const auto& dc : delta.conflicts) {
    if (!next.id_exists(dc.element_a)) {
      return "conflict references missing element: " + dc.element_a;
    }
    if (!next.id_exists(dc.element_b)) {
      return "conflict references missing element: " + dc.element_b;
    }
    Conflict c;
    c.id = "c" + std::to_string(next.next_conflict_id++);
    c.element_a = dc.element_a;
    c.element_b = dc.element_b;
    c.severity = dc.severity;
    next.conflicts.push_back(std::move(c));
  }

  if (auto err = check_referential_integrity(next)) return err;
  s.core = std::move(next);
  refresh_uncertainty(s);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Invariant checks

std::optional<std::string> check_referential_integrity(const StateCore& core) {
  for (const auto& a : core.assumptions) {
    for (const auto& dep : a.dependents) {
      if (!core.id_exists(dep)) {
        return "assumption " + a.id + " has dangling dependent " + dep;
      }
    }
  }
  for (const auto& c : core.conflicts) {
    if (!core.id_exists(c.element_a)) {
      return "conflict " + c.id + " has dangling endpoint " + c.element_a;
    }
    if (!core.id_exists(c.element_b)) {
      return "conflict " + c.id + " has dangling endpoint " + c.element_b;
    }
  }
  for (const auto& g : core.goals) {
    if (!g.parent.empty() && !core.id_exists(g.parent)) {
      return "goal " + g.id + " has dangling parent " + g.parent;
    }
    for (const auto& ch : g.children) {
      if (!core.id_exists(ch)) return "goal " + g.id + " has dangling child " + ch;
    }
  }
  return std::nullopt;
}

namespace {

bool element_is_active(const StateCore& core, const std::string& id) {
  for (const auto& a : core.assumptions) {
    if (a.id == id) return a.status != AssumptionStatus::retracted;
  }
  for (const auto& e : core.evidence) {
    if (e.id == id) return !e.retracted;
  }
  for (const auto& d : core.decisions) {
    if (d.id == id) return !d.retracted;
  }
  for (const auto& g : core.goals) {
    if (g.id == id) return !g.retracted_by_cascade;
  }
  return false;  // conflicts and unknown ids are not cascade targets
}

}  // namespace

std::optional<std::string> check_cascade_completeness(const StateCore& core) {
  for (const auto& a : core.assumptions) {
    if (a.status != AssumptionStatus::retracted) continue;
    std::vector<std::string> frontier = a.dependents;
    std::set<std::string> seen;
    while (!frontier.empty()) {
      std::string id = frontier.back();
      frontier.pop_back();
      if (!seen.insert(id).second) continue;
      if (element_is_active(core, id)) {
        return "active element " + id + " depends on retracted assumption " + a.id;
      }
      for (const auto& inner : core.assumptions) {
        if (inner.id == id) {
          frontier.insert(frontier.end(), inner.dependents.begin(), inner.dependents.end());
        }
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// View compilation and completion

std::string compile_view(const ReasoningState& s, Regime regime) {
  const StateCore& c = s.core;
  std::string out;
  out += "Regime: " + std::string(regime_name(regime)) + "\n";
  char ubuf[32];
  std::snprintf(ubuf, sizeof(ubuf), "%.3f", c.uncertainty);
  out += "Uncertainty: " + std::string(ubuf) + "\n\n";

  if (regime == Regime::RECOVER) {
    out += "== DIAGNOSIS ==\n";
    if (c.last_diagnostic) {
      out += std::string("failure: ") + failure_type_name(c.last_diagnostic->failure_type) +
             ", health: " + health_name(c.last_diagnostic->health) + "\n";
      for (const auto& id : c.last_diagnostic->affected) {
        out += "  affected: " + id + " (" + c.element_text(id) + ")\n";
      }
    } else {
      out += "(no diagnostic recorded)\n";
    }
    out += "== FAILED GOALS ==\n";
    for (const auto& g : c.goals) {
      if (g.status == GoalStatus::blocked && !g.archived) {
        out += "  " + g.id + ": " + g.text + "\n";
      }
    }
    out += "\n";
  }

  out += "== GOALS ==\n";
  for (const auto& g : c.goals) {
    if (g.archived || g.retracted_by_cascade) continue;
    if (regime == Regime::EXECUTE && g.status == GoalStatus::done) continue;
    out += "  " + g.id + " [" + goal_status_name(g.status) + "] " + g.text + "\n";
  }

  if (regime == Regime::VERIFY) {
    out += "== CLAIMS TO CHALLENGE ==\n";
    out += "Treat each assumption below as a claim to challenge; look for\n";
    out += "counter-evidence before accepting it.\n";
  } else {
    out += "== ASSUMPTIONS ==\n";
  }
  for (const auto& a : c.assumptions) {
    if (a.status == AssumptionStatus::retracted) continue;
    out += "  " + a.id + " [" +
           (a.status == AssumptionStatus::validated ? "validated" : "active") + "] " + a.text +
           "\n";
  }

  out += "== EVIDENCE ==\n";
  for (const auto& e : c.evidence) {
    if (e.retracted) continue;
    const char* conf = e.confidence == Confidence::low
                           ? "low"
                           : e.confidence == Confidence::med ? "med" : "high";
    out += "  " + e.id + " [" + conf + "] " + e.text + "\n";
  }

  out += "== DECISIONS ==\n";
  for (const auto& d : c.decisions) {
    if (d.retracted) continue;
    out += "  " + d.id + (d.pending ? " [pending]" : "") +
           (d.tag.empty() ? "" : " [" + d.tag + "]") + " " + d.text + "\n";
  }

  out += "== CONFLICTS ==\n";
  for (const auto& cf : c.conflicts) {
    if (regime == Regime::EXECUTE && cf.resolved) continue;
    out += "  " + cf.id + " " + cf.element_a + " vs " + cf.element_b +
           (cf.resolved ? " (resolved)" : " (unresolved)") + "\n";
  }

  out += "== RECENT STEPS ==\n";
  for (const auto& st : c.trajectory) {
    out += (st.is_summary ? "  [summary] " : "  [step " + std::to_string(st.index) + "] ") +
           st.text + "\n";
  }

  out += "\nContinue with the next reasoning step. When the problem is solved,\n";
  out += "state the result as a decision and end with \"FINAL ANSWER: <answer>\".\n";
  return out;
}

std::optional<std::string> compile_answer(const ReasoningState& s) {
  for (auto it = s.core.decisions.rbegin(); it != s.core.decisions.rend(); ++it) {
    if (it->tag == "final_answer" && !it->retracted) return it->text;
  }
  for (auto it = s.core.trajectory.rbegin(); it != s.core.trajectory.rend(); ++it) {
    if (auto ans = strings::parse_final_answer(it->text)) return ans;
  }
  return std::nullopt;
}

bool is_complete(const ReasoningState& s) {
  if (s.core.regime == Regime::CONSOLIDATE) return true;
  return !s.core.goals.empty() && s.core.goals.front().status == GoalStatus::done;
}

}  // namespace reflect::heavy
