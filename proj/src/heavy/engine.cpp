#include "reflect/heavy/engine.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include <nlohmann/json.hpp>

#include "reflect/config.hpp"
#include "reflect/strings.hpp"

namespace reflect::heavy {

using nlohmann::json;

const char* operator_name(Operator op) {
  switch (op) {
    case Operator::Inspect: return "Inspect";
    case Operator::Stabilize: return "Stabilize";
    case Operator::Transform: return "Transform";
    case Operator::Diversify: return "Diversify";
  }
  return "Inspect";
}

ControllerConfig ControllerConfig::from_config(const reflect::Config& cfg) {
  ControllerConfig c;
  c.theta_u = cfg.get_double("heavy.theta_u", 0.6);
  c.k_max = cfg.get_int("heavy.k_max", 5);
  c.k_stall = cfg.get_int("heavy.k_stall", 4);
  c.t_max = cfg.get_int("heavy.t_max", 20);
  c.diversify_branches = cfg.get_int("heavy.diversify_branches", 3);
  c.diversify_steps = cfg.get_int("heavy.diversify_steps", 5);
  c.token_budget = cfg.get_int("heavy.token_budget", 200000);
  c.diversify_min_budget = cfg.get_int("heavy.diversify_min_budget", 2000);
  c.trajectory_verbatim_steps = cfg.get_int("heavy.trajectory_verbatim_steps", 5);
  return c;
}

namespace {

SamplingParams heavy_params(ToolContext& ctx, double temperature) {
  SamplingParams p;
  p.temperature = temperature;
  p.top_p = 0.95;
  p.max_tokens = ctx.opts.max_tokens;
  return p;
}

void trace_push(std::vector<TraceEvent>* trace, int step, const std::string& tag,
                const std::string& text) {
  if (trace) trace->push_back({step, tag, text});
}

/// Goal-status fingerprint + evidence count; any change counts as
/// progress for the stall detector.
std::size_t progress_signature(const StateCore& core) {
  std::size_t h = core.evidence.size() * 1315423911u;
  for (const auto& g : core.goals) {
    h = h * 31 + std::hash<std::string>{}(g.id) + static_cast<std::size_t>(g.status) * 7;
  }
  return h;
}

bool has_pending_major_decision(const StateCore& core) {
  return std::any_of(core.decisions.begin(), core.decisions.end(), [](const Decision& d) {
    return d.pending && !d.reversible && !d.retracted;
  });
}

bool has_critical_conflict(const StateCore& core) {
  return std::any_of(core.conflicts.begin(), core.conflicts.end(), [](const Conflict& c) {
    return !c.resolved && c.severity == Severity::critical;
  });
}

bool committed_plan_exists(const StateCore& core) {
  bool strategy = std::any_of(core.decisions.begin(), core.decisions.end(),
                              [](const Decision& d) {
                                return d.tag == "strategy" && !d.retracted && !d.pending;
                              });
  bool active_subgoal =
      std::any_of(core.goals.begin(), core.goals.end(), [](const GoalNode& g) {
        return !g.parent.empty() && g.status == GoalStatus::active && !g.archived &&
               !g.retracted_by_cascade;
      });
  return strategy && active_subgoal;
}

/// Retracts an assumption and transitively flags every dependent.
void retract_with_cascade(StateCore& core, const std::string& assumption_id) {
  std::vector<std::string> frontier;
  for (auto& a : core.assumptions) {
    if (a.id == assumption_id && a.status != AssumptionStatus::retracted) {
      a.status = AssumptionStatus::retracted;
      frontier = a.dependents;
    }
  }
  std::set<std::string> seen;
  while (!frontier.empty()) {
    std::string id = frontier.back();
    frontier.pop_back();
    if (!seen.insert(id).second) continue;
    for (auto& a : core.assumptions) {
      if (a.id == id) {
        if (a.status != AssumptionStatus::retracted) {
          a.status = AssumptionStatus::retracted;
          a.retracted_by_cascade = true;
        }
        frontier.insert(frontier.end(), a.dependents.begin(), a.dependents.end());
      }
    }
    for (auto& e : core.evidence) {
      if (e.id == id && !e.retracted) {
        e.retracted = true;
        e.retracted_by_cascade = true;
      }
    }
    for (auto& d : core.decisions) {
      if (d.id == id && !d.retracted) {
        d.retracted = true;
        d.retracted_by_cascade = true;
      }
    }
    for (auto& g : core.goals) {
      if (g.id == id && !g.retracted_by_cascade) {
        g.retracted_by_cascade = true;
        g.status = GoalStatus::blocked;
      }
    }
  }
}

void retract_element_any(StateCore& core, const std::string& id) {
  for (auto& a : core.assumptions) {
    if (a.id == id) {
      retract_with_cascade(core, id);
      return;
    }
  }
  for (auto& e : core.evidence) {
    if (e.id == id) e.retracted = true;
  }
  for (auto& d : core.decisions) {
    if (d.id == id) d.retracted = true;
  }
}

void add_replan_decision(StateCore& core, const std::string& why) {
  Decision d;
  d.id = "d" + std::to_string(core.next_decision_id++);
  d.text = "replan after rollback";
  d.rationale = why;
  d.reversible = true;
  d.tag = "replan";
  core.decisions.push_back(std::move(d));
}

void transform_rollback_fallback(ReasoningState& s, const std::string& why,
                                 std::vector<TraceEvent>* trace) {
  rollback_to_last_checkpoint(s);
  add_replan_decision(s.core, why);
  refresh_uncertainty(s);
  trace_push(trace, s.core.next_step_index, "backtrack", "rollback + replan: " + why);
}

/// One generate+extract+apply iteration shared by the main loop and the
/// Diversify branches.
void advance_one_step(ReasoningState& s, ToolContext& ctx, std::vector<TraceEvent>* trace) {
  std::string prompt = compile_view(s, s.core.regime);
  ModelReply reply = ctx.gateway.generate(prompt, heavy_params(ctx, 0.7), Purpose::generate);
  trace_push(trace, s.core.next_step_index, "thought", reply.text);

  TrajectoryStep step;
  step.index = s.core.next_step_index++;
  step.text = reply.text;
  s.core.trajectory.push_back(std::move(step));

  std::string extract_prompt = ctx.prompts.render("heavy_extract", {{"step", reply.text}});
  ModelReply extraction =
      ctx.gateway.generate(extract_prompt, heavy_params(ctx, 0.2), Purpose::extract);
  StateDelta delta = parse_delta(extraction.text);
  if (delta.empty()) {
    trace_push(trace, s.core.next_step_index, "extract", "empty delta (fallback)");
    refresh_uncertainty(s);
    return;
  }
  std::size_t conflicts_before = s.core.unresolved_conflicts();
  if (auto err = apply_delta(s, delta)) {
    trace_push(trace, s.core.next_step_index, "extract", "delta rejected: " + *err);
  } else {
    trace_push(trace, s.core.next_step_index, "extract", "delta applied");
    if (s.core.unresolved_conflicts() > conflicts_before) {
      trace_push(trace, s.core.next_step_index, "contradiction", "new conflict recorded");
    }
  }
}

}  // namespace

std::optional<Operator> controller_step(const ReasoningState& s, const Controller& ctrl) {
  const StateCore& core = s.core;
  if (core.unresolved_conflicts() > ctrl.last_unresolved_conflicts) {
    return Operator::Inspect;  // 1: new conflict
  }
  if (core.uncertainty > ctrl.config.theta_u) {
    return Operator::Inspect;  // 2: uncertainty over threshold
  }
  if (ctrl.steps_since_reflection > ctrl.config.k_max) {
    return Operator::Stabilize;  // 3: overdue consolidation
  }
  if (ctrl.steps_since_progress > ctrl.config.k_stall) {
    return Operator::Diversify;  // 4: stalled
  }
  if (has_pending_major_decision(core)) {
    return Operator::Inspect;  // 5: pending major decision
  }
  return std::nullopt;
}

Regime update_regime(const ReasoningState& s) {
  const StateCore& core = s.core;
  const Regime r = core.regime;
  const bool critical = (core.last_diagnostic &&
                         core.last_diagnostic->health == Health::critical) ||
                        has_critical_conflict(core);

  switch (r) {
    case Regime::EXPLORE:
      if (committed_plan_exists(core)) return Regime::EXECUTE;
      return r;
    case Regime::EXECUTE: {
      if (critical) return Regime::RECOVER;
      std::size_t leaves = 0, done = 0;
      bool blocked = false;
      for (const auto& g : core.goals) {
        if (g.archived || g.retracted_by_cascade) continue;
        if (!g.children.empty()) continue;
        ++leaves;
        if (g.status == GoalStatus::done) ++done;
        if (g.status == GoalStatus::blocked) blocked = true;
      }
      if (leaves > 0 && !blocked &&
          static_cast<double>(done) / static_cast<double>(leaves) >= 0.75) {
        return Regime::VERIFY;
      }
      return r;
    }
    case Regime::VERIFY:
      if (core.last_diagnostic && core.last_diagnostic->health == Health::critical) {
        return Regime::RECOVER;
      }
      if (core.last_diagnostic && core.last_diagnostic->health == Health::good) {
        return Regime::CONSOLIDATE;
      }
      return r;
    case Regime::RECOVER:
      if (core.uncertainty < 0.4 && !has_critical_conflict(core)) return Regime::EXECUTE;
      return r;
    case Regime::CONSOLIDATE:
      return r;
  }
  return r;
}

Diagnostic op_inspect(ReasoningState& s, ToolContext& ctx, std::vector<TraceEvent>* trace) {
  // the inspector sees only the state object, not the raw trajectory
  ReasoningState stateless = s;
  stateless.core.trajectory.clear();
  std::string rendered = compile_view(stateless, s.core.regime);
  std::string prompt = ctx.prompts.render("heavy_inspect", {{"state", rendered}});
  ModelReply reply = ctx.gateway.generate(prompt, heavy_params(ctx, 0.2), Purpose::inspect);

  Diagnostic dx;
  dx.failure_type = FailureType::incomplete;
  dx.health = Health::caution;
  auto j = json::parse(reply.text, nullptr, false);
  if (!j.is_object()) {
    std::size_t open = reply.text.find('{');
    if (open != std::string::npos) {
      j = json::parse(reply.text.substr(open), nullptr, false);
    }
  }
  if (j.is_object()) {
    if (auto ft = failure_type_from_name(j.value("failure_type", ""))) dx.failure_type = *ft;
    if (auto hv = health_from_name(j.value("health", ""))) dx.health = *hv;
    if (auto sv = severity_from_name(j.value("severity", "med"))) dx.severity = *sv;
    if (j.contains("affected") && j["affected"].is_array()) {
      for (const auto& v : j["affected"]) {
        if (v.is_string()) dx.affected.push_back(v.get<std::string>());
      }
    }
  }
  dx.normalize();
  s.core.last_diagnostic = dx;
  refresh_uncertainty(s);
  trace_push(trace, s.core.next_step_index, "operator",
             std::string("Inspect: ") + failure_type_name(dx.failure_type) + "/" +
                 health_name(dx.health));
  trace_push(trace, s.core.next_step_index, "reflection",
             std::string("inspection: ") + health_name(dx.health));
  return dx;
}

void op_stabilize(ReasoningState& s, Controller& ctrl, ToolContext& ctx,
                  std::vector<TraceEvent>* trace) {
  StateCore& core = s.core;
  const int keep = ctrl.config.trajectory_verbatim_steps;

  // 1. compress trajectory: recent `keep` steps verbatim, older summarized
  std::vector<TrajectoryStep> old_steps, recent;
  for (const auto& st : core.trajectory) {
    // existing summaries fold into the new summary input
    old_steps.push_back(st);
  }
  if (static_cast<int>(core.trajectory.size()) > keep) {
    recent.assign(core.trajectory.end() - keep, core.trajectory.end());
    old_steps.assign(core.trajectory.begin(), core.trajectory.end() - keep);
    std::string joined;
    for (const auto& st : old_steps) joined += st.text + "\n";
    std::string summary;
    try {
      std::string prompt = ctx.prompts.render("heavy_summarize", {{"steps", joined}});
      ModelReply reply =
          ctx.gateway.generate(prompt, heavy_params(ctx, 0.2), Purpose::generate);
      summary = strings::trim(reply.text);
    } catch (const std::exception&) {
      summary.clear();
    }
    if (summary.empty()) {
      // deterministic truncation fallback
      summary = joined.substr(0, 400);
    }
    TrajectoryStep sum;
    sum.index = old_steps.back().index;
    sum.text = summary;
    sum.is_summary = true;
    core.trajectory.clear();
    core.trajectory.push_back(std::move(sum));
    core.trajectory.insert(core.trajectory.end(), recent.begin(), recent.end());
  }

  // 2. promote assumptions validated by linked high-confidence evidence
  for (auto& a : core.assumptions) {
    if (a.status != AssumptionStatus::active) continue;
    for (const auto& dep : a.dependents) {
      for (const auto& e : core.evidence) {
        if (e.id == dep && !e.retracted && e.confidence == Confidence::high) {
          a.status = AssumptionStatus::validated;
        }
      }
    }
  }

  // 3. archive completed sub-goals (the root stays visible)
  for (auto& g : core.goals) {
    if (!g.parent.empty() && g.status == GoalStatus::done) g.archived = true;
  }

  // 4. checkpoint, 5. reset counters
  refresh_uncertainty(s);
  make_checkpoint(s);
  ctrl.steps_since_reflection = 0;
  trace_push(trace, core.next_step_index, "operator", "Stabilize");
  trace_push(trace, core.next_step_index, "reflection", "state consolidated");
}

void op_transform(ReasoningState& s, const Diagnostic& dx, ToolContext& ctx,
                  std::vector<TraceEvent>* trace) {
  StateCore& core = s.core;
  trace_push(trace, core.next_step_index, "operator",
             std::string("Transform: ") + failure_type_name(dx.failure_type));

  switch (dx.failure_type) {
    case FailureType::unsupported: {
      for (const auto& id : dx.affected) {
        bool known = core.id_exists(id);
        if (!known) {
          trace_push(trace, core.next_step_index, "operator",
                     "transform target not found: " + id);
          continue;
        }
        retract_with_cascade(core, id);
      }
      break;
    }
    case FailureType::contradiction: {
      // resolve the first affected (or first unresolved) conflict
      Conflict* target = nullptr;
      for (auto& c : core.conflicts) {
        bool in_affected = std::find(dx.affected.begin(), dx.affected.end(), c.id) !=
                           dx.affected.end();
        if (!c.resolved && (in_affected || dx.affected.empty())) {
          target = &c;
          break;
        }
      }
      if (target == nullptr) {
        for (auto& c : core.conflicts) {
          if (!c.resolved) {
            target = &c;
            break;
          }
        }
      }
      if (target == nullptr) {
        trace_push(trace, core.next_step_index, "operator", "no unresolved conflict found");
        break;
      }
      std::string prompt = ctx.prompts.render(
          "heavy_resolve", {{"a_id", target->element_a},
                            {"a_text", core.element_text(target->element_a)},
                            {"b_id", target->element_b},
                            {"b_text", core.element_text(target->element_b)}});
      std::string loser = target->element_b;  // deterministic default
      try {
        ModelReply reply =
            ctx.gateway.generate(prompt, heavy_params(ctx, 0.2), Purpose::verify);
        auto j = json::parse(reply.text, nullptr, false);
        if (j.is_object() && j.contains("loser") && j["loser"].is_string()) {
          std::string cand = j["loser"].get<std::string>();
          if (cand == target->element_a || cand == target->element_b) loser = cand;
        }
      } catch (const std::exception&) {
      }
      target->resolved = true;
      retract_element_any(core, loser);
      trace_push(trace, core.next_step_index, "contradiction",
                 "conflict " + target->id + " resolved against " + loser);
      break;
    }
    case FailureType::stalled: {
      transform_rollback_fallback(s, "stalled progress", trace);
      return;  // rollback already refreshed uncertainty
    }
    case FailureType::logic:
    case FailureType::arithmetic:
    case FailureType::incomplete: {
      // downgrade confidence on the flagged evidence
      for (const auto& id : dx.affected) {
        for (auto& e : core.evidence) {
          if (e.id != id) continue;
          if (e.confidence == Confidence::high) e.confidence = Confidence::med;
          else e.confidence = Confidence::low;
        }
      }
      break;
    }
  }
  refresh_uncertainty(s);
}

void op_diversify(ReasoningState& s, Controller& ctrl, ToolContext& ctx,
                  std::vector<TraceEvent>* trace) {
  trace_push(trace, s.core.next_step_index, "operator", "Diversify");
  const std::int64_t used = ctx.gateway.ledger().total_tokens();
  const std::int64_t remaining = ctrl.config.token_budget - used;
  if (ctrl.diversify_used || remaining < ctrl.config.diversify_min_budget) {
    trace_push(trace, s.core.next_step_index, "operator",
               ctrl.diversify_used ? "diversify already used; falling back"
                                   : "insufficient budget; falling back");
    transform_rollback_fallback(s, "diversify gate failed", trace);
    return;
  }
  ctrl.diversify_used = true;

  struct Branch {
    ReasoningState state;
    int index;
  };
  std::vector<Branch> branches;
  for (int b = 0; b < ctrl.config.diversify_branches; ++b) {
    branches.push_back({s, b});  // deep copy fork
  }
  for (auto& br : branches) {
    for (int step = 0; step < ctrl.config.diversify_steps; ++step) {
      try {
        advance_one_step(br.state, ctx, nullptr);
      } catch (const std::exception&) {
        break;  // an exhausted script ends the branch early
      }
      if (is_complete(br.state)) break;
    }
  }

  auto done_goals = [](const ReasoningState& st) {
    return std::count_if(st.core.goals.begin(), st.core.goals.end(), [](const GoalNode& g) {
      return g.status == GoalStatus::done;
    });
  };
  const Branch* winner = &branches.front();
  for (const auto& br : branches) {
    auto a = done_goals(br.state), b = done_goals(winner->state);
    if (a > b ||
        (a == b && br.state.core.uncertainty < winner->state.core.uncertainty)) {
      winner = &br;
    }
  }
  trace_push(trace, s.core.next_step_index, "operator",
             "diversify winner: branch " + std::to_string(winner->index));
  s = winner->state;
  refresh_uncertainty(s);
}

SolveOutcome run_heavyweight(const ProblemInstance& p, ToolContext& ctx,
                             const ControllerConfig& cfg) {
  SolveOutcome out;
  ReasoningState s = init_state(p);
  Controller ctrl(cfg);
  ctrl.last_progress_signature = progress_signature(s.core);

  bool completed = false;
  for (int t = 1; t <= cfg.t_max; ++t) {
    out.n_steps = t;
    if (ctx.gateway.ledger().total_tokens() >= cfg.token_budget) break;

    advance_one_step(s, ctx, &out.trace);
    ++ctrl.steps_since_reflection;

    std::size_t sig = progress_signature(s.core);
    if (sig != ctrl.last_progress_signature) {
      ctrl.steps_since_progress = 0;
      ctrl.last_progress_signature = sig;
    } else {
      ++ctrl.steps_since_progress;
    }

    auto op = controller_step(s, ctrl);
    ctrl.last_unresolved_conflicts = s.core.unresolved_conflicts();
    if (op) {
      switch (*op) {
        case Operator::Inspect: {
          Diagnostic dx = op_inspect(s, ctx, &out.trace);
          if (dx.health == Health::critical) {
            op_transform(s, dx, ctx, &out.trace);
          }
          break;
        }
        case Operator::Stabilize:
          op_stabilize(s, ctrl, ctx, &out.trace);
          break;
        case Operator::Diversify:
          op_diversify(s, ctrl, ctx, &out.trace);
          break;
        case Operator::Transform:
          break;  // Transform is only entered through Inspect
      }
      ctrl.last_unresolved_conflicts = s.core.unresolved_conflicts();
    }

    s.core.regime = update_regime(s);
    char ubuf[16];
    std::snprintf(ubuf, sizeof(ubuf), "%.3f", s.core.uncertainty);
    out.trace.push_back({t, "regime", std::string(regime_name(s.core.regime)) + " u=" + ubuf});

    if (is_complete(s)) {
      completed = true;
      break;
    }
  }

  out.answer = compile_answer(s);
  if (completed) {
    out.finish_reason = out.answer ? FinishReason::validated : FinishReason::null_answer;
  } else {
    out.finish_reason = FinishReason::budget_exhausted;
  }
  out.ledger = ctx.gateway.ledger();
  out.n_llm_calls = static_cast<int>(out.ledger.count_with_purpose(Purpose::generate) +
                                     out.ledger.count_with_purpose(Purpose::extract));
  if (out.answer) out.trace.push_back({out.n_steps, "final_answer", *out.answer});
  return out;
}

}  // namespace reflect::heavy
