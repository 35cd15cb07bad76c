// Acceptance suite: one check per release criterion, one PASS/FAIL line
// each, nonzero exit when anything fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "reflect/analytics.hpp"
#include "reflect/engines/horn.hpp"
#include "reflect/engines/vote.hpp"
#include "reflect/heavy/engine.hpp"
#include "reflect/runner.hpp"
#include "reflect/scoring.hpp"
#include "reflect/strings.hpp"
#include "reflect/tools.hpp"

#ifndef REFLECT_SOURCE_DIR
#define REFLECT_SOURCE_DIR "."
#endif

using namespace reflect;
namespace fs = std::filesystem;

namespace {

struct CheckContext {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string fmt1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string data_path(const std::string& rel) {
  return std::string(REFLECT_SOURCE_DIR) + "/data/" + rel;
}

const PromptLibrary kPrompts;

// ---------------------------------------------------------------------------

void criterion_slope_regression(CheckContext& c) {
  auto started = std::chrono::steady_clock::now();
  auto cells = load_accuracy_cells(data_path("table2_fixture.csv"));

  const std::vector<std::string> all_domains = {"swe_bench", "qasper", "proofwriter",
                                                "aime", "alfred", "finqa"};
  auto points6 = compute_lift_points(cells, "direct", "full_reflect", all_domains);
  c.expect(points6.size() == 6, "expected six models in the fixture");
  // anchor: the six-domain direct means span 21.3 (weakest) .. 29.3 (strongest)
  double min_direct = 1e9, max_direct = -1e9;
  for (const auto& [x, _] : points6) {
    min_direct = std::min(min_direct, x);
    max_direct = std::max(max_direct, x);
  }
  c.expect(fmt1(min_direct) == "21.3", "six-domain direct mean floor (got " +
                                           fmt1(min_direct) + ", want 21.3)");
  c.expect(fmt1(max_direct) == "29.3", "six-domain direct mean ceiling (got " +
                                           fmt1(max_direct) + ", want 29.3)");

  auto f6 = fit_lift_slope(points6);
  c.expect(std::fabs(f6.slope - (-1.69)) <= 0.01,
           "six-domain slope " + std::to_string(f6.slope) + " not within 0.01 of -1.69");
  c.expect(std::fabs(f6.pearson_r - (-0.76)) <= 0.01,
           "six-domain r " + std::to_string(f6.pearson_r) + " not within 0.01 of -0.76");

  const std::vector<std::string> llm_domains = {"qasper", "proofwriter", "aime", "finqa"};
  auto f4 = fit_lift_slope(compute_lift_points(cells, "direct", "full_reflect", llm_domains));
  c.expect(std::fabs(f4.slope - (-1.66)) <= 0.01,
           "four-domain slope " + std::to_string(f4.slope) + " not within 0.01 of -1.66");
  c.expect(std::fabs(f4.pearson_r - (-0.84)) <= 0.01,
           "four-domain r " + std::to_string(f4.pearson_r) + " not within 0.01 of -0.84");
  c.expect(std::fabs(f4.p_value - 0.036) <= 0.002,
           "four-domain p " + std::to_string(f4.p_value) + " not within 0.002 of 0.036");

  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - started)
                     .count();
  c.expect(elapsed < 1000, "slope regression took " + std::to_string(elapsed) + "ms");
}

void criterion_wilson(CheckContext& c) {
  auto check = [&](long s, long n, const char* lo, const char* hi) {
    auto w = wilson_ci(s, n);
    c.expect(fmt1(w.lo * 100) == lo, "wilson(" + std::to_string(s) + "," + std::to_string(n) +
                                         ") lo " + fmt1(w.lo * 100) + " != " + lo);
    c.expect(fmt1(w.hi * 100) == hi, "wilson(" + std::to_string(s) + "," + std::to_string(n) +
                                         ") hi " + fmt1(w.hi * 100) + " != " + hi);
  };
  check(1, 60, "0.3", "8.9");
  check(0, 60, "0.0", "6.0");
  check(90, 100, "82.6", "94.5");
}

void criterion_cost(CheckContext& c) {
  auto check = [&](double tokens, double acc, double dollars, double per1k) {
    auto cm = cost_metrics(tokens, acc, 0.89e-6);
    c.expect(std::fabs(cm.dollars_per_100_correct - dollars) <= 0.01,
             "cost(" + std::to_string((int)tokens) + ") $" +
                 std::to_string(cm.dollars_per_100_correct) + " not within $0.01 of " +
                 std::to_string(dollars));
    c.expect(std::fabs(cm.acc_per_1k_tokens - per1k) <= 0.1,
             "acc/1k(" + std::to_string((int)tokens) + ") " +
                 std::to_string(cm.acc_per_1k_tokens) + " not within 0.1 of " +
                 std::to_string(per1k));
  };
  check(2001, 26.9, 0.66, 13.4);
  check(32062, 27.8, 10.26, 0.9);
  check(1993, 48.8, 0.36, 24.5);
}

void criterion_tiered_scorer(CheckContext& c) {
  c.expect(score_swe_tiered("The bug is in foo()").value == 0.0, "prose must score 0.0");
  std::string readme = "--- a/README.md\n+++ b/README.md\n@@ -1,1 +1,1 @@\n-a\n+b\n";
  c.expect(score_swe_tiered(readme).value == 0.3, "non-code diff must score 0.3");
  std::string broken = "--- a/m.py\n+++ b/m.py\n@@ -1,1 +1,1 @@\n-x\n+def f(:\n";
  c.expect(score_swe_tiered(broken).value == 0.6, "broken added line must score 0.6");
  std::string fine = "--- a/m.py\n+++ b/m.py\n@@ -1,1 +1,1 @@\n-x\n+def f(): return 1\n";
  c.expect(score_swe_tiered(fine).value == 1.0, "parsing added line must score 1.0");
}

void criterion_modal_vote(CheckContext& c) {
  auto v = engines::modal_vote(std::vector<std::string>{"392", "776", "392"});
  c.expect(v && *v == "392", "modal vote over the walkthrough candidates");

  std::mt19937 rng(987654321);
  for (int trial = 0; trial < 1000; ++trial) {
    // build a multiset with a unique mode
    int n_values = 2 + static_cast<int>(rng() % 4);
    std::vector<std::string> values;
    for (int i = 0; i < n_values; ++i) values.push_back("v" + std::to_string(i));
    std::vector<std::string> multiset;
    int mode_count = 2 + static_cast<int>(rng() % 3);
    for (int i = 0; i < mode_count; ++i) multiset.push_back(values[0]);
    for (int i = 1; i < n_values; ++i) {
      int count = static_cast<int>(rng() % static_cast<unsigned>(mode_count));  // < mode
      for (int k = 0; k < count; ++k) multiset.push_back(values[i]);
    }
    auto expected = engines::modal_vote(multiset);
    std::shuffle(multiset.begin(), multiset.end(), rng);
    auto got = engines::modal_vote(multiset);
    if (!(got && expected && *got == *expected && *got == "v0")) {
      c.expect(false, "permutation invariance failed at trial " + std::to_string(trial));
      return;
    }
  }
}

void criterion_forward_chain(CheckContext& c) {
  auto started = std::chrono::steady_clock::now();
  std::mt19937 rng(246813579);
  std::vector<std::string> atoms;
  for (int i = 0; i < 8; ++i) atoms.push_back("atom" + std::to_string(i));

  auto oracle_closure = [](const engines::HornRuleBase& base) {
    std::set<std::string> known = base.facts;
    while (true) {
      std::size_t before = known.size();
      for (const auto& r : base.rules) {
        bool all = true;
        for (const auto& a : r.antecedents) {
          if (known.count(a) == 0) all = false;
        }
        if (all) known.insert(r.consequent);
      }
      if (known.size() == before) return known;
    }
  };

  long committed = 0, disagreements = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    engines::HornRuleBase base;
    int nf = static_cast<int>(rng() % 4);
    for (int i = 0; i < nf; ++i) base.add_fact(atoms[rng() % 8]);
    int nr = static_cast<int>(rng() % 11);
    for (int i = 0; i < nr; ++i) {
      std::vector<std::string> ante;
      int na = 1 + static_cast<int>(rng() % 3);
      for (int a = 0; a < na; ++a) ante.push_back(atoms[rng() % 8]);
      base.add_rule(ante, atoms[rng() % 8]);
    }
    auto closure = oracle_closure(base);
    for (const auto& q : atoms) {
      auto v = engines::forward_chain(base, q);
      if (v.label == engines::ChainVerdict::Label::TRUE_) {
        ++committed;
        if (closure.count(q) == 0) ++disagreements;
      } else if (v.label == engines::ChainVerdict::Label::FALSE_) {
        ++committed;
        if (closure.count(q) > 0) ++disagreements;
      }
    }
  }
  c.expect(disagreements == 0, std::to_string(disagreements) +
                                   " committed verdicts disagree with the closure oracle");
  c.expect(committed > 0, "no committed verdicts exercised");
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - started)
                     .count();
  c.expect(elapsed < 30000, "chain soundness sweep took " + std::to_string(elapsed) + "ms");
}

void criterion_golden_trace(CheckContext& c) {
  auto problems =
      load_problems_jsonl(std::string(REFLECT_SOURCE_DIR) +
                          "/data/fixtures/problems_smoke.jsonl");
  const ProblemInstance* aime = nullptr;
  for (const auto& p : problems) {
    if (p.problem_id == "aime-0392") aime = &p;
  }
  if (aime == nullptr) {
    c.expect(false, "aime-0392 fixture missing");
    return;
  }
  auto backend = ScriptedBackend::from_jsonl_file(
      std::string(REFLECT_SOURCE_DIR) + "/data/fixtures/aime_golden_script.jsonl");
  ModelGateway gw(backend);
  ToolContext ctx{gw, kPrompts, HarnessOptions{}};
  auto registry = ToolRegistry::make(RegistryLayer::FULL);
  auto out = dispatch(*aime, registry, ctx, ClassifierThresholds{}, default_verb_lexicon());

  c.expect(out.shape == Shape::SYMBOLIC, "golden problem must classify SYMBOLIC");
  c.expect(out.answer && *out.answer == "392",
           "answer " + out.answer.value_or("(null)") + " != 392");
  c.expect(out.finish_reason == FinishReason::code_solved,
           std::string("finish_reason ") + finish_reason_name(out.finish_reason));
  c.expect(out.n_steps == 1, "n_steps " + std::to_string(out.n_steps));
  c.expect(out.n_llm_calls == 3, "n_llm_calls " + std::to_string(out.n_llm_calls));
  c.expect(out.ledger.total_tokens() == 1272,
           "tokens_total " + std::to_string(out.ledger.total_tokens()) + " != 1272");
}

ProblemInstance fixture_problem(int i) {
  ProblemInstance p;
  p.problem_id = "fx" + std::to_string(i);
  int kind = i % 7;
  int variant = i / 7;
  std::string salt = " case " + std::to_string(variant) + ".";
  switch (kind) {
    case 0:  // SWE-style: repo context plus patch request
      p.domain_label = "swe_bench";
      p.instruction = "Repair the failing module and emit a unified diff patch." + salt;
      p.context.push_back({"repo", "diff --git a/mod.py b/mod.py\ndef f():\n    pass\n"});
      break;
    case 1:  // AIME-style: math question, integer 0..999
      p.domain_label = "aime";
      p.instruction = "Compute (" + std::to_string(100 + i) +
                      " * 37 + 11) mod 1000 and report the remainder when divided by 1000; "
                      "the answer is an integer between 0 and 999." + salt;
      break;
    case 2:  // rule query
      p.domain_label = "proofwriter";
      p.instruction = "Is the statement true, false, or unknown? \"The fox is quick.\"" + salt;
      p.context.push_back({"rules", "If the fox is young then the fox is quick. "
                                    "The fox is young. Fact " + std::to_string(i) + "."});
      break;
    case 3:  // tabular
      p.domain_label = "finqa";
      p.instruction = "What is the combined total of column b?" + salt;
      p.context.push_back({"table", "a | b\n" + std::to_string(i) + " | 2\n3 | 4\n"});
      break;
    case 4: {  // evidence: long documents
      p.domain_label = "qasper";
      p.instruction = "Which dataset does the study rely on?" + salt;
      std::string filler;
      for (int k = 0; k < 1600; ++k) filler += "token ";
      p.context.push_back({"paper", filler});
      break;
    }
    case 5:  // procedural
      p.domain_label = "alfred";
      p.instruction = "Pick up the plate, clean it, and put it on the shelf." + salt;
      p.context.push_back({"world", "agent at: counter\nobjects: plate at counter\n"
                                    "available actions: goto, pickup, put, clean\n"});
      break;
    default:  // fallback
      p.domain_label = "misc";
      p.instruction = "Name the opposite of the word 'cold'." + salt;
      break;
  }
  return p;
}

void criterion_classifier_determinism(CheckContext& c) {
  ClassifierThresholds thresholds;
  const auto& lexicon = default_verb_lexicon();
  std::vector<ProblemInstance> fixtures;
  for (int i = 0; i < 100; ++i) fixtures.push_back(fixture_problem(i));

  std::vector<Shape> first;
  for (const auto& p : fixtures) first.push_back(classify(p, thresholds, lexicon));
  for (int run = 0; run < 5; ++run) {
    for (std::size_t i = 0; i < fixtures.size(); ++i) {
      if (classify(fixtures[i], thresholds, lexicon) != first[i]) {
        c.expect(false, "classification changed across repeated runs (fixture " +
                            std::to_string(i) + ")");
        return;
      }
    }
  }
  // deleting the domain label must not change anything
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    auto scrubbed = fixtures[i];
    scrubbed.domain_label.clear();
    if (classify(scrubbed, thresholds, lexicon) != first[i]) {
      c.expect(false, "classification depends on domain_label (fixture " +
                          std::to_string(i) + ")");
      return;
    }
  }
  c.expect(first[0] == Shape::ARTIFACT, "SWE-style fixture must map to ARTIFACT");
  c.expect(first[1] == Shape::SYMBOLIC, "AIME-style fixture must map to SYMBOLIC");
  c.expect(first[2] == Shape::LOGICAL, "rule-query fixture must map to LOGICAL");
}

void criterion_validate_loop(CheckContext& c) {
  HarnessOptions opts;
  {
    ModelGateway gw(ScriptedBackend::from_replies({"bad", "GOOD"}));
    ToolContext ctx{gw, kPrompts, opts};
    ToolSpec spec = tool_spec("diff_verifier");
    spec.max_retries = 2;
    Validator v = [](const std::string& t) { return ValidationResult{t == "GOOD", "nope"}; };
    auto r = validate_loop("p", v, spec, ctx);
    c.expect(r.output && r.n_retries == 1, "invalid->valid must cost exactly one retry");
  }
  {
    ModelGateway gw(ScriptedBackend::from_replies({"a", "b", "c", "d"}));
    ToolContext ctx{gw, kPrompts, opts};
    ToolSpec spec = tool_spec("diff_verifier");
    spec.max_retries = 3;
    Validator v = [](const std::string&) { return ValidationResult{false, "never"}; };
    auto r = validate_loop("p", v, spec, ctx);
    c.expect(!r.output && r.n_retries == 3, "exhaustion must report n_retries=max_retries");
  }
  // randomized schedules never exceed the budget
  std::mt19937 rng(13579);
  for (int trial = 0; trial < 200; ++trial) {
    int max_retries = static_cast<int>(rng() % 5);
    int first_valid = static_cast<int>(rng() % 7);  // may exceed the budget
    std::vector<std::string> replies;
    for (int i = 0; i <= max_retries; ++i) {
      replies.push_back(i == first_valid ? "GOOD" : "bad");
    }
    ModelGateway gw(ScriptedBackend::from_replies(replies));
    ToolContext ctx{gw, kPrompts, opts};
    ToolSpec spec = tool_spec("diff_verifier");
    spec.max_retries = max_retries;
    Validator v = [](const std::string& t) { return ValidationResult{t == "GOOD", "r"}; };
    auto r = validate_loop("p", v, spec, ctx);
    if (r.n_retries > max_retries) {
      c.expect(false, "retry budget exceeded at trial " + std::to_string(trial));
      return;
    }
    bool should_succeed = first_valid <= max_retries;
    if (should_succeed != r.output.has_value()) {
      c.expect(false, "success mismatch at trial " + std::to_string(trial));
      return;
    }
    if (r.output && r.n_retries != first_valid) {
      c.expect(false, "retry count mismatch at trial " + std::to_string(trial));
      return;
    }
  }
}

void criterion_heavyweight(CheckContext& c) {
  using namespace reflect::heavy;
  // (a) fuzzed delta/operator applications hold both structural invariants
  std::mt19937 rng(1122334455);
  ProblemInstance p;
  p.problem_id = "hw";
  p.instruction = "fuzz";
  auto s = init_state(p);
  Controller ctrl{ControllerConfig{}};
  ModelGateway gw(ScriptedBackend::from_replies({}));
  ToolContext ctx{gw, kPrompts, HarnessOptions{}};
  auto random_id = [&](char kind) {
    return std::string(1, kind) + std::to_string(rng() % 40 + 1);
  };
  for (int i = 0; i < 10000; ++i) {
    int action = static_cast<int>(rng() % 10);
    if (action < 6) {
      StateDelta d;
      if (rng() % 2) {
        DeltaEvidence de;
        de.text = "e" + std::to_string(i);
        de.confidence = static_cast<Confidence>(rng() % 3);
        if (rng() % 3 == 0) de.depends_on.push_back(random_id('a'));
        d.evidence.push_back(de);
      }
      if (rng() % 2) {
        DeltaAssumption da;
        da.text = "a" + std::to_string(i);
        if (rng() % 4 == 0) da.dependents.push_back(random_id('e'));
        d.assumptions.push_back(da);
      }
      if (rng() % 4 == 0) {
        d.conflicts.push_back({random_id('e'), random_id('a'),
                               static_cast<Severity>(rng() % 3)});
      }
      apply_delta(s, d);
    } else if (action < 8) {
      Diagnostic dx;
      dx.failure_type = static_cast<FailureType>(rng() % 6);
      dx.health = Health::critical;
      dx.affected.push_back(random_id(rng() % 2 ? 'a' : 'e'));
      dx.normalize();
      op_transform(s, dx, ctx, nullptr);
    } else if (action == 8) {
      op_stabilize(s, ctrl, ctx, nullptr);
    } else {
      rollback_to_last_checkpoint(s);
      refresh_uncertainty(s);
    }
    if (check_referential_integrity(s.core) || check_cascade_completeness(s.core) ||
        s.core.uncertainty < 0.0 || s.core.uncertainty > 1.0) {
      c.expect(false, "structural invariant violated at fuzz step " + std::to_string(i));
      return;
    }
  }

  // (b) rollback exactness
  auto s2 = init_state(p);
  make_checkpoint(s2);
  auto snapshot = s2.checkpoints.back().snapshot;
  StateDelta d;
  d.evidence.push_back({"mutate", "", Confidence::med, {}});
  apply_delta(s2, d);
  rollback_to_last_checkpoint(s2);
  c.expect(s2.core == snapshot, "rollback must restore the exact snapshot");

  // (c) u bounds and conflict saturation: 3 conflicts -> signal 1.0, mean 0.25
  auto s3 = init_state(p);
  StateDelta base;
  base.evidence.push_back({"x", "", Confidence::high, {}});
  base.evidence.push_back({"y", "", Confidence::high, {}});
  apply_delta(s3, base);
  StateDelta conflicts;
  for (int i = 0; i < 3; ++i) conflicts.conflicts.push_back({"e1", "e2", Severity::med});
  apply_delta(s3, conflicts);
  c.expect(std::fabs(s3.core.uncertainty - 0.25) < 1e-12,
           "three conflicts must give u=0.25, got " + std::to_string(s3.core.uncertainty));
  StateDelta more;
  for (int i = 0; i < 3; ++i) more.conflicts.push_back({"e1", "e2", Severity::med});
  apply_delta(s3, more);
  c.expect(std::fabs(s3.core.uncertainty - 0.25) < 1e-12,
           "conflict signal must saturate at 3");

  // (d) FSM closure over randomized runs
  const std::vector<std::pair<Regime, Regime>> allowed = {
      {Regime::EXPLORE, Regime::EXECUTE},  {Regime::EXECUTE, Regime::VERIFY},
      {Regime::EXECUTE, Regime::RECOVER},  {Regime::VERIFY, Regime::CONSOLIDATE},
      {Regime::VERIFY, Regime::RECOVER},   {Regime::RECOVER, Regime::EXECUTE},
  };
  for (int run = 0; run < 40; ++run) {
    auto fs_state = init_state(p);
    Regime prev = fs_state.core.regime;
    for (int step = 0; step < 30; ++step) {
      StateDelta rd;
      if (rng() % 2) {
        DeltaDecision dd;
        dd.text = "d";
        dd.tag = rng() % 2 ? "strategy" : "";
        rd.decisions.push_back(dd);
      }
      if (rng() % 2) {
        DeltaGoal dg;
        dg.text = "g";
        dg.status = static_cast<GoalStatus>(rng() % 4);
        rd.goals.push_back(dg);
      }
      apply_delta(fs_state, rd);
      if (rng() % 4 == 0) {
        Diagnostic dx;
        dx.health = static_cast<Health>(rng() % 3);
        if (dx.health == Health::critical) dx.affected.push_back("g1");
        fs_state.core.last_diagnostic = dx;
      }
      Regime next = update_regime(fs_state);
      if (next != prev) {
        bool ok = false;
        for (const auto& [from, to] : allowed) {
          if (from == prev && to == next) ok = true;
        }
        if (!ok) {
          c.expect(false, std::string("illegal transition ") + regime_name(prev) + " -> " +
                              regime_name(next));
          return;
        }
      }
      fs_state.core.regime = next;
      prev = next;
      if (next == Regime::CONSOLIDATE) break;
    }
  }

  // (e) critical inspection runs Transform immediately after Inspect
  std::vector<ScriptedBackend::Entry> entries = {
      {"two values", Purpose::generate, {}, {}},
      {R"({"evidence":[{"text":"v5"},{"text":"v7"}]})", Purpose::extract, {}, {}},
      {"conflict", Purpose::generate, {}, {}},
      {R"({"conflicts":[{"a":"e1","b":"e2","severity":"critical"}]})", Purpose::extract, {}, {}},
      {R"({"failure_type":"contradiction","affected":["c1"],"health":"critical"})",
       Purpose::inspect, {}, {}},
      {R"({"loser":"e2"})", Purpose::verify, {}, {}},
  };
  ModelGateway gw2(std::make_shared<ScriptedBackend>(entries, true));
  ToolContext ctx2{gw2, kPrompts, HarnessOptions{}};
  ControllerConfig cfg;
  cfg.t_max = 2;
  auto out = run_heavyweight(p, ctx2, cfg);
  bool adjacent = false;
  std::string last_op;
  for (const auto& e : out.trace) {
    if (e.tag != "operator") continue;
    std::string op = e.text.substr(0, e.text.find(':'));
    if (last_op == "Inspect" && op == "Transform") adjacent = true;
    last_op = op;
  }
  c.expect(adjacent, "Transform must immediately follow a critical Inspect");
}

void criterion_analytics(CheckContext& c) {
  // verifier FP on a 76/100 wrong-accepted fixture
  std::vector<ResultRecord> fp;
  for (int i = 0; i < 100; ++i) {
    ResultRecord r;
    r.model = "m";
    r.method = "x";
    r.problem_id = "p" + std::to_string(i);
    r.check_verdict = "CORRECT";
    r.score = i < 76 ? 0.0 : 1.0;
    r.correct = i >= 76;
    r.converged = true;
    fp.push_back(r);
  }
  c.expect(std::fabs(verifier_fp_rate(fp) - 0.76) < 1e-12, "verifier FP rate must be 0.76");

  // reflect success on a (9 fires, 4 correct) fixture
  std::vector<ResultRecord> rs;
  for (int i = 0; i < 9; ++i) {
    ResultRecord r;
    r.model = "m";
    r.method = "x";
    r.problem_id = "p" + std::to_string(i);
    r.reflect_fired = true;
    r.correct = i < 4;
    r.converged = true;
    rs.push_back(r);
  }
  auto success = reflect_success_rate(rs);
  c.expect(success.fires == 9 && success.success_rate &&
               fmt1(*success.success_rate * 100.0) == "44.4",
           "reflect success must report 44.4%");

  // convergence on a (290, 10) fixture
  std::vector<ResultRecord> conv;
  for (int i = 0; i < 300; ++i) {
    ResultRecord r;
    r.model = "m";
    r.method = "x";
    r.problem_id = "p" + std::to_string(i);
    r.converged = i < 290;
    conv.push_back(r);
  }
  c.expect(fmt1(convergence_rate(conv).at({"m", "x"}) * 100.0) == "96.7",
           "convergence must report 96.7%");
}

void criterion_end_to_end(CheckContext& c) {
  auto started = std::chrono::steady_clock::now();
  auto problems = load_problems_jsonl(std::string(REFLECT_SOURCE_DIR) +
                                      "/data/fixtures/problems_smoke.jsonl");

  SuiteConfig cfg;
  cfg.run_id = "acceptance";
  cfg.method = "full";
  cfg.model = "scripted";
  cfg.seeds = {1, 2};
  cfg.script_path =
      std::string(REFLECT_SOURCE_DIR) + "/data/fixtures/script_smoke.jsonl";

  auto base = fs::temp_directory_path() / ("reflect_acceptance_" +
                                           std::to_string(::getpid()));
  fs::remove_all(base);
  cfg.out_dir = (base / "full").string();
  auto csv_path = run_suite(cfg, problems);

  std::ifstream in(csv_path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string full_text = buf.str();

  auto records = load_result_csv(csv_path);
  c.expect(records.size() == problems.size() * 2,
           "expected " + std::to_string(problems.size() * 2) + " rows, got " +
               std::to_string(records.size()));
  long correct = 0, scored = 0;
  for (const auto& r : records) {
    if (r.correct) {
      ++scored;
      if (*r.correct) ++correct;
    }
    if (r.problem_id == "swe-greet") {
      c.expect(r.score == 1.0, "patch fixture must reach tier 1.0");
    }
  }
  c.expect(scored == 12 && correct == 12,
           "scripted fixture answers must all score correct (got " +
               std::to_string(correct) + "/" + std::to_string(scored) + ")");

  // interrupt after three rows, resume, and compare bytes
  auto lines_end = full_text.find('\n');
  for (int i = 0; i < 3; ++i) lines_end = full_text.find('\n', lines_end + 1);
  std::string truncated = full_text.substr(0, lines_end + 1);
  SuiteConfig resume_cfg = cfg;
  resume_cfg.out_dir = (base / "resume").string();
  fs::create_directories(resume_cfg.out_dir);
  {
    std::ofstream f(fs::path(resume_cfg.out_dir) / "results.csv");
    f << truncated;
  }
  auto resumed_path = run_suite(resume_cfg, problems);
  std::ifstream resumed(resumed_path);
  std::stringstream buf2;
  buf2 << resumed.rdbuf();
  c.expect(buf2.str() == full_text, "interrupt-and-resume must be byte-identical");

  auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
                     std::chrono::steady_clock::now() - started)
                     .count();
  c.expect(elapsed < 300, "fixture suite took " + std::to_string(elapsed) + "s");
  fs::remove_all(base);
}

struct Criterion {
  const char* name;
  void (*fn)(CheckContext&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"1 slope regression (six-domain and four-domain refits)", criterion_slope_regression},
      {"2 Wilson confidence intervals", criterion_wilson},
      {"3 cost metrics", criterion_cost},
      {"4 tiered patch scorer", criterion_tiered_scorer},
      {"5 modal vote", criterion_modal_vote},
      {"6 forward-chain soundness (1000 random bases)", criterion_forward_chain},
      {"7 golden symbolic trace", criterion_golden_trace},
      {"8 classifier determinism (100 fixtures x 5 runs)", criterion_classifier_determinism},
      {"9 validate loop retry budget", criterion_validate_loop},
      {"10 heavyweight state invariants", criterion_heavyweight},
      {"11 analytics definitions", criterion_analytics},
      {"12 end-to-end suite determinism", criterion_end_to_end},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    CheckContext c;
    try {
      criterion.fn(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    if (c.failures.empty()) {
      std::printf("PASS  criterion %s\n", criterion.name);
    } else {
      ++failures;
      std::printf("FAIL  criterion %s\n", criterion.name);
      for (const auto& f : c.failures) std::printf("      - %s\n", f.c_str());
    }
  }
  return failures == 0 ? 0 : 1;
}
