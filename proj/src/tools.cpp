#include "reflect/tools.hpp"

#include <algorithm>
#include <stdexcept>

#include "reflect/config.hpp"
#include "reflect/engines/diff.hpp"
#include "reflect/engines/fences.hpp"
#include "reflect/engines/horn.hpp"
#include "reflect/engines/tfidf.hpp"
#include "reflect/engines/vote.hpp"
#include "reflect/engines/world.hpp"
#include "reflect/strings.hpp"

namespace reflect {

const char* finish_reason_name(FinishReason r) {
  switch (r) {
    case FinishReason::code_solved: return "code_solved";
    case FinishReason::chain_committed: return "chain_committed";
    case FinishReason::vote: return "vote";
    case FinishReason::validated: return "validated";
    case FinishReason::fallback: return "fallback";
    case FinishReason::null_answer: return "null_answer";
    case FinishReason::budget_exhausted: return "budget_exhausted";
    case FinishReason::error: return "error";
  }
  return "null_answer";
}

std::optional<FinishReason> finish_reason_from_name(const std::string& name) {
  static const std::pair<const char*, FinishReason> table[] = {
      {"code_solved", FinishReason::code_solved},
      {"chain_committed", FinishReason::chain_committed},
      {"vote", FinishReason::vote},
      {"validated", FinishReason::validated},
      {"fallback", FinishReason::fallback},
      {"null_answer", FinishReason::null_answer},
      {"budget_exhausted", FinishReason::budget_exhausted},
      {"error", FinishReason::error},
  };
  for (const auto& [n, r] : table) {
    if (name == n) return r;
  }
  return std::nullopt;
}

ToolSpec tool_spec(const std::string& tool_name) {
  if (tool_name == "python_symbolic") {
    return {"python_symbolic", Shape::SYMBOLIC, 3, 0.7, 0.5, 1, std::nullopt};
  }
  if (tool_name == "python_tabular") {
    return {"python_tabular", Shape::TABULAR, 3, 0.7, 0.5, 1, std::nullopt};
  }
  if (tool_name == "forward_chain") {
    return {"forward_chain", Shape::LOGICAL, 5, 0.7, std::nullopt, 0, std::nullopt};
  }
  if (tool_name == "retrieval_grounded") {
    return {"retrieval_grounded", Shape::EVIDENCE, 1, 0.2, std::nullopt, 0, std::nullopt};
  }
  if (tool_name == "alfred_state_tracker") {
    return {"alfred_state_tracker", Shape::PROCEDURAL, 5, 0.7, 0.5, 2, "preconditions"};
  }
  if (tool_name == "diff_verifier") {
    return {"diff_verifier", Shape::ARTIFACT, 1, 0.4, 0.4, 3, "unified_diff"};
  }
  if (tool_name == "direct_cot_sc") {
    return {"direct_cot_sc", Shape::FALLBACK, 5, 0.7, std::nullopt, 0, std::nullopt};
  }
  throw std::invalid_argument("unknown tool: " + tool_name);
}

HarnessOptions HarnessOptions::from_config(const Config& cfg) {
  HarnessOptions o;
  o.sandbox.interpreter = cfg.get_string("sandbox.interpreter", "python3");
  o.sandbox.timeout_ms = cfg.get_int("sandbox.timeout_ms", 5000);
  o.max_tokens = cfg.get_int("gateway.max_tokens", 1024);
  o.evidence_top_sections = cfg.get_int("evidence.top_sections", 5);
  o.artifact_max_retries = cfg.get_int("artifact.max_retries", 3);
  o.procedural_max_retries = cfg.get_int("procedural.max_retries", 2);
  o.procedural_regenerate_all = cfg.get_bool("procedural.regenerate_all", true);
  return o;
}

namespace {

SamplingParams params_for(const ToolSpec& spec, double temperature, int max_tokens) {
  SamplingParams p;
  p.temperature = temperature;
  p.top_p = 0.95;
  p.max_tokens = max_tokens;
  (void)spec;
  return p;
}

ModelReply traced_generate(ToolContext& ctx, SolveOutcome& out, const std::string& prompt,
                           const SamplingParams& params, Purpose purpose) {
  ModelReply r = ctx.gateway.generate(prompt, params, purpose);
  out.trace.push_back({out.n_steps, "llm_call", purpose_name(purpose)});
  return r;
}

void finalize(SolveOutcome& out, const ToolContext& ctx) {
  out.ledger = ctx.gateway.ledger();
  out.n_llm_calls = static_cast<int>(out.ledger.count_with_purpose(Purpose::generate) +
                                     out.ledger.count_with_purpose(Purpose::extract));
  if (out.answer) {
    out.trace.push_back({out.n_steps, "final_answer", *out.answer});
  }
}

/// Runs one K-sample code round: draw, extract fences, execute, collect
/// printed answers (absent for samples that fail to execute or print).
std::vector<std::optional<std::string>> run_code_round(ToolContext& ctx, SolveOutcome& out,
                                                       const std::string& prompt,
                                                       const SamplingParams& params, int k) {
  std::vector<std::optional<std::string>> candidates;
  auto replies = ctx.gateway.draw_k_samples(prompt, params, k, Purpose::generate);
  for (const auto& reply : replies) {
    out.trace.push_back({out.n_steps, "llm_call", "generate"});
    auto code = engines::extract_fenced_code(reply.text);
    if (!code) {
      out.trace.push_back({out.n_steps, "sandbox", "no code fence"});
      candidates.push_back(std::nullopt);
      continue;
    }
    auto result = engines::run_sandbox(*code, ctx.opts.sandbox);
    out.trace.push_back(
        {out.n_steps, "sandbox", engines::exit_status_name(result.exit_status)});
    candidates.push_back(result.extracted_answer);
  }
  return candidates;
}

SolveOutcome code_vote_tool(const ProblemInstance& p, ToolContext& ctx,
                            const char* template_key, const std::string& table_text) {
  const ToolSpec spec = tool_spec(template_key);
  SolveOutcome out;
  out.n_steps = 1;

  std::map<std::string, std::string> vars = {
      {"instruction", p.instruction},
      {"context", p.joined_context()},
      {"table", table_text},
      {"hint", ""},
  };
  std::string prompt = ctx.prompts.render(template_key, vars);
  auto candidates = run_code_round(ctx, out, prompt,
                                   params_for(spec, spec.primary_temperature,
                                              ctx.opts.max_tokens),
                                   spec.k_samples);
  auto winner = engines::modal_vote(candidates);
  if (!winner && spec.max_retries > 0) {
    // all samples failed to execute: one retry round at the retry temperature
    out.n_retries = 1;
    vars["hint"] = ctx.prompts.render("symbolic_retry_hint", {});
    prompt = ctx.prompts.render(template_key, vars);
    candidates = run_code_round(
        ctx, out, prompt,
        params_for(spec, spec.retry_temperature.value_or(spec.primary_temperature),
                   ctx.opts.max_tokens),
        spec.k_samples);
    winner = engines::modal_vote(candidates);
  }
  if (winner) {
    out.answer = *winner;
    out.finish_reason = FinishReason::code_solved;
    out.trace.push_back({out.n_steps, "vote", *winner});
  } else {
    out.finish_reason = FinishReason::null_answer;
  }
  finalize(out, ctx);
  return out;
}

/// The statement to judge: a quoted span in the instruction, else the
/// text after "statement:", else the instruction's first sentence.
std::string extract_logical_query(const ProblemInstance& p) {
  const std::string& ins = p.instruction;
  std::size_t q1 = ins.find('"');
  if (q1 != std::string::npos) {
    std::size_t q2 = ins.find('"', q1 + 1);
    if (q2 != std::string::npos && q2 > q1 + 1) {
      return ins.substr(q1 + 1, q2 - q1 - 1);
    }
  }
  std::string lower = strings::to_lower(ins);
  std::size_t pos = lower.find("statement:");
  if (pos != std::string::npos) {
    std::string rest = ins.substr(pos + 10);
    auto sentences = strings::split_sentences(rest);
    if (!sentences.empty()) return sentences[0];
    return strings::trim(rest);
  }
  auto sentences = strings::split_sentences(ins);
  return sentences.empty() ? ins : sentences[0];
}

std::optional<std::string> parse_tfu_answer(const std::string& reply) {
  auto marked = strings::parse_final_answer(reply);
  std::string source = marked ? *marked : reply;
  std::string lower = strings::to_lower(strings::trim(source));
  if (strings::starts_with(lower, "true")) return "True";
  if (strings::starts_with(lower, "false")) return "False";
  if (strings::starts_with(lower, "unknown")) return "Unknown";
  if (!marked) return std::nullopt;
  return std::nullopt;
}

}  // namespace

ValidateLoopResult validate_loop(const std::string& base_prompt, const Validator& validator,
                                 const ToolSpec& spec, ToolContext& ctx,
                                 std::vector<TraceEvent>* trace) {
  ValidateLoopResult result;
  std::string prompt = base_prompt;
  for (int attempt = 0; attempt <= spec.max_retries; ++attempt) {
    double temp = attempt == 0 ? spec.primary_temperature
                               : spec.retry_temperature.value_or(spec.primary_temperature);
    ModelReply reply =
        ctx.gateway.generate(prompt, params_for(spec, temp, ctx.opts.max_tokens),
                             Purpose::generate);
    if (trace) trace->push_back({0, "llm_call", "generate"});
    ValidationResult v = validator(reply.text);
    if (trace) {
      trace->push_back({0, "validate", v.ok ? "accepted" : "rejected: " + v.reason});
    }
    if (v.ok) {
      result.output = reply.text;
      result.n_retries = attempt;
      return result;
    }
    prompt = base_prompt +
             "\n\nYour previous reply was rejected: " + v.reason +
             "\nFollow the required format exactly.\n";
  }
  result.n_retries = spec.max_retries;
  return result;
}

SolveOutcome tool_symbolic(const ProblemInstance& p, ToolContext& ctx) {
  return code_vote_tool(p, ctx, "python_symbolic", "");
}

SolveOutcome tool_tabular(const ProblemInstance& p, ToolContext& ctx) {
  std::string table = p.table_blocks ? *p.table_blocks : p.joined_context();
  return code_vote_tool(p, ctx, "python_tabular", table);
}

SolveOutcome tool_logical(const ProblemInstance& p, ToolContext& ctx) {
  const ToolSpec spec = tool_spec("forward_chain");
  SolveOutcome out;
  out.n_steps = 1;

  auto extraction = engines::extract_rules(p.joined_context());
  std::string query = extract_logical_query(p);
  auto verdict = engines::forward_chain(extraction.base, query);
  if (verdict.committed()) {
    out.answer = engines::chain_label_name(verdict.label);
    out.finish_reason = FinishReason::chain_committed;
    for (const auto& step : verdict.derivation) {
      out.trace.push_back({out.n_steps, "chain", step});
    }
    finalize(out, ctx);
    return out;
  }

  // Unknown-delegation path: K CoT samples, modal vote over parsed labels
  std::string prompt = ctx.prompts.render(
      "logical_delegate", {{"context", p.joined_context()}, {"query", query}});
  auto replies = ctx.gateway.draw_k_samples(
      prompt, params_for(spec, spec.primary_temperature, ctx.opts.max_tokens),
      spec.k_samples, Purpose::generate);
  std::vector<std::optional<std::string>> votes;
  for (const auto& reply : replies) {
    out.trace.push_back({out.n_steps, "llm_call", "generate"});
    votes.push_back(parse_tfu_answer(reply.text));
  }
  auto winner = engines::modal_vote(votes);
  if (winner) {
    // restore canonical capitalization lost in vote normalization
    std::string w = *winner;
    if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    out.answer = w;
    out.finish_reason = FinishReason::vote;
    out.trace.push_back({out.n_steps, "vote", w});
  } else {
    out.finish_reason = FinishReason::null_answer;
  }
  finalize(out, ctx);
  return out;
}

SolveOutcome tool_evidence(const ProblemInstance& p, ToolContext& ctx) {
  const ToolSpec spec = tool_spec("retrieval_grounded");
  SolveOutcome out;
  out.n_steps = 1;

  std::vector<engines::NamedSection> sections;
  for (const auto& doc : p.context) sections.push_back({doc.name, doc.text});
  if (sections.empty()) sections.push_back({"context", ""});
  auto ranked = engines::tfidf_retrieve(
      p.instruction, sections, static_cast<std::size_t>(ctx.opts.evidence_top_sections));

  std::string inlined;
  for (const auto& sec : ranked) {
    inlined += "[" + (sec.name.empty() ? "section " + std::to_string(sec.index) : sec.name) +
               "]\n" + sec.text + "\n\n";
    out.trace.push_back({out.n_steps, "observation", "retrieved: " + sec.name});
  }

  std::string prompt = ctx.prompts.render(
      "retrieval_grounded", {{"sections", inlined}, {"instruction", p.instruction}});
  ModelReply reply = traced_generate(
      ctx, out, prompt, params_for(spec, spec.primary_temperature, ctx.opts.max_tokens),
      Purpose::extract);

  std::string trimmed = strings::trim(reply.text);
  if (trimmed.empty()) {
    out.finish_reason = FinishReason::null_answer;
  } else {
    auto marked = strings::parse_final_answer(reply.text);
    out.answer = marked ? *marked : trimmed;
    out.finish_reason = FinishReason::vote;
  }
  finalize(out, ctx);
  return out;
}

SolveOutcome tool_procedural(const ProblemInstance& p, ToolContext& ctx) {
  const ToolSpec base_spec = tool_spec("alfred_state_tracker");
  ToolSpec spec = base_spec;
  spec.max_retries = ctx.opts.procedural_max_retries;
  SolveOutcome out;
  out.n_steps = 1;

  auto world = engines::parse_world(p.joined_context());
  if (!world) {
    out.finish_reason = FinishReason::null_answer;
    out.trace.push_back({out.n_steps, "action", "no world block in context"});
    finalize(out, ctx);
    return out;
  }

  std::vector<engines::Action> best_plan;
  engines::PrefixScore best_score;
  bool have_best = false;
  std::string feedback;

  for (int round = 0; round <= spec.max_retries; ++round) {
    double temp = round == 0 ? spec.primary_temperature
                             : spec.retry_temperature.value_or(spec.primary_temperature);
    std::string prompt = ctx.prompts.render(
        "alfred_state_tracker",
        {{"world", p.joined_context()},
         {"instruction", p.instruction},
         {"feedback", feedback.empty() ? "" : "Previous plans failed: " + feedback + "\n"}});
    auto replies = ctx.gateway.draw_k_samples(
        prompt, params_for(spec, temp, ctx.opts.max_tokens), spec.k_samples,
        Purpose::generate);
    for (const auto& reply : replies) {
      out.trace.push_back({out.n_steps, "llm_call", "generate"});
      auto plan = engines::parse_plan(reply.text);
      auto score = engines::prefix_score(*world, plan);
      out.trace.push_back({out.n_steps, "action",
                           "plan scored " + std::to_string(score.valid_prefix_len) + "/" +
                               std::to_string(score.total)});
      bool better =
          !have_best || score.valid_prefix_len > best_score.valid_prefix_len ||
          (score.valid_prefix_len == best_score.valid_prefix_len && best_score.total == 0 &&
           score.total > 0);
      if (better) {
        best_plan = plan;
        best_score = score;
        have_best = true;
      }
    }
    if (have_best && best_score.total > 0 && best_score.fully_valid()) break;
    if (round < spec.max_retries) {
      out.n_retries = round + 1;
      feedback = have_best && !best_score.first_failure.empty() ? best_score.first_failure
                                                                : "no parseable plan";
    }
  }

  if (!have_best || best_plan.empty()) {
    out.finish_reason = FinishReason::null_answer;
  } else {
    out.answer = engines::serialize_plan(best_plan);
    out.finish_reason = best_score.fully_valid() ? FinishReason::validated
                                                 : FinishReason::vote;
  }
  finalize(out, ctx);
  return out;
}

SolveOutcome tool_artifact(const ProblemInstance& p, ToolContext& ctx) {
  ToolSpec spec = tool_spec("diff_verifier");
  spec.max_retries = ctx.opts.artifact_max_retries;
  SolveOutcome out;
  out.n_steps = 1;

  std::string prompt = ctx.prompts.render(
      "diff_verifier",
      {{"instruction", p.instruction}, {"context", p.joined_context()}, {"feedback", ""}});
  Validator validator = [](const std::string& text) {
    auto doc = engines::validate_diff(text);
    return ValidationResult{doc.is_valid_unified, doc.first_error};
  };
  auto result = validate_loop(prompt, validator, spec, ctx, &out.trace);
  out.n_retries = result.n_retries;
  if (result.output) {
    out.answer = strings::trim(*result.output);
    out.finish_reason = FinishReason::validated;
  } else {
    out.finish_reason = FinishReason::null_answer;
  }
  finalize(out, ctx);
  return out;
}

SolveOutcome tool_fallback(const ProblemInstance& p, ToolContext& ctx) {
  const ToolSpec spec = tool_spec("direct_cot_sc");
  SolveOutcome out;
  out.n_steps = 1;

  std::string prompt = ctx.prompts.render(
      "direct_cot_sc", {{"instruction", p.instruction}, {"context", p.joined_context()}});
  auto replies = ctx.gateway.draw_k_samples(
      prompt, params_for(spec, spec.primary_temperature, ctx.opts.max_tokens),
      spec.k_samples, Purpose::generate);
  std::vector<std::optional<std::string>> votes;
  for (const auto& reply : replies) {
    out.trace.push_back({out.n_steps, "llm_call", "generate"});
    votes.push_back(strings::parse_final_answer(reply.text));
  }
  auto winner = engines::modal_vote(votes);
  if (winner) {
    out.answer = *winner;
    out.finish_reason = FinishReason::vote;
    out.trace.push_back({out.n_steps, "vote", *winner});
  } else {
    out.finish_reason = FinishReason::null_answer;
  }
  finalize(out, ctx);
  return out;
}

SolveOutcome solve_with_tool(const std::string& tool_name, const ProblemInstance& p,
                             ToolContext& ctx) {
  if (tool_name == "python_symbolic") return tool_symbolic(p, ctx);
  if (tool_name == "python_tabular") return tool_tabular(p, ctx);
  if (tool_name == "forward_chain") return tool_logical(p, ctx);
  if (tool_name == "retrieval_grounded") return tool_evidence(p, ctx);
  if (tool_name == "alfred_state_tracker") return tool_procedural(p, ctx);
  if (tool_name == "diff_verifier") return tool_artifact(p, ctx);
  if (tool_name == "direct_cot_sc") return tool_fallback(p, ctx);
  throw std::invalid_argument("unknown tool: " + tool_name);
}

SolveOutcome dispatch(const ProblemInstance& p, const ToolRegistry& registry,
                      ToolContext& ctx, const ClassifierThresholds& thresholds,
                      const std::vector<std::string>& verb_lexicon) {
  const Shape shape = classify(p, thresholds, verb_lexicon);
  const std::string tool_name = registry.tool_for(shape);
  const std::string fallback_name = registry.tool_for(Shape::FALLBACK);

  SolveOutcome out;
  try {
    out = solve_with_tool(tool_name, p, ctx);
  } catch (const TransportError&) {
    throw;
  } catch (const ScriptExhausted&) {
    throw;
  } catch (const std::exception& e) {
    out = SolveOutcome{};
    out.finish_reason = FinishReason::null_answer;
    out.trace.push_back({0, "action", std::string("tool error: ") + e.what()});
  }
  out.shape = shape;
  out.tool = tool_name;

  if (!out.answer && tool_name != fallback_name) {
    SolveOutcome fb = solve_with_tool(fallback_name, p, ctx);
    SolveOutcome merged;
    merged.answer = fb.answer;
    merged.finish_reason = fb.answer ? FinishReason::fallback : FinishReason::null_answer;
    merged.n_steps = out.n_steps + fb.n_steps;
    merged.n_retries = out.n_retries + fb.n_retries;
    merged.trace = out.trace;
    merged.trace.insert(merged.trace.end(), fb.trace.begin(), fb.trace.end());
    merged.shape = shape;
    merged.tool = fallback_name;
    merged.ledger = ctx.gateway.ledger();
    merged.n_llm_calls =
        static_cast<int>(merged.ledger.count_with_purpose(Purpose::generate) +
                         merged.ledger.count_with_purpose(Purpose::extract));
    return merged;
  }

  // refresh ledger/call counts in case of the caught-error path
  out.ledger = ctx.gateway.ledger();
  out.n_llm_calls = static_cast<int>(out.ledger.count_with_purpose(Purpose::generate) +
                                     out.ledger.count_with_purpose(Purpose::extract));
  return out;
}

}  // namespace reflect
