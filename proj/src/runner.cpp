#include "reflect/runner.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "reflect/engines/diff.hpp"
#include "reflect/scoring.hpp"
#include "reflect/strings.hpp"

namespace reflect {

namespace fs = std::filesystem;
using nlohmann::json;

MethodKnobs MethodKnobs::from_config(const Config& cfg) {
  MethodKnobs k;
  k.react_max_steps = cfg.get_int("methods.react_max_steps", 8);
  k.self_refine_rounds = cfg.get_int("methods.self_refine_rounds", 3);
  k.reflexion_episodes = cfg.get_int("methods.reflexion_episodes", 3);
  k.checklist_interval = cfg.get_int("methods.checklist_interval", 3);
  k.baseline_temperature = cfg.get_double("methods.baseline_temperature", 0.6);
  k.baseline_top_p = cfg.get_double("methods.baseline_top_p", 0.95);
  return k;
}

namespace {

SamplingParams baseline_params(const MethodKnobs& knobs, int max_tokens) {
  SamplingParams p;
  p.temperature = knobs.baseline_temperature;
  p.top_p = knobs.baseline_top_p;
  p.max_tokens = max_tokens;
  return p;
}

void finalize_outcome(SolveOutcome& out, const ToolContext& ctx) {
  out.ledger = ctx.gateway.ledger();
  out.n_llm_calls = static_cast<int>(out.ledger.count_with_purpose(Purpose::generate) +
                                     out.ledger.count_with_purpose(Purpose::extract));
  if (out.answer) out.trace.push_back({out.n_steps, "final_answer", *out.answer});
}

struct ReactTurn {
  std::string thought;
  std::string action;       // "lookup" or "finish" or ""
  std::string action_arg;
};

ReactTurn parse_react_reply(const std::string& reply) {
  ReactTurn turn;
  for (const auto& line : strings::split(reply, '\n')) {
    std::string t = strings::trim(line);
    std::string lower = strings::to_lower(t);
    if (strings::starts_with(lower, "thought:")) {
      turn.thought = strings::trim(t.substr(8));
    } else if (strings::starts_with(lower, "action:")) {
      std::string act = strings::trim(t.substr(7));
      std::string act_lower = strings::to_lower(act);
      std::size_t open = act.find('[');
      std::size_t close = act.rfind(']');
      if (open != std::string::npos && close != std::string::npos && close > open) {
        turn.action_arg = act.substr(open + 1, close - open - 1);
        if (strings::starts_with(act_lower, "finish")) turn.action = "finish";
        else if (strings::starts_with(act_lower, "lookup")) turn.action = "lookup";
      }
    }
  }
  return turn;
}

/// Desk-scale observation source: the first context line containing the
/// term, else the best TF-IDF section prefix.
std::string lookup_in_context(const ProblemInstance& p, const std::string& term) {
  for (const auto& doc : p.context) {
    for (const auto& line : strings::split(doc.text, '\n')) {
      if (strings::contains_ci(line, term)) return strings::trim(line);
    }
  }
  return "(no match for \"" + term + "\")";
}

}  // namespace

SolveOutcome run_direct(const ProblemInstance& p, ToolContext& ctx, const MethodKnobs& knobs) {
  SolveOutcome out;
  out.n_steps = 1;
  std::string prompt = ctx.prompts.render(
      "direct_cot_sc", {{"instruction", p.instruction}, {"context", p.joined_context()}});
  ModelReply reply = ctx.gateway.generate(
      prompt, baseline_params(knobs, ctx.opts.max_tokens), Purpose::generate);
  out.trace.push_back({1, "llm_call", "generate"});
  out.trace.push_back({1, "thought", reply.text});
  auto answer = strings::parse_final_answer(reply.text);
  if (answer) {
    out.answer = answer;
    out.finish_reason = FinishReason::vote;
  } else {
    out.finish_reason = FinishReason::null_answer;
  }
  finalize_outcome(out, ctx);
  return out;
}

SolveOutcome run_react(const ProblemInstance& p, ToolContext& ctx, const MethodKnobs& knobs,
                       int max_steps) {
  SolveOutcome out;
  std::string transcript;
  for (int step = 1; step <= max_steps; ++step) {
    out.n_steps = step;
    std::string prompt = ctx.prompts.render(
        "react_step", {{"instruction", p.instruction + "\n\n" + p.joined_context()},
                       {"transcript", transcript}});
    ModelReply reply = ctx.gateway.generate(
        prompt, baseline_params(knobs, ctx.opts.max_tokens), Purpose::generate);
    out.trace.push_back({step, "llm_call", "generate"});
    ReactTurn turn = parse_react_reply(reply.text);
    out.trace.push_back({step, "thought", turn.thought});
    transcript += "Thought: " + turn.thought + "\n";
    if (turn.action == "finish") {
      out.trace.push_back({step, "action", "finish[" + turn.action_arg + "]"});
      out.answer = strings::trim(turn.action_arg);
      out.finish_reason = FinishReason::vote;
      finalize_outcome(out, ctx);
      return out;
    }
    if (turn.action == "lookup") {
      std::string obs = lookup_in_context(p, turn.action_arg);
      out.trace.push_back({step, "action", "lookup[" + turn.action_arg + "]"});
      out.trace.push_back({step, "observation", obs});
      transcript += "Action: lookup[" + turn.action_arg + "]\nObservation: " + obs + "\n";
    } else {
      out.trace.push_back({step, "action", "(none)"});
      transcript += "Action: (none parsed; reply with Thought/Action lines)\n";
    }
  }
  out.finish_reason = FinishReason::budget_exhausted;
  finalize_outcome(out, ctx);
  return out;
}

SolveOutcome run_self_refine(const ProblemInstance& p, ToolContext& ctx,
                             const MethodKnobs& knobs, int rounds) {
  SolveOutcome out;
  out.n_steps = 1;
  std::string prompt = ctx.prompts.render(
      "direct_cot_sc", {{"instruction", p.instruction}, {"context", p.joined_context()}});
  ModelReply draft = ctx.gateway.generate(
      prompt, baseline_params(knobs, ctx.opts.max_tokens), Purpose::generate);
  out.trace.push_back({1, "llm_call", "generate"});
  out.trace.push_back({1, "thought", draft.text});
  std::string current = draft.text;

  for (int round = 1; round <= rounds; ++round) {
    out.n_steps = round + 1;
    std::string critique_prompt = ctx.prompts.render(
        "self_refine_critique", {{"instruction", p.instruction}, {"draft", current}});
    ModelReply critique = ctx.gateway.generate(
        critique_prompt, baseline_params(knobs, ctx.opts.max_tokens), Purpose::critique);
    out.trace.push_back({round + 1, "llm_call", "critique"});
    out.trace.push_back({round + 1, "reflection", critique.text});
    if (strings::contains_ci(critique.text, "no issues")) break;

    std::string revise_prompt = ctx.prompts.render(
        "self_refine_revise", {{"instruction", p.instruction},
                               {"draft", current},
                               {"critique", critique.text}});
    ModelReply revision = ctx.gateway.generate(
        revise_prompt, baseline_params(knobs, ctx.opts.max_tokens), Purpose::generate);
    out.trace.push_back({round + 1, "llm_call", "generate"});
    out.trace.push_back({round + 1, "thought", revision.text});
    current = revision.text;
  }

  auto answer = strings::parse_final_answer(current);
  if (answer) {
    out.answer = answer;
    out.finish_reason = FinishReason::vote;
  } else {
    out.finish_reason = FinishReason::null_answer;
  }
  finalize_outcome(out, ctx);
  return out;
}

FeedbackOracle make_score_feedback_oracle(const ProblemInstance& p) {
  return [&p](const std::optional<std::string>& answer) {
    if (!answer) return false;
    if (p.gold.kind == GoldAnswer::Kind::none_structural) {
      return engines::validate_diff(*answer).is_valid_unified;
    }
    try {
      return score_answer(answer, p.gold).value == 1.0;
    } catch (const std::exception&) {
      return false;
    }
  };
}

SolveOutcome run_reflexion(const ProblemInstance& p, ToolContext& ctx,
                           const MethodKnobs& knobs, int episodes,
                           const FeedbackOracle& feedback) {
  SolveOutcome out;
  std::string memory;
  std::optional<std::string> last_answer;

  for (int episode = 1; episode <= episodes; ++episode) {
    out.n_steps = episode;
    std::string memory_block =
        memory.empty() ? "" : "Lessons from previous attempts:\n" + memory + "\n";
    std::string prompt = ctx.prompts.render(
        "reflexion_attempt", {{"instruction", p.instruction},
                              {"context", p.joined_context()},
                              {"memory", memory_block}});
    ModelReply attempt = ctx.gateway.generate(
        prompt, baseline_params(knobs, ctx.opts.max_tokens), Purpose::generate);
    out.trace.push_back({episode, "llm_call", "generate"});
    out.trace.push_back({episode, "thought", attempt.text});
    last_answer = strings::parse_final_answer(attempt.text);

    if (feedback(last_answer)) {
      out.answer = last_answer;
      out.finish_reason = FinishReason::vote;
      finalize_outcome(out, ctx);
      return out;
    }
    if (episode == episodes) break;

    std::string reflect_prompt = ctx.prompts.render(
        "reflexion_reflect", {{"instruction", p.instruction}, {"attempt", attempt.text}});
    ModelReply reflection = ctx.gateway.generate(
        reflect_prompt, baseline_params(knobs, ctx.opts.max_tokens), Purpose::critique);
    out.trace.push_back({episode, "llm_call", "critique"});
    out.trace.push_back({episode, "reflection", reflection.text});
    memory += "- " + strings::trim(reflection.text) + "\n";
  }

  out.answer = last_answer;
  out.finish_reason = last_answer ? FinishReason::vote : FinishReason::null_answer;
  finalize_outcome(out, ctx);
  return out;
}

SolveOutcome run_minimal_reflect(const ProblemInstance& p, ToolContext& ctx,
                                 const MethodKnobs& knobs, int max_steps,
                                 int checklist_interval) {
  SolveOutcome out;
  std::string transcript;
  for (int step = 1; step <= max_steps; ++step) {
    out.n_steps = step;
    bool inject = checklist_interval > 0 && step % checklist_interval == 0;
    std::string turn_transcript = transcript;
    if (inject) turn_transcript += ctx.prompts.render("minimal_checklist", {});
    std::string prompt = ctx.prompts.render(
        "react_step", {{"instruction", p.instruction + "\n\n" + p.joined_context()},
                       {"transcript", turn_transcript}});
    ModelReply reply = ctx.gateway.generate(
        prompt, baseline_params(knobs, ctx.opts.max_tokens), Purpose::generate);
    out.trace.push_back({step, "llm_call", "generate"});
    ReactTurn turn = parse_react_reply(reply.text);
    out.trace.push_back({step, "thought", turn.thought});
    transcript += "Thought: " + turn.thought + "\n";
    if (strings::contains_ci(reply.text, "reflection:")) {
      out.trace.push_back({step, "reflection", "inline checklist block"});
    }
    if (turn.action == "finish") {
      out.trace.push_back({step, "action", "finish[" + turn.action_arg + "]"});
      out.answer = strings::trim(turn.action_arg);
      out.finish_reason = FinishReason::vote;
      finalize_outcome(out, ctx);
      return out;
    }
    if (turn.action == "lookup") {
      std::string obs = lookup_in_context(p, turn.action_arg);
      out.trace.push_back({step, "action", "lookup[" + turn.action_arg + "]"});
      out.trace.push_back({step, "observation", obs});
      transcript += "Action: lookup[" + turn.action_arg + "]\nObservation: " + obs + "\n";
    } else {
      out.trace.push_back({step, "action", "(none)"});
    }
  }
  out.finish_reason = FinishReason::budget_exhausted;
  finalize_outcome(out, ctx);
  return out;
}

// ---------------------------------------------------------------------------
// Suite orchestration

namespace {

struct ScriptEntry {
  std::string problem_id;
  std::optional<long> seed;
  ScriptedBackend::Entry entry;
};

std::vector<ScriptEntry> load_suite_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open script file: " + path);
  std::vector<ScriptEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = strings::trim(line);
    if (t.empty()) continue;
    json j = json::parse(t);
    ScriptEntry e;
    e.problem_id = j.value("problem_id", "");
    if (j.contains("seed")) e.seed = j["seed"].get<long>();
    e.entry.reply = j.value("reply", "");
    if (j.contains("purpose") && j["purpose"].is_string()) {
      e.entry.purpose = purpose_from_name(j["purpose"].get<std::string>());
    }
    if (j.contains("prompt_tokens")) {
      e.entry.prompt_tokens = j["prompt_tokens"].get<std::int64_t>();
    }
    if (j.contains("completion_tokens")) {
      e.entry.completion_tokens = j["completion_tokens"].get<std::int64_t>();
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::shared_ptr<Backend> backend_for_task(const SuiteConfig& config,
                                          const std::vector<ScriptEntry>& script,
                                          const std::string& problem_id, long seed) {
  if (config.script_path.empty()) return HttpBackend::from_env();
  std::vector<ScriptedBackend::Entry> entries;
  for (const auto& e : script) {
    if (!e.problem_id.empty() && e.problem_id != problem_id) continue;
    if (e.seed && *e.seed != seed) continue;
    entries.push_back(e.entry);
  }
  return std::make_shared<ScriptedBackend>(std::move(entries));
}

SolveOutcome run_method_once(const SuiteConfig& config, const ProblemInstance& p,
                             ToolContext& ctx, const ToolRegistry& registry,
                             const ClassifierThresholds& thresholds,
                             const std::vector<std::string>& lexicon) {
  const std::string& m = config.method;
  if (m == "direct") return run_direct(p, ctx, config.knobs);
  if (m == "react") return run_react(p, ctx, config.knobs, config.knobs.react_max_steps);
  if (m == "self_refine") {
    return run_self_refine(p, ctx, config.knobs, config.knobs.self_refine_rounds);
  }
  if (m == "reflexion") {
    return run_reflexion(p, ctx, config.knobs, config.knobs.reflexion_episodes,
                         make_score_feedback_oracle(p));
  }
  if (m == "minimal_reflect") {
    return run_minimal_reflect(p, ctx, config.knobs, config.knobs.react_max_steps,
                               config.knobs.checklist_interval);
  }
  if (m == "full" || m == "core") {
    return dispatch(p, registry, ctx, thresholds, lexicon);
  }
  if (m == "heavyweight") {
    return heavy::run_heavyweight(p, ctx, heavy::ControllerConfig::from_config(config.harness));
  }
  throw std::invalid_argument("unknown method: " + m);
}

ResultRecord make_record(const SuiteConfig& config, const ProblemInstance& p, long seed,
                         const SolveOutcome& out, std::int64_t wall_ms) {
  ResultRecord r;
  r.run_id = config.run_id;
  r.seed = seed;
  r.model = config.model;
  r.method = config.method;
  r.domain = p.domain_label;
  r.problem_id = p.problem_id;
  r.shape = out.tool.empty() ? "" : shape_name(out.shape);
  r.tool = out.tool;
  r.final_answer = out.answer.value_or("");
  Score s;
  try {
    s = score_answer(out.answer, p.gold);
  } catch (const std::exception&) {
    s.value = 0.0;
  }
  r.score = s.value;
  if (p.gold.kind != GoldAnswer::Kind::none_structural) r.correct = s.value == 1.0;
  r.tokens_total = out.ledger.total_tokens();
  r.n_llm_calls = out.n_llm_calls;
  r.n_steps = out.n_steps;
  r.n_retries = out.n_retries;
  r.finish_reason = finish_reason_name(out.finish_reason);
  r.converged = out.finish_reason != FinishReason::budget_exhausted;
  r.wall_time_ms = wall_ms;
  return r;
}

}  // namespace

std::string trace_to_jsonl(const std::vector<TraceEvent>& trace) {
  std::string out;
  for (const auto& e : trace) {
    json j;
    j["step"] = e.step;
    j["tag"] = e.tag;
    j["text"] = e.text;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<ResultRecord> rescore_records(std::vector<ResultRecord> records,
                                          const std::vector<ProblemInstance>& problems) {
  std::map<std::string, const ProblemInstance*> by_id;
  for (const auto& p : problems) by_id[p.problem_id] = &p;
  for (auto& r : records) {
    auto it = by_id.find(r.problem_id);
    if (it == by_id.end()) continue;
    std::optional<std::string> ans;
    if (!r.final_answer.empty()) ans = r.final_answer;
    Score s;
    try {
      s = score_answer(ans, it->second->gold);
    } catch (const std::exception&) {
      s.value = 0.0;
    }
    r.score = s.value;
    if (it->second->gold.kind != GoldAnswer::Kind::none_structural) {
      r.correct = s.value == 1.0;
    } else {
      r.correct.reset();
    }
  }
  return records;
}

std::string run_suite(const SuiteConfig& config, const std::vector<ProblemInstance>& problems) {
  fs::create_directories(config.out_dir);
  const std::string csv_path = (fs::path(config.out_dir) / "results.csv").string();

  // resume: collect (seed, problem_id) cells already written
  std::set<std::pair<long, std::string>> done;
  bool have_file = fs::exists(csv_path);
  if (have_file) {
    for (const auto& r : load_result_csv(csv_path)) done.insert({r.seed, r.problem_id});
  }

  std::vector<const ProblemInstance*> selected;
  for (const auto& p : problems) {
    if (!config.domains.empty() &&
        std::find(config.domains.begin(), config.domains.end(), p.domain_label) ==
            config.domains.end()) {
      continue;
    }
    selected.push_back(&p);
  }

  std::vector<ScriptEntry> script;
  if (!config.script_path.empty()) script = load_suite_script(config.script_path);

  const ClassifierThresholds thresholds = ClassifierThresholds::from_config(config.harness);
  const std::vector<std::string> lexicon =
      config.verb_lexicon_path.empty() ? default_verb_lexicon()
                                       : load_verb_lexicon(config.verb_lexicon_path);
  const ToolRegistry registry = config.method == "core"
                                    ? ToolRegistry::make(RegistryLayer::NO_DOMAIN_TOOLS)
                                    : ToolRegistry::from_config(config.harness);
  const PromptLibrary prompts(config.prompt_dir);
  const HarnessOptions opts = HarnessOptions::from_config(config.harness);
  const bool scripted = !config.script_path.empty();

  struct Task {
    long seed;
    const ProblemInstance* problem;
  };
  std::vector<Task> tasks;
  for (long seed : config.seeds) {
    for (const auto* p : selected) tasks.push_back({seed, p});
  }

  auto run_task = [&](const Task& task) -> ResultRecord {
    auto started = std::chrono::steady_clock::now();
    SolveOutcome out;
    try {
      auto backend = backend_for_task(config, script, task.problem->problem_id, task.seed);
      ModelGateway gateway(backend);
      ToolContext ctx{gateway, prompts, opts};
      out = run_method_once(config, *task.problem, ctx, registry, thresholds, lexicon);
    } catch (const std::exception& e) {
      out = SolveOutcome{};
      out.finish_reason = FinishReason::error;
      out.trace.push_back({0, "action", std::string("suite error: ") + e.what()});
    }
    // scripted runs report zero wall time so resumed runs are byte-identical
    std::int64_t wall_ms =
        scripted ? 0
                 : std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    ResultRecord rec = make_record(config, *task.problem, task.seed, out, wall_ms);
    if (out.finish_reason == FinishReason::error) {
      rec.converged = false;
      rec.correct.reset();
      if (task.problem->gold.kind != GoldAnswer::Kind::none_structural) rec.correct = false;
    }
    // trace export alongside the CSV
    fs::path trace_dir = fs::path(config.out_dir) / "traces";
    fs::create_directories(trace_dir);
    std::ofstream tf(trace_dir / (config.method + "_" + task.problem->problem_id + "_s" +
                                  std::to_string(task.seed) + ".jsonl"));
    tf << trace_to_jsonl(out.trace);
    return rec;
  };

  std::ofstream csv(csv_path, std::ios::app);
  if (!csv) throw std::runtime_error("cannot open results CSV for append: " + csv_path);
  if (!have_file) csv << kResultCsvHeader << "\n";

  // ordered commit: workers compute ahead, rows land in task order
  const int workers = std::max(1, config.workers);
  std::vector<std::optional<ResultRecord>> results(tasks.size());
  std::vector<bool> skip(tasks.size(), false);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    skip[i] = done.count({tasks[i].seed, tasks[i].problem->problem_id}) > 0;
  }

  if (workers == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (skip[i]) continue;
      ResultRecord rec = run_task(tasks[i]);
      csv << result_record_to_csv_row(rec) << "\n";
      csv.flush();
    }
  } else {
    std::mutex mu;
    std::condition_variable cv;
    std::size_t next_to_claim = 0;
    std::size_t next_to_write = 0;
    auto worker = [&]() {
      while (true) {
        std::size_t idx;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next_to_claim >= tasks.size()) return;
          idx = next_to_claim++;
        }
        ResultRecord rec;
        bool skipped = skip[idx];
        if (!skipped) rec = run_task(tasks[idx]);
        {
          std::unique_lock<std::mutex> lock(mu);
          if (!skipped) results[idx] = std::move(rec);
          else results[idx] = std::nullopt;
          // writer role: flush any ready prefix in order
          while (next_to_write < tasks.size() &&
                 (skip[next_to_write] ? true : results[next_to_write].has_value())) {
            if (!skip[next_to_write] && results[next_to_write]) {
              csv << result_record_to_csv_row(*results[next_to_write]) << "\n";
              csv.flush();
            }
            ++next_to_write;
          }
          cv.notify_all();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    // any tail not yet flushed (all skipped)
    while (next_to_write < tasks.size()) {
      if (!skip[next_to_write] && results[next_to_write]) {
        csv << result_record_to_csv_row(*results[next_to_write]) << "\n";
      }
      ++next_to_write;
    }
  }
  return csv_path;
}

}  // namespace reflect
