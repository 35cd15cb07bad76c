// reflect: shape-routed LLM reasoning harness CLI.
//
//   reflect run      --problems p.jsonl --method full --out results/
//   reflect score    --problems p.jsonl --csv results/results.csv
//   reflect analyze  --csv results/results.csv [--fit-table cells.csv]
//   reflect classify --problems p.jsonl
//   reflect trace    --file results/traces/<run>.jsonl

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "reflect/analytics.hpp"
#include "reflect/config.hpp"
#include "reflect/runner.hpp"
#include "reflect/strings.hpp"

namespace fs = std::filesystem;
using namespace reflect;

namespace {

std::string default_data_dir() {
  if (const char* env = std::getenv("REFLECT_DATA_DIR"); env && *env) return env;
#ifdef REFLECT_BUNDLED_DATA_DIR
  return REFLECT_BUNDLED_DATA_DIR;
#else
  return "data";
#endif
}

std::vector<long> parse_seeds(const std::string& csv) {
  std::vector<long> seeds;
  for (const auto& part : strings::split(csv, ',')) {
    std::string t = strings::trim(part);
    if (!t.empty()) seeds.push_back(std::stol(t));
  }
  if (seeds.empty()) seeds.push_back(0);
  return seeds;
}

int cmd_run(const std::string& problems_path, const std::string& config_path,
            const std::string& method, const std::string& seeds_csv,
            const std::string& layer, int workers, const std::string& out_dir,
            const std::string& script_path, const std::string& data_dir,
            const std::string& run_id, const std::string& model,
            const std::string& domains_csv) {
  SuiteConfig cfg;
  if (!config_path.empty()) cfg.harness = Config::from_file(config_path);
  if (!layer.empty()) cfg.harness.set("layer", layer);
  cfg.run_id = run_id;
  cfg.method = method == "reflect" ? "full" : method;
  if (cfg.method == "full" && layer == "core") cfg.method = "core";
  cfg.model = model;
  cfg.seeds = parse_seeds(seeds_csv);
  cfg.workers = workers;
  cfg.out_dir = out_dir;
  cfg.script_path = script_path;
  cfg.knobs = MethodKnobs::from_config(cfg.harness);
  for (const auto& d : strings::split(domains_csv, ',')) {
    std::string t = strings::trim(d);
    if (!t.empty()) cfg.domains.push_back(t);
  }
  std::string dd = data_dir.empty() ? default_data_dir() : data_dir;
  cfg.prompt_dir = (fs::path(dd) / "prompts").string();
  std::string lexicon = (fs::path(dd) / "verbs.txt").string();
  if (fs::exists(lexicon)) cfg.verb_lexicon_path = lexicon;

  auto problems = load_problems_jsonl(problems_path);
  std::string csv = run_suite(cfg, problems);
  std::cout << "wrote " << csv << "\n";
  return 0;
}

int cmd_score(const std::string& problems_path, const std::string& csv_path,
              const std::string& out_path) {
  auto problems = load_problems_jsonl(problems_path);
  auto records = rescore_records(load_result_csv(csv_path), problems);
  std::string target = out_path.empty() ? csv_path : out_path;
  std::ofstream out(target);
  out << kResultCsvHeader << "\n";
  for (const auto& r : records) out << result_record_to_csv_row(r) << "\n";
  std::cout << "rescored " << records.size() << " rows -> " << target << "\n";
  return 0;
}

int cmd_analyze(const std::string& csv_path, const std::string& fit_table,
                const std::string& out_dir, double rate) {
  if (!csv_path.empty()) {
    auto records = load_result_csv(csv_path);
    std::string report = analytics_report(records, rate);
    std::cout << report;
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      std::ofstream f(fs::path(out_dir) / "summary.txt");
      f << report;
    }
  }
  if (!fit_table.empty()) {
    auto cells = load_accuracy_cells(fit_table);
    std::set<std::string> domain_set;
    for (const auto& c : cells) domain_set.insert(c.domain);
    std::vector<std::string> all_domains(domain_set.begin(), domain_set.end());
    auto points6 = compute_lift_points(cells, "direct", "full_reflect", all_domains);
    FitResult f6 = fit_lift_slope(points6);
    std::printf("lift-vs-direct fit (all %zu domains): slope %.2f  r %.2f  p %.3f  n %d\n",
                all_domains.size(), f6.slope, f6.pearson_r, f6.p_value, f6.n);
    std::vector<std::string> llm_domains;
    for (const auto& d : all_domains) {
      if (d != "alfred" && d != "swe_bench") llm_domains.push_back(d);
    }
    if (llm_domains.size() >= 2 && llm_domains.size() < all_domains.size()) {
      auto points4 = compute_lift_points(cells, "direct", "full_reflect", llm_domains);
      FitResult f4 = fit_lift_slope(points4);
      std::printf(
          "lift-vs-direct refit (%zu LLM-driven domains): slope %.2f  r %.2f  p %.3f\n",
          llm_domains.size(), f4.slope, f4.pearson_r, f4.p_value);
    }
  }
  return 0;
}

int cmd_classify(const std::string& problems_path, const std::string& config_path,
                 const std::string& data_dir) {
  Config cfg;
  if (!config_path.empty()) cfg = Config::from_file(config_path);
  auto thresholds = ClassifierThresholds::from_config(cfg);
  std::string dd = data_dir.empty() ? default_data_dir() : data_dir;
  std::string lexicon_path = (fs::path(dd) / "verbs.txt").string();
  auto lexicon = fs::exists(lexicon_path) ? load_verb_lexicon(lexicon_path)
                                          : default_verb_lexicon();
  for (const auto& p : load_problems_jsonl(problems_path)) {
    std::cout << p.problem_id << "\t" << shape_name(classify(p, thresholds, lexicon)) << "\n";
  }
  return 0;
}

int cmd_trace(const std::string& trace_path) {
  std::ifstream in(trace_path);
  if (!in) {
    std::cerr << "cannot open " << trace_path << "\n";
    return 1;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  auto metrics = trajectory_metrics(buf.str());
  std::istringstream lines(buf.str());
  std::string line;
  while (std::getline(lines, line)) {
    std::string t = strings::trim(line);
    if (t.empty()) continue;
    auto j = nlohmann::json::parse(t, nullptr, false);
    if (j.is_discarded()) {
      std::cout << "  (malformed) " << t << "\n";
      continue;
    }
    std::printf("[%3d] %-14s %s\n", j.value("step", 0), j.value("tag", "?").c_str(),
                j.value("text", "").substr(0, 100).c_str());
  }
  std::printf(
      "\nthoughts %ld  actions %ld  reflections %ld  backtrack %s  "
      "contradiction %s  final answer %s\n",
      metrics.thoughts, metrics.actions, metrics.reflections,
      metrics.has_backtrack ? "yes" : "no", metrics.has_contradiction ? "yes" : "no",
      metrics.has_final_answer ? "yes" : "no");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shape-routed LLM reasoning harness"};
  app.require_subcommand(1);

  std::string problems, config_path, method = "full", seeds = "0", layer, out_dir = "results";
  std::string script_path, data_dir, run_id = "run", model = "scripted", domains;
  int workers = 1;
  auto* run = app.add_subcommand("run", "run a method over a problem set");
  run->add_option("--problems", problems, "problems JSONL")->required();
  run->add_option("--config", config_path, "harness config (TOML-style)");
  run->add_option("--method", method,
                  "direct|react|self_refine|reflexion|minimal_reflect|full|core|heavyweight");
  run->add_option("--seeds", seeds, "comma-separated seed list");
  run->add_option("--layer", layer, "full|core registry layer");
  run->add_option("--workers", workers, "worker pool size");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--script", script_path, "scripted backend JSONL");
  run->add_option("--data-dir", data_dir, "prompt/lexicon directory");
  run->add_option("--run-id", run_id, "run identifier column");
  run->add_option("--model", model, "model name column");
  run->add_option("--domains", domains, "comma-separated domain filter");

  std::string score_csv, score_out;
  auto* score = app.add_subcommand("score", "re-score a results CSV");
  score->add_option("--problems", problems, "problems JSONL")->required();
  score->add_option("--csv", score_csv, "results CSV")->required();
  score->add_option("--out", score_out, "output CSV (default: in place)");

  std::string analyze_csv, fit_table, analyze_out;
  double rate = 0.89e-6;
  auto* analyze = app.add_subcommand("analyze", "aggregate statistics and reports");
  analyze->add_option("--csv", analyze_csv, "results CSV");
  analyze->add_option("--fit-table", fit_table, "per-cell accuracy CSV for the slope fit");
  analyze->add_option("--out", analyze_out, "report directory");
  analyze->add_option("--rate", rate, "blended $ per token (default 0.89e-6)");

  auto* classify_cmd = app.add_subcommand("classify", "print the shape for each problem");
  classify_cmd->add_option("--problems", problems, "problems JSONL")->required();
  classify_cmd->add_option("--config", config_path, "harness config");
  classify_cmd->add_option("--data-dir", data_dir, "lexicon directory");

  std::string trace_path;
  auto* trace = app.add_subcommand("trace", "pretty-print a trace JSONL");
  trace->add_option("--file", trace_path, "trace JSONL")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(problems, config_path, method, seeds, layer, workers, out_dir,
                     script_path, data_dir, run_id, model, domains);
    }
    if (score->parsed()) return cmd_score(problems, score_csv, score_out);
    if (analyze->parsed()) return cmd_analyze(analyze_csv, fit_table, analyze_out, rate);
    if (classify_cmd->parsed()) return cmd_classify(problems, config_path, data_dir);
    if (trace->parsed()) return cmd_trace(trace_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
