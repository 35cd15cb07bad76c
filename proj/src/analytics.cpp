#include "reflect/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "reflect/strings.hpp"

namespace reflect {

using nlohmann::json;

const char* const kResultCsvHeader =
    "run_id,seed,model,method,domain,problem_id,shape,tool,final_answer,score,correct,"
    "tokens_total,n_llm_calls,n_steps,n_retries,finish_reason,converged,wall_time_ms";

namespace {

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

/// Splits CSV text into rows of fields, honoring quoted fields with
/// embedded commas, quotes, and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&]() {
    row.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_row = [&]() {
    end_field();
    if (row.size() > 1 || !row[0].empty()) rows.push_back(row);
    row.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      // swallow
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

}  // namespace

std::string result_record_to_csv_row(const ResultRecord& r) {
  std::string out;
  out += csv_escape(r.run_id) + ",";
  out += std::to_string(r.seed) + ",";
  out += csv_escape(r.model) + ",";
  out += csv_escape(r.method) + ",";
  out += csv_escape(r.domain) + ",";
  out += csv_escape(r.problem_id) + ",";
  out += csv_escape(r.shape) + ",";
  out += csv_escape(r.tool) + ",";
  out += csv_escape(r.final_answer) + ",";
  out += format_score(r.score) + ",";
  out += (r.correct ? (*r.correct ? "1" : "0") : "NA");
  out += ",";
  out += std::to_string(r.tokens_total) + ",";
  out += std::to_string(r.n_llm_calls) + ",";
  out += std::to_string(r.n_steps) + ",";
  out += std::to_string(r.n_retries) + ",";
  out += csv_escape(r.finish_reason) + ",";
  out += (r.converged ? "1" : "0");
  out += ",";
  out += std::to_string(r.wall_time_ms);
  return out;
}

std::vector<ResultRecord> parse_result_csv(const std::string& text) {
  auto rows = parse_csv(text);
  if (rows.empty()) return {};
  const auto& header = rows[0];
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[strings::trim(header[i])] = i;
  auto need = [&](const char* name) {
    auto it = col.find(name);
    if (it == col.end()) throw AnalyticsError(std::string("results CSV missing column ") + name);
    return it->second;
  };
  const std::size_t c_run = need("run_id"), c_seed = need("seed"), c_model = need("model"),
                    c_method = need("method"), c_domain = need("domain"),
                    c_pid = need("problem_id"), c_shape = need("shape"), c_tool = need("tool"),
                    c_ans = need("final_answer"), c_score = need("score"),
                    c_correct = need("correct"), c_tok = need("tokens_total"),
                    c_calls = need("n_llm_calls"), c_steps = need("n_steps"),
                    c_retries = need("n_retries"), c_finish = need("finish_reason"),
                    c_conv = need("converged"), c_wall = need("wall_time_ms");
  auto c_verdict = col.find("check_verdict");
  auto c_fired = col.find("reflect_fired");

  std::vector<ResultRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() < header.size()) {
      throw AnalyticsError("results CSV row " + std::to_string(i + 1) + " is short");
    }
    ResultRecord r;
    r.run_id = row[c_run];
    r.seed = std::stol(row[c_seed]);
    r.model = row[c_model];
    r.method = row[c_method];
    r.domain = row[c_domain];
    r.problem_id = row[c_pid];
    r.shape = row[c_shape];
    r.tool = row[c_tool];
    r.final_answer = row[c_ans];
    r.score = std::stod(row[c_score]);
    if (row[c_correct] == "1") r.correct = true;
    else if (row[c_correct] == "0") r.correct = false;
    r.tokens_total = std::stoll(row[c_tok]);
    r.n_llm_calls = std::stoi(row[c_calls]);
    r.n_steps = std::stoi(row[c_steps]);
    r.n_retries = std::stoi(row[c_retries]);
    r.finish_reason = row[c_finish];
    r.converged = row[c_conv] == "1" || row[c_conv] == "true";
    r.wall_time_ms = std::stoll(row[c_wall]);
    if (c_verdict != col.end() && c_verdict->second < row.size() &&
        !row[c_verdict->second].empty()) {
      r.check_verdict = row[c_verdict->second];
    }
    if (c_fired != col.end() && c_fired->second < row.size() &&
        !row[c_fired->second].empty()) {
      r.reflect_fired = row[c_fired->second] == "1" || row[c_fired->second] == "true";
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ResultRecord> load_result_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AnalyticsError("cannot open results CSV: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_result_csv(buf.str());
}

// ---------------------------------------------------------------------------
// Rates

std::map<ModelMethodKey, double> convergence_rate(const std::vector<ResultRecord>& records) {
  if (records.empty()) throw AnalyticsError("convergence_rate: empty record set");
  std::map<ModelMethodKey, std::pair<long, long>> acc;  // (converged, total)
  for (const auto& r : records) {
    auto& [conv, total] = acc[{r.model, r.method}];
    ++total;
    if (r.converged) ++conv;
  }
  std::map<ModelMethodKey, double> out;
  for (const auto& [key, val] : acc) {
    out[key] = static_cast<double>(val.first) / static_cast<double>(val.second);
  }
  return out;
}

double verifier_fp_rate(const std::vector<ResultRecord>& records) {
  long accepted = 0, accepted_wrong = 0;
  for (const auto& r : records) {
    if (!r.check_verdict) continue;
    if (*r.check_verdict != "CORRECT") continue;  // INCORRECT is not in the denominator
    ++accepted;
    if (r.score < 1.0) ++accepted_wrong;
  }
  if (accepted == 0) throw AnalyticsError("verifier_fp_rate: no CHECK=CORRECT records");
  return static_cast<double>(accepted_wrong) / static_cast<double>(accepted);
}

ReflectSuccess reflect_success_rate(const std::vector<ResultRecord>& records) {
  ReflectSuccess rs;
  long correct = 0;
  for (const auto& r : records) {
    if (!r.reflect_fired || !*r.reflect_fired) continue;
    ++rs.fires;
    if (r.correct && *r.correct) ++correct;
  }
  if (rs.fires > 0) {
    rs.success_rate = static_cast<double>(correct) / static_cast<double>(rs.fires);
  }
  return rs;
}

std::map<ModelMethodKey, double> stable_error_rate(const std::vector<ResultRecord>& records,
                                                   bool denominator_any_seed_wrong) {
  struct PerProblem {
    std::set<long> seeds;
    long wrong_seeds = 0;
    std::set<std::string> wrong_answers;
  };
  std::map<ModelMethodKey, std::map<std::string, PerProblem>> groups;
  for (const auto& r : records) {
    if (!r.correct) continue;  // structural rows carry no correctness
    auto& pp = groups[{r.model, r.method}][r.problem_id];
    pp.seeds.insert(r.seed);
    if (!*r.correct) {
      ++pp.wrong_seeds;
      pp.wrong_answers.insert(strings::normalize_answer(r.final_answer));
    }
  }
  std::map<ModelMethodKey, double> out;
  for (const auto& [key, problems] : groups) {
    long denom = 0, stable = 0;
    for (const auto& [pid, pp] : problems) {
      if (pp.seeds.size() < 3) {
        throw AnalyticsError("stable_error_rate: problem " + pid + " has fewer than 3 seeds");
      }
      bool wrong_all = pp.wrong_seeds == static_cast<long>(pp.seeds.size());
      bool wrong_any = pp.wrong_seeds > 0;
      bool in_denominator = denominator_any_seed_wrong ? wrong_any : wrong_all;
      if (in_denominator) ++denom;
      if (wrong_all && pp.wrong_answers.size() == 1) ++stable;
    }
    out[key] = denom == 0 ? 0.0 : static_cast<double>(stable) / static_cast<double>(denom);
  }
  return out;
}

RescueBreak rescue_break(const std::vector<ResultRecord>& direct,
                         const std::vector<ResultRecord>& harness) {
  std::map<std::pair<std::string, std::string>, const ResultRecord*> direct_by_key;
  for (const auto& r : direct) direct_by_key[{r.model, r.problem_id}] = &r;

  RescueBreak rb;
  long direct_wrong = 0, rescued = 0, direct_right = 0, broken = 0;
  std::set<std::pair<std::string, std::string>> matched;
  for (const auto& h : harness) {
    auto it = direct_by_key.find({h.model, h.problem_id});
    if (it == direct_by_key.end() || !it->second->correct || !h.correct) {
      ++rb.n_unpaired;
      continue;
    }
    matched.insert(it->first);
    ++rb.n_pairs;
    bool d_ok = *it->second->correct;
    bool h_ok = *h.correct;
    if (!d_ok) {
      ++direct_wrong;
      if (h_ok) ++rescued;
    } else {
      ++direct_right;
      if (!h_ok) ++broken;
    }
  }
  rb.n_unpaired += static_cast<long>(direct_by_key.size() - matched.size());
  if (rb.n_pairs == 0) throw AnalyticsError("rescue_break: no paired records");
  rb.rescue_rate = direct_wrong == 0
                       ? 0.0
                       : static_cast<double>(rescued) / static_cast<double>(direct_wrong);
  rb.break_rate = direct_right == 0
                      ? 0.0
                      : static_cast<double>(broken) / static_cast<double>(direct_right);
  rb.ratio = rb.break_rate == 0.0 ? std::numeric_limits<double>::infinity()
                                  : rb.rescue_rate / rb.break_rate;
  return rb;
}

std::map<int, long> universal_failure_histogram(const std::vector<ResultRecord>& records) {
  std::set<std::string> models;
  std::map<std::string, std::set<std::string>> failing_models;  // problem -> models wrong
  std::map<std::string, std::set<std::string>> seen_models;     // problem -> models present
  for (const auto& r : records) {
    if (!r.correct) continue;
    models.insert(r.model);
    seen_models[r.problem_id].insert(r.model);
    if (!*r.correct) failing_models[r.problem_id].insert(r.model);
  }
  if (models.empty()) throw AnalyticsError("universal_failure_histogram: no scored records");
  for (const auto& [pid, present] : seen_models) {
    if (present.size() != models.size()) {
      throw AnalyticsError("universal_failure_histogram: problem " + pid +
                           " not covered by all models");
    }
  }
  std::map<int, long> hist;
  for (int i = 0; i <= static_cast<int>(models.size()); ++i) hist[i] = 0;
  for (const auto& [pid, present] : seen_models) {
    auto it = failing_models.find(pid);
    int failing = it == failing_models.end() ? 0 : static_cast<int>(it->second.size());
    ++hist[failing];
  }
  return hist;
}

CostMetrics cost_metrics(double tokens_per_problem, double accuracy_pct,
                         double rate_per_token) {
  CostMetrics cm;
  cm.acc_per_1k_tokens = tokens_per_problem <= 0.0
                             ? 0.0
                             : accuracy_pct / (tokens_per_problem / 1000.0);
  if (accuracy_pct <= 0.0) {
    cm.dollars_per_100_correct = std::numeric_limits<double>::infinity();
  } else {
    double accuracy_fraction = accuracy_pct / 100.0;
    cm.dollars_per_100_correct =
        (100.0 / accuracy_fraction) * tokens_per_problem * rate_per_token;
  }
  return cm;
}

// ---------------------------------------------------------------------------
// OLS + t distribution

namespace {

double beta_continued_fraction(double a, double b, double x) {
  const int max_iterations = 300;
  const double eps = 3e-14;
  const double fpmin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iterations; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                 b * std::log(1.0 - x);
  double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - bt * beta_continued_fraction(b, a, 1.0 - x) / b;
}

FitResult fit_lift_slope(const std::vector<std::pair<double, double>>& points) {
  const int n = static_cast<int>(points.size());
  if (n < 3) throw AnalyticsError("fit_lift_slope: need at least 3 points");
  double sx = 0, sy = 0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
  }
  double mx = sx / n, my = sy / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) throw AnalyticsError("fit_lift_slope: degenerate x variance");

  FitResult f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.pearson_r = syy == 0.0 ? 0.0 : sxy / std::sqrt(sxx * syy);
  double r2 = f.pearson_r * f.pearson_r;
  if (r2 >= 1.0) {
    f.p_value = std::numeric_limits<double>::min();  // collinear: p underflows
  } else {
    double df = n - 2;
    double t2 = r2 * df / (1.0 - r2);
    f.p_value = regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t2));
    f.p_value = std::max(f.p_value, std::numeric_limits<double>::min());
  }
  return f;
}

// ---------------------------------------------------------------------------
// Accuracy-cell fixtures

std::vector<AccuracyCell> load_accuracy_cells(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw AnalyticsError("cannot open accuracy fixture: " + csv_path);
  std::stringstream buf;
  buf << in.rdbuf();
  auto rows = parse_csv(buf.str());
  if (rows.empty()) throw AnalyticsError("empty accuracy fixture");
  std::vector<AccuracyCell> cells;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() < 4) continue;
    AccuracyCell c;
    c.model = rows[i][0];
    c.method = rows[i][1];
    c.domain = rows[i][2];
    c.accuracy_pct = std::stod(rows[i][3]);
    cells.push_back(std::move(c));
  }
  return cells;
}

std::vector<std::pair<double, double>> compute_lift_points(
    const std::vector<AccuracyCell>& cells, const std::string& direct_method,
    const std::string& harness_method, const std::vector<std::string>& domains) {
  std::set<std::string> domain_set(domains.begin(), domains.end());
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per_model;
  for (const auto& c : cells) {
    if (!domain_set.empty() && domain_set.count(c.domain) == 0) continue;
    if (c.method == direct_method) per_model[c.model].first.push_back(c.accuracy_pct);
    else if (c.method == harness_method) per_model[c.model].second.push_back(c.accuracy_pct);
  }
  std::vector<std::pair<double, double>> points;
  for (const auto& [model, vals] : per_model) {
    const auto& [direct, harness] = vals;
    if (direct.empty() || direct.size() != harness.size()) {
      throw AnalyticsError("compute_lift_points: model " + model +
                           " is missing cells for one method");
    }
    auto mean = [](const std::vector<double>& v) {
      double s = 0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    double d = mean(direct);
    points.emplace_back(d, mean(harness) - d);
  }
  return points;
}

// ---------------------------------------------------------------------------
// Trajectory metrics

TrajectoryMetrics trajectory_metrics(const std::string& trace_jsonl_text) {
  TrajectoryMetrics m;
  std::istringstream in(trace_jsonl_text);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = strings::trim(line);
    if (t.empty()) continue;
    json j = json::parse(t, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("tag")) {
      ++m.malformed_lines;
      continue;
    }
    std::string tag = j.value("tag", "");
    if (tag == "thought") ++m.thoughts;
    else if (tag == "action") ++m.actions;
    else if (tag == "reflection") ++m.reflections;
    else if (tag == "backtrack") m.has_backtrack = true;
    else if (tag == "contradiction") m.has_contradiction = true;
    else if (tag == "final_answer") m.has_final_answer = true;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Text report

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v * 100.0);
  return buf;
}

std::string money(double v) {
  if (std::isinf(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string analytics_report(const std::vector<ResultRecord>& records,
                             double rate_per_token) {
  std::string out;
  if (records.empty()) return "no records\n";

  out += "== Convergence (per model, method) ==\n";
  for (const auto& [key, rate] : convergence_rate(records)) {
    long total = 0, exhausted = 0;
    for (const auto& r : records) {
      if (r.model == key.model && r.method == key.method) {
        ++total;
        if (!r.converged) ++exhausted;
      }
    }
    out += "  " + key.model + " / " + key.method + ": " + pct(rate) + "% (" +
           std::to_string(exhausted) + " of " + std::to_string(total) + " exhausted)\n";
  }

  out += "\n== Tokens and cost (per model, method) ==\n";
  std::map<ModelMethodKey, std::vector<const ResultRecord*>> groups;
  for (const auto& r : records) groups[{r.model, r.method}].push_back(&r);
  for (const auto& [key, group] : groups) {
    double tokens = 0;
    long scored = 0, correct = 0;
    for (const auto* r : group) {
      tokens += static_cast<double>(r->tokens_total);
      if (r->correct) {
        ++scored;
        if (*r->correct) ++correct;
      }
    }
    double mean_tokens = tokens / static_cast<double>(group.size());
    double acc_pct = scored == 0 ? 0.0 : 100.0 * correct / static_cast<double>(scored);
    CostMetrics cm = cost_metrics(mean_tokens, acc_pct, rate_per_token);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "  %s / %s: %.0f tok/problem, acc %.1f%%, acc/1K %.1f, $/100 correct %s\n",
                  key.model.c_str(), key.method.c_str(), mean_tokens, acc_pct,
                  cm.acc_per_1k_tokens, money(cm.dollars_per_100_correct).c_str());
    out += buf;
  }

  bool any_verdict = std::any_of(records.begin(), records.end(),
                                 [](const ResultRecord& r) { return r.check_verdict.has_value(); });
  if (any_verdict) {
    out += "\n== Verifier false-positive rate ==\n";
    out += "  FP rate (CHECK=CORRECT but score<1): " + pct(verifier_fp_rate(records)) + "%\n";
  }
  bool any_fired = std::any_of(records.begin(), records.end(),
                               [](const ResultRecord& r) { return r.reflect_fired.has_value(); });
  if (any_fired) {
    auto rs = reflect_success_rate(records);
    out += "\n== REFLECT success ==\n";
    out += "  fires: " + std::to_string(rs.fires);
    if (rs.success_rate) out += ", success: " + pct(*rs.success_rate) + "%";
    out += "\n";
  }
  return out;
}

}  // namespace reflect
