#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace reflect {

/// One per-problem result row. correct is absent for structural-only
/// (patch-tier) rows, which are excluded from accuracy averages.
/// check_verdict / reflect_fired are optional extended columns consumed
/// by the verifier analytics; the suite runner never writes them.
struct ResultRecord {
  std::string run_id;
  long seed = 0;
  std::string model;
  std::string method;
  std::string domain;
  std::string problem_id;
  std::string shape;
  std::string tool;
  std::string final_answer;
  double score = 0.0;
  std::optional<bool> correct;
  std::int64_t tokens_total = 0;
  int n_llm_calls = 0;
  int n_steps = 0;
  int n_retries = 0;
  std::string finish_reason;
  bool converged = false;
  std::int64_t wall_time_ms = 0;
  std::optional<std::string> check_verdict;
  std::optional<bool> reflect_fired;
};

/// The pinned results-CSV header, in order.
extern const char* const kResultCsvHeader;

std::string result_record_to_csv_row(const ResultRecord& r);
std::vector<ResultRecord> load_result_csv(const std::string& path);
std::vector<ResultRecord> parse_result_csv(const std::string& text);

struct AnalyticsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelMethodKey {
  std::string model;
  std::string method;
  bool operator<(const ModelMethodKey& o) const {
    return std::tie(model, method) < std::tie(o.model, o.method);
  }
};

/// Mean of converged per (model, method). Empty input raises.
std::map<ModelMethodKey, double> convergence_rate(const std::vector<ResultRecord>& records);

/// Among records whose CHECK verdict is CORRECT, the fraction actually
/// wrong (score < 1.0). Records without a verdict are ignored; no
/// verdict-bearing records raises.
double verifier_fp_rate(const std::vector<ResultRecord>& records);

struct ReflectSuccess {
  long fires = 0;
  std::optional<double> success_rate;  // absent when fires == 0
};

/// Of the records where REFLECT fired, the fraction with a correct final
/// answer.
ReflectSuccess reflect_success_rate(const std::vector<ResultRecord>& records);

/// Fraction of problems wrong on all seeds whose normalized final answer
/// is identical across seeds, per (model, method). Requires >= 3 seeds
/// per problem. When denominator_any_seed_wrong is set, the denominator
/// widens to problems wrong on at least one seed (the alternative
/// reading; see README).
std::map<ModelMethodKey, double> stable_error_rate(const std::vector<ResultRecord>& records,
                                                   bool denominator_any_seed_wrong = false);

struct RescueBreak {
  double rescue_rate = 0.0;  // P(harness correct | direct wrong)
  double break_rate = 0.0;   // P(harness wrong | direct correct)
  double ratio = 0.0;        // rescue / break (inf when break == 0)
  long n_pairs = 0;
  long n_unpaired = 0;  // counted and reported, never silently dropped
};

/// Pairs records by (model, problem_id); both sides must carry a correct
/// flag to enter a conditional rate.
RescueBreak rescue_break(const std::vector<ResultRecord>& direct,
                         const std::vector<ResultRecord>& harness);

/// Histogram over how many models fail each problem (0..M). All models
/// must cover the same problem set.
std::map<int, long> universal_failure_histogram(const std::vector<ResultRecord>& records);

struct CostMetrics {
  double dollars_per_100_correct = 0.0;  // infinity when accuracy == 0
  double acc_per_1k_tokens = 0.0;
};

/// dollars_per_100_correct = (100 / accuracy_fraction) * tokens * rate;
/// acc_per_1k = accuracy_pct / (tokens / 1000).
CostMetrics cost_metrics(double tokens_per_problem, double accuracy_pct,
                         double rate_per_token);

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double pearson_r = 0.0;
  double p_value = 1.0;  // two-sided, t with n-2 df
  int n = 0;
};

/// OLS of lift on direct accuracy over (direct_acc, lift) points.
/// Requires n >= 3 and nondegenerate x variance.
FitResult fit_lift_slope(const std::vector<std::pair<double, double>>& points);

/// Regularized incomplete beta function I_x(a, b), used for the t-test
/// p-value; exposed for the statistics tests.
double regularized_incomplete_beta(double a, double b, double x);

// --- per-cell accuracy fixtures (slope regression inputs) ---------------

struct AccuracyCell {
  std::string model;
  std::string method;
  std::string domain;
  double accuracy_pct = 0.0;
};

std::vector<AccuracyCell> load_accuracy_cells(const std::string& csv_path);

/// Per-model (direct-mean, lift) points over the listed domains.
std::vector<std::pair<double, double>> compute_lift_points(
    const std::vector<AccuracyCell>& cells, const std::string& direct_method,
    const std::string& harness_method, const std::vector<std::string>& domains);

// --- trajectory structure metrics ---------------------------------------

struct TrajectoryMetrics {
  long thoughts = 0;
  long actions = 0;
  long reflections = 0;
  bool has_backtrack = false;
  bool has_contradiction = false;
  bool has_final_answer = false;
  long malformed_lines = 0;
};

/// Counts event tags in an exported trace JSONL (one {"step","tag","text"}
/// object per line). Malformed lines are skipped and counted.
TrajectoryMetrics trajectory_metrics(const std::string& trace_jsonl_text);

/// Plain-text report mirroring the convergence / cost / FP-rate tables,
/// computed from whatever columns the records carry.
std::string analytics_report(const std::vector<ResultRecord>& records,
                             double rate_per_token = 0.89e-6);

}  // namespace reflect
