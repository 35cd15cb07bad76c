#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflect/problem.hpp"

namespace reflect {

/// A correctness score in [0,1] with a scorer-specific breakdown.
/// Exact scorers emit only {0,1}; the tiered patch scorer emits only
/// {0.0, 0.3, 0.6, 1.0}.
struct Score {
  double value = 0.0;
  std::map<std::string, std::string> detail;
};

struct ScorerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Normalized equality (trim, case-fold); integer golds compare
/// numerically. Legal for kinds exact_string and integer only.
Score score_exact(const std::string& answer, const GoldAnswer& gold);

/// Relative-tolerance numeric match after stripping currency, commas,
/// and percent signs. gold == 0 falls back to an absolute tolerance.
/// detail carries both the 1% and 5% band flags.
Score score_numeric(const std::string& answer, const GoldAnswer& gold, double rel_tol);

/// Max token-level F1 over the acceptable gold strings, after
/// case-folding, punctuation stripping, and article removal (a/an/the).
/// Both sides empty -> 1.0.
Score score_token_f1(const std::string& answer, const std::vector<std::string>& golds);

/// All-or-nothing action-sequence match: value 1.0 iff every gold action
/// is present (recall 1.0) and the gold appears as an in-order
/// subsequence. detail carries "recall" and "order_correct".
Score score_action_sequence(const std::string& answer_plan, const std::string& gold_plan);

/// Structural patch-quality ladder (no gold needed):
///   0.0  not diff-formatted
///   0.3  valid unified diff targeting only non-code files
///   0.6  targets code files but added Python lines fail the syntax check
///   1.0  targets code files and added Python lines pass
/// Non-Python code files cap at 0.6 unless a checker is registered for
/// their extension.
Score score_swe_tiered(const std::string& answer_diff_text);
Score score_swe_tiered(const std::string& answer_diff_text,
                       const std::vector<std::string>& code_extensions);

const std::vector<std::string>& default_code_extensions();

/// Dispatches on gold.kind; none_structural uses the tiered scorer.
Score score_answer(const std::optional<std::string>& answer, const GoldAnswer& gold);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion; z defaults to 1.96.
/// Requires 0 <= successes <= n, n >= 1, z > 0.
WilsonInterval wilson_ci(long successes, long n, double z = 1.96);

}  // namespace reflect
