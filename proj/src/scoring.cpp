#include "reflect/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>

#include "reflect/engines/diff.hpp"
#include "reflect/engines/pysyntax.hpp"
#include "reflect/engines/world.hpp"
#include "reflect/strings.hpp"

namespace reflect {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::optional<long long> parse_integer(const std::string& s) {
  std::string t = strings::trim(s);
  if (t.empty()) return std::nullopt;
  std::size_t i = 0;
  if (t[i] == '+' || t[i] == '-') ++i;
  if (i == t.size()) return std::nullopt;
  for (std::size_t j = i; j < t.size(); ++j) {
    if (std::isdigit(static_cast<unsigned char>(t[j])) == 0) return std::nullopt;
  }
  try {
    return std::stoll(t);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<std::string> f1_tokens(const std::string& s) {
  std::vector<std::string> toks;
  for (auto& t : strings::word_tokens(s)) {
    if (t == "a" || t == "an" || t == "the") continue;
    toks.push_back(std::move(t));
  }
  return toks;
}

double f1_against(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::map<std::string, int> gold_counts;
  for (const auto& t : gold) ++gold_counts[t];
  int overlap = 0;
  for (const auto& t : pred) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      ++overlap;
      --it->second;
    }
  }
  if (overlap == 0) return 0.0;
  double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
  double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

bool has_extension(const std::string& path, const std::string& ext) {
  return path.size() >= ext.size() &&
         path.compare(path.size() - ext.size(), ext.size(), ext) == 0;
}

}  // namespace

Score score_exact(const std::string& answer, const GoldAnswer& gold) {
  if (gold.kind != GoldAnswer::Kind::exact_string && gold.kind != GoldAnswer::Kind::integer) {
    throw ScorerError(std::string("score_exact applied to gold kind ") +
                      GoldAnswer::kind_name(gold.kind));
  }
  Score s;
  if (gold.kind == GoldAnswer::Kind::integer) {
    auto a = parse_integer(answer);
    for (const auto& g : gold.values) {
      auto gv = parse_integer(g);
      if (a && gv && *a == *gv) {
        s.value = 1.0;
        break;
      }
    }
    if (!a) s.detail["reason"] = "answer is not an integer";
  } else {
    std::string norm = strings::normalize_answer(answer);
    for (const auto& g : gold.values) {
      if (norm == strings::normalize_answer(g)) {
        s.value = 1.0;
        break;
      }
    }
  }
  return s;
}

Score score_numeric(const std::string& answer, const GoldAnswer& gold, double rel_tol) {
  if (gold.kind != GoldAnswer::Kind::numeric) {
    throw ScorerError(std::string("score_numeric applied to gold kind ") +
                      GoldAnswer::kind_name(gold.kind));
  }
  Score s;
  auto a = strings::parse_number_lenient(answer);
  if (!a) {
    s.detail["reason"] = "unparseable numeric answer";
    s.detail["within_1pct"] = "false";
    s.detail["within_5pct"] = "false";
    return s;
  }
  auto within = [&](double g, double tol) {
    double bound = g == 0.0 ? tol : tol * std::fabs(g);
    return std::fabs(*a - g) <= bound;
  };
  bool ok = false, ok1 = false, ok5 = false;
  for (const auto& gs : gold.values) {
    auto g = strings::parse_number_lenient(gs);
    if (!g) continue;
    ok = ok || within(*g, rel_tol);
    ok1 = ok1 || within(*g, 0.01);
    ok5 = ok5 || within(*g, 0.05);
  }
  s.value = ok ? 1.0 : 0.0;
  s.detail["within_1pct"] = ok1 ? "true" : "false";
  s.detail["within_5pct"] = ok5 ? "true" : "false";
  return s;
}

Score score_token_f1(const std::string& answer, const std::vector<std::string>& golds) {
  Score s;
  auto pred = f1_tokens(answer);
  double best = golds.empty() ? (pred.empty() ? 1.0 : 0.0) : 0.0;
  for (const auto& g : golds) {
    best = std::max(best, f1_against(pred, f1_tokens(g)));
  }
  s.value = best;
  s.detail["f1"] = fmt(best);
  return s;
}

Score score_action_sequence(const std::string& answer_plan, const std::string& gold_plan) {
  Score s;
  auto pred = engines::parse_plan(answer_plan);
  auto gold = engines::parse_plan(gold_plan);
  if (gold.empty()) {
    s.detail["reason"] = "empty gold plan";
    return s;
  }
  if (pred.empty()) {
    s.detail["reason"] = "unparseable answer plan";
    s.detail["recall"] = "0.0000";
    s.detail["order_correct"] = "false";
    return s;
  }
  // recall: fraction of gold actions present (multiset)
  std::vector<bool> used(pred.size(), false);
  std::size_t found = 0;
  for (const auto& g : gold) {
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (!used[i] && pred[i] == g) {
        used[i] = true;
        ++found;
        break;
      }
    }
  }
  double recall = static_cast<double>(found) / static_cast<double>(gold.size());
  // order: gold appears as a subsequence of the prediction
  std::size_t gi = 0;
  for (const auto& p : pred) {
    if (gi < gold.size() && p == gold[gi]) ++gi;
  }
  bool order_correct = gi == gold.size();
  s.detail["recall"] = fmt(recall);
  s.detail["order_correct"] = order_correct ? "true" : "false";
  s.value = (recall == 1.0 && order_correct) ? 1.0 : 0.0;
  return s;
}

const std::vector<std::string>& default_code_extensions() {
  static const std::vector<std::string> exts = {".py", ".js", ".ts", ".java", ".c",  ".cc",
                                               ".cpp", ".h",  ".hpp", ".go",  ".rs", ".rb"};
  return exts;
}

Score score_swe_tiered(const std::string& answer_diff_text) {
  return score_swe_tiered(answer_diff_text, default_code_extensions());
}

Score score_swe_tiered(const std::string& answer_diff_text,
                       const std::vector<std::string>& code_extensions) {
  Score s;
  engines::DiffDocument doc = engines::validate_diff(answer_diff_text);
  if (!doc.is_valid_unified) {
    s.value = 0.0;
    s.detail["tier"] = "not_diff_formatted";
    s.detail["error"] = doc.first_error;
    return s;
  }
  bool any_code = false;
  bool any_python = false;
  std::vector<std::string> python_added;
  for (const auto& f : doc.files) {
    const std::string path = f.target_path();
    bool code = std::any_of(code_extensions.begin(), code_extensions.end(),
                            [&](const std::string& e) { return has_extension(path, e); });
    any_code = any_code || code;
    if (has_extension(path, ".py")) {
      any_python = true;
      auto lines = f.added_lines();
      python_added.insert(python_added.end(), lines.begin(), lines.end());
    }
  }
  if (!any_code) {
    s.value = 0.3;
    s.detail["tier"] = "non_code_target";
    return s;
  }
  if (!any_python) {
    // no registered grammar checker for the touched languages
    s.value = 0.6;
    s.detail["tier"] = "code_target_unchecked_language";
    return s;
  }
  std::string block = engines::dedent_lines(python_added);
  auto err = engines::check_python_syntax(block);
  if (err) {
    s.value = 0.6;
    s.detail["tier"] = "added_lines_fail_syntax";
    s.detail["error"] = *err;
    return s;
  }
  s.value = 1.0;
  s.detail["tier"] = "added_lines_parse";
  return s;
}

Score score_answer(const std::optional<std::string>& answer, const GoldAnswer& gold) {
  const std::string text = answer.value_or("");
  switch (gold.kind) {
    case GoldAnswer::Kind::exact_string:
    case GoldAnswer::Kind::integer:
      return score_exact(text, gold);
    case GoldAnswer::Kind::numeric:
      return score_numeric(text, gold, gold.rel_tol);
    case GoldAnswer::Kind::token_set:
      return score_token_f1(text, gold.values);
    case GoldAnswer::Kind::action_sequence:
      return score_action_sequence(text, gold.values.empty() ? "" : gold.values[0]);
    case GoldAnswer::Kind::none_structural:
      return score_swe_tiered(text);
  }
  throw ScorerError("unhandled gold kind");
}

WilsonInterval wilson_ci(long successes, long n, double z) {
  if (n < 1 || successes < 0 || successes > n || z <= 0.0) {
    throw std::domain_error("wilson_ci: need 0 <= successes <= n, n >= 1, z > 0");
  }
  double nn = static_cast<double>(n);
  double p = static_cast<double>(successes) / nn;
  double z2 = z * z;
  double denom = 1.0 + z2 / nn;
  double center = (p + z2 / (2.0 * nn)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  WilsonInterval w;
  w.lo = std::max(0.0, center - half);
  w.hi = std::min(1.0, center + half);
  return w;
}

}  // namespace reflect
