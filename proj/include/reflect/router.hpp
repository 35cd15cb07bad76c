#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "reflect/config.hpp"
#include "reflect/problem.hpp"

namespace reflect {

/// The seven computational shapes. FALLBACK is the total catch-all.
enum class Shape {
  SYMBOLIC,
  TABULAR,
  LOGICAL,
  EVIDENCE,
  PROCEDURAL,
  ARTIFACT,
  FALLBACK,
};

const char* shape_name(Shape s);
constexpr int kShapeCount = 7;

/// Problem-intrinsic features. Every field is a pure function of
/// (instruction, context); the domain label is never read.
struct FeatureVector {
  bool has_diff_scaffold = false;
  bool requests_patch = false;
  std::size_t action_verb_count = 0;
  bool has_rule_sentences = false;
  bool has_tfu_query = false;
  std::size_t table_score = 0;  // count of aligned numeric columns
  std::size_t doc_token_count = 0;
  double math_density = 0.0;
  bool requests_integer_answer = false;

  bool operator==(const FeatureVector&) const = default;
};

/// Thresholds for the classification rules. All overridable via the
/// [router] config section; the shipped values are harness defaults, not
/// benchmark-fitted constants.
struct ClassifierThresholds {
  std::size_t action_verb_min = 3;
  std::size_t table_columns_min = 2;
  std::size_t doc_tokens_min = 1500;
  double math_density_min = 0.05;

  static ClassifierThresholds from_config(const Config& cfg);
};

/// Loads the action-verb lexicon (one entry per line, '#' comments).
std::vector<std::string> load_verb_lexicon(const std::string& path);
const std::vector<std::string>& default_verb_lexicon();

FeatureVector extract_features(const ProblemInstance& p,
                               const std::vector<std::string>& verb_lexicon);

/// Deterministic first-match classification over the ordered rule list
/// ARTIFACT, PROCEDURAL, LOGICAL, TABULAR, EVIDENCE, SYMBOLIC, FALLBACK.
/// Total: always returns a shape, never reads domain_label or gold.
Shape classify(const ProblemInstance& p, const ClassifierThresholds& thresholds,
               const std::vector<std::string>& verb_lexicon);
Shape classify(const FeatureVector& f, const ClassifierThresholds& thresholds);

/// Registry layer: FULL carries all seven tools; NO_DOMAIN_TOOLS routes
/// the two task-specific shapes (PROCEDURAL, ARTIFACT) to the fallback
/// tool instead.
enum class RegistryLayer { NO_DOMAIN_TOOLS, FULL };

/// Configuration-time map from shape to tool identifier. Immutable
/// during a run.
class ToolRegistry {
 public:
  static ToolRegistry make(RegistryLayer layer);
  static ToolRegistry from_config(const Config& cfg);

  const std::string& tool_for(Shape s) const;
  RegistryLayer layer() const { return layer_; }

  /// Re-registers one shape; configuration-time only.
  void set_tool(Shape s, std::string tool_name);

 private:
  RegistryLayer layer_ = RegistryLayer::FULL;
  std::map<Shape, std::string> tools_;
};

}  // namespace reflect
