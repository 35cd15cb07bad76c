#pragma once

#include <optional>
#include <string>
#include <vector>

namespace reflect {

/// What counts as a correct answer for one problem, and which scorer
/// applies. Mismatched scorer application is an error, not a zero.
struct GoldAnswer {
  enum class Kind {
    exact_string,
    integer,
    numeric,
    token_set,
    action_sequence,
    none_structural,
  };

  Kind kind = Kind::exact_string;
  std::vector<std::string> values;  // one or more acceptable answers
  double rel_tol = 0.01;            // numeric kind only

  static const char* kind_name(Kind k);
  static std::optional<Kind> kind_from_name(const std::string& name);
};

struct ContextDocument {
  std::string name;
  std::string text;
};

/// One benchmark item. The domain label is carried for bookkeeping only;
/// classification never reads it.
struct ProblemInstance {
  std::string problem_id;
  std::string domain_label;
  std::string instruction;
  std::vector<ContextDocument> context;
  GoldAnswer gold;
  std::optional<std::string> table_blocks;  // pre-parsed table text, when provided

  std::string joined_context() const;
};

/// Reads one ProblemInstance per JSONL line:
/// {problem_id, domain, instruction, context:[{name,text}], gold:{kind,values,rel_tol?},
///  table_blocks?}. Malformed lines raise.
std::vector<ProblemInstance> load_problems_jsonl(const std::string& path);
std::vector<ProblemInstance> parse_problems_jsonl(const std::string& text);

}  // namespace reflect
