#include "reflect/router.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include "reflect/strings.hpp"

namespace reflect {

const char* shape_name(Shape s) {
  switch (s) {
    case Shape::SYMBOLIC: return "SYMBOLIC";
    case Shape::TABULAR: return "TABULAR";
    case Shape::LOGICAL: return "LOGICAL";
    case Shape::EVIDENCE: return "EVIDENCE";
    case Shape::PROCEDURAL: return "PROCEDURAL";
    case Shape::ARTIFACT: return "ARTIFACT";
    case Shape::FALLBACK: return "FALLBACK";
  }
  return "FALLBACK";
}

ClassifierThresholds ClassifierThresholds::from_config(const Config& cfg) {
  ClassifierThresholds t;
  t.action_verb_min =
      static_cast<std::size_t>(cfg.get_int("router.action_verb_threshold", 3));
  t.table_columns_min =
      static_cast<std::size_t>(cfg.get_int("router.table_column_threshold", 2));
  t.doc_tokens_min = static_cast<std::size_t>(cfg.get_int("router.doc_token_threshold", 1500));
  t.math_density_min = cfg.get_double("router.math_density_threshold", 0.05);
  return t;
}

std::vector<std::string> load_verb_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open verb lexicon: " + path);
  std::vector<std::string> verbs;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = strings::trim(line);
    if (t.empty() || t.front() == '#') continue;
    verbs.push_back(strings::to_lower(t));
  }
  return verbs;
}

const std::vector<std::string>& default_verb_lexicon() {
  static const std::vector<std::string> verbs = {
      "goto",  "go to", "pick up", "pickup", "put",   "place", "open",
      "close", "toggle", "slice",  "clean",  "heat",  "cool",  "grab",
      "take",  "carry",  "walk to", "turn on", "turn off", "microwave",
      "rinse", "wash",
  };
  return verbs;
}

namespace {

bool detect_diff_scaffold(const std::string& text) {
  return text.find("diff --git") != std::string::npos ||
         text.find("\n--- ") != std::string::npos ||
         strings::starts_with(text, "--- ") ||
         text.find("\n@@ -") != std::string::npos ||
         strings::contains_ci(text, "unified diff");
}

bool detect_patch_request(const std::string& instruction) {
  return strings::contains_ci(instruction, "unified diff") ||
         strings::contains_ci(instruction, "emit a diff") ||
         strings::contains_ci(instruction, "output a diff") ||
         strings::contains_ci(instruction, "as a diff") ||
         strings::contains_ci(instruction, "patch");
}

bool detect_rule_sentences(const std::string& text) {
  std::string lower = strings::to_lower(text);
  std::size_t pos = 0;
  while ((pos = lower.find("if ", pos)) != std::string::npos) {
    bool at_boundary = pos == 0 || !std::isalnum(static_cast<unsigned char>(lower[pos - 1]));
    if (at_boundary) {
      std::size_t sentence_end = lower.find('.', pos);
      std::size_t then_pos = lower.find(" then ", pos);
      if (then_pos != std::string::npos &&
          (sentence_end == std::string::npos || then_pos < sentence_end)) {
        return true;
      }
    }
    pos += 3;
  }
  return false;
}

bool detect_tfu_query(const std::string& instruction) {
  std::string lower = strings::to_lower(instruction);
  return lower.find("true") != std::string::npos &&
         lower.find("false") != std::string::npos &&
         lower.find("unknown") != std::string::npos;
}

bool cell_is_numeric(const std::string& cell) {
  if (cell.empty()) return false;
  return strings::parse_number_lenient(cell).has_value();
}

std::vector<std::string> split_table_row(const std::string& line) {
  std::vector<std::string> cells;
  if (line.find('|') != std::string::npos) {
    for (auto& c : strings::split(line, '|')) {
      std::string t = strings::trim(c);
      if (!t.empty()) cells.push_back(t);
    }
    return cells;
  }
  if (line.find('\t') != std::string::npos) {
    for (auto& c : strings::split(line, '\t')) {
      std::string t = strings::trim(c);
      if (!t.empty()) cells.push_back(t);
    }
    return cells;
  }
  // two-or-more-space separation
  std::string cur;
  int spaces = 0;
  for (char ch : line) {
    if (ch == ' ') {
      ++spaces;
      if (spaces >= 2 && !cur.empty()) {
        cells.push_back(strings::trim(cur));
        cur.clear();
      } else if (spaces < 2) {
        cur.push_back(ch);
      }
    } else {
      spaces = 0;
      cur.push_back(ch);
    }
  }
  std::string t = strings::trim(cur);
  if (!t.empty()) cells.push_back(t);
  return cells;
}

/// Scores the largest block of consecutive same-width rows: the number
/// of columns whose non-header cells are all numeric.
std::size_t compute_table_score(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::size_t best = 0;
  auto flush = [&]() {
    if (rows.size() >= 2) {
      std::size_t width = rows[0].size();
      std::size_t numeric_cols = 0;
      for (std::size_t c = 0; c < width; ++c) {
        std::size_t numeric_rows = 0;
        for (std::size_t r = 1; r < rows.size(); ++r) {  // row 0 may be a header
          if (cell_is_numeric(rows[r][c])) ++numeric_rows;
        }
        if (numeric_rows == rows.size() - 1) ++numeric_cols;
      }
      best = std::max(best, numeric_cols);
    }
    rows.clear();
  };
  for (const auto& line : strings::split(text, '\n')) {
    // markdown separator rows (|---|---|) do not break a block
    std::string t = strings::trim(line);
    bool is_separator = !t.empty() && t.find_first_not_of("|-: \t") == std::string::npos &&
                        t.find('-') != std::string::npos;
    if (is_separator) continue;
    auto cells = split_table_row(line);
    if (cells.size() >= 2) {
      if (!rows.empty() && rows.back().size() != cells.size()) flush();
      rows.push_back(std::move(cells));
    } else {
      flush();
    }
  }
  flush();
  return best;
}

bool token_is_mathy(const std::string& tok) {
  bool has_digit = false;
  for (char c : tok) {
    if (std::isdigit(static_cast<unsigned char>(c))) has_digit = true;
  }
  if (has_digit) return true;
  static const std::string ops = "+-*/=^<>%";
  if (tok.size() <= 2 && tok.find_first_of(ops) != std::string::npos) return true;
  return false;
}

bool detect_integer_request(const std::string& instruction) {
  std::string lower = strings::to_lower(instruction);
  return lower.find("integer") != std::string::npos ||
         lower.find("0 to 999") != std::string::npos ||
         lower.find("between 0 and 999") != std::string::npos ||
         lower.find("remainder when") != std::string::npos ||
         lower.find("mod 1000") != std::string::npos ||
         lower.find("modulo 1000") != std::string::npos;
}

}  // namespace

FeatureVector extract_features(const ProblemInstance& p,
                               const std::vector<std::string>& verb_lexicon) {
  FeatureVector f;
  const std::string ctx = p.joined_context();
  const std::string all = p.instruction + "\n" + ctx;

  f.has_diff_scaffold = detect_diff_scaffold(all);
  f.requests_patch = detect_patch_request(p.instruction);
  for (const auto& verb : verb_lexicon) {
    f.action_verb_count += strings::count_word_occurrences(all, verb);
  }
  f.has_rule_sentences = detect_rule_sentences(ctx) || detect_rule_sentences(p.instruction);
  f.has_tfu_query = detect_tfu_query(p.instruction);
  f.table_score = p.table_blocks ? std::max(compute_table_score(*p.table_blocks),
                                            compute_table_score(ctx))
                                 : compute_table_score(ctx);
  f.doc_token_count = strings::count_ws_tokens(ctx);
  const auto tokens = strings::split_ws(all);
  if (!tokens.empty()) {
    std::size_t mathy = 0;
    for (const auto& t : tokens) {
      if (token_is_mathy(t)) ++mathy;
    }
    f.math_density = static_cast<double>(mathy) / static_cast<double>(tokens.size());
  }
  f.requests_integer_answer = detect_integer_request(p.instruction);
  return f;
}

Shape classify(const FeatureVector& f, const ClassifierThresholds& t) {
  // First match wins; patch/action markers are the least ambiguous.
  if (f.has_diff_scaffold || f.requests_patch) return Shape::ARTIFACT;
  if (f.action_verb_count >= t.action_verb_min) return Shape::PROCEDURAL;
  if (f.has_rule_sentences && f.has_tfu_query) return Shape::LOGICAL;
  if (f.table_score >= t.table_columns_min) return Shape::TABULAR;
  if (f.doc_token_count > t.doc_tokens_min) return Shape::EVIDENCE;
  if (f.math_density >= t.math_density_min && f.requests_integer_answer) {
    return Shape::SYMBOLIC;
  }
  return Shape::FALLBACK;
}

Shape classify(const ProblemInstance& p, const ClassifierThresholds& thresholds,
               const std::vector<std::string>& verb_lexicon) {
  return classify(extract_features(p, verb_lexicon), thresholds);
}

// ---------------------------------------------------------------------------
// ToolRegistry

ToolRegistry ToolRegistry::make(RegistryLayer layer) {
  ToolRegistry reg;
  reg.layer_ = layer;
  reg.tools_[Shape::SYMBOLIC] = "python_symbolic";
  reg.tools_[Shape::TABULAR] = "python_tabular";
  reg.tools_[Shape::LOGICAL] = "forward_chain";
  reg.tools_[Shape::EVIDENCE] = "retrieval_grounded";
  reg.tools_[Shape::FALLBACK] = "direct_cot_sc";
  if (layer == RegistryLayer::FULL) {
    reg.tools_[Shape::PROCEDURAL] = "alfred_state_tracker";
    reg.tools_[Shape::ARTIFACT] = "diff_verifier";
  } else {
    reg.tools_[Shape::PROCEDURAL] = "direct_cot_sc";
    reg.tools_[Shape::ARTIFACT] = "direct_cot_sc";
  }
  return reg;
}

ToolRegistry ToolRegistry::from_config(const Config& cfg) {
  std::string layer_str = strings::to_lower(cfg.get_string("layer", "full"));
  RegistryLayer layer =
      (layer_str == "core" || layer_str == "no_domain_tools")
          ? RegistryLayer::NO_DOMAIN_TOOLS
          : RegistryLayer::FULL;
  ToolRegistry reg = make(layer);
  static const std::pair<const char*, Shape> keys[] = {
      {"tools.symbolic", Shape::SYMBOLIC},   {"tools.tabular", Shape::TABULAR},
      {"tools.logical", Shape::LOGICAL},     {"tools.evidence", Shape::EVIDENCE},
      {"tools.procedural", Shape::PROCEDURAL}, {"tools.artifact", Shape::ARTIFACT},
      {"tools.fallback", Shape::FALLBACK},
  };
  for (const auto& [key, shape] : keys) {
    if (cfg.has(key)) reg.set_tool(shape, cfg.get_string(key, ""));
  }
  return reg;
}

const std::string& ToolRegistry::tool_for(Shape s) const {
  auto it = tools_.find(s);
  if (it == tools_.end()) {
    throw std::runtime_error(std::string("no tool registered for shape ") + shape_name(s));
  }
  return it->second;
}

void ToolRegistry::set_tool(Shape s, std::string tool_name) {
  if (tool_name.empty()) throw std::invalid_argument("empty tool name");
  tools_[s] = std::move(tool_name);
}

}  // namespace reflect
