#include "reflect/problem.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "reflect/strings.hpp"

namespace reflect {

using nlohmann::json;

const char* GoldAnswer::kind_name(Kind k) {
  switch (k) {
    case Kind::exact_string: return "exact_string";
    case Kind::integer: return "integer";
    case Kind::numeric: return "numeric";
    case Kind::token_set: return "token_set";
    case Kind::action_sequence: return "action_sequence";
    case Kind::none_structural: return "none_structural";
  }
  return "exact_string";
}

std::optional<GoldAnswer::Kind> GoldAnswer::kind_from_name(const std::string& name) {
  if (name == "exact_string") return Kind::exact_string;
  if (name == "integer") return Kind::integer;
  if (name == "numeric") return Kind::numeric;
  if (name == "token_set") return Kind::token_set;
  if (name == "action_sequence") return Kind::action_sequence;
  if (name == "none_structural") return Kind::none_structural;
  return std::nullopt;
}

std::string ProblemInstance::joined_context() const {
  std::string out;
  for (const auto& doc : context) {
    if (!out.empty()) out += "\n\n";
    if (!doc.name.empty()) out += "[" + doc.name + "]\n";
    out += doc.text;
  }
  return out;
}

namespace {

GoldAnswer parse_gold(const json& j) {
  GoldAnswer g;
  if (j.is_null()) {
    g.kind = GoldAnswer::Kind::none_structural;
    return g;
  }
  std::string kind_str = j.value("kind", "exact_string");
  auto kind = GoldAnswer::kind_from_name(kind_str);
  if (!kind) throw std::runtime_error("unknown gold kind: " + kind_str);
  g.kind = *kind;
  if (j.contains("values")) {
    for (const auto& v : j["values"]) {
      if (v.is_string()) g.values.push_back(v.get<std::string>());
      else g.values.push_back(v.dump());
    }
  } else if (j.contains("value")) {
    const auto& v = j["value"];
    if (v.is_string()) g.values.push_back(v.get<std::string>());
    else g.values.push_back(v.dump());
  }
  g.rel_tol = j.value("rel_tol", 0.01);
  return g;
}

}  // namespace

std::vector<ProblemInstance> parse_problems_jsonl(const std::string& text) {
  std::vector<ProblemInstance> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = strings::trim(line);
    if (t.empty()) continue;
    json j = json::parse(t, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
      throw std::runtime_error("malformed problem JSONL at line " + std::to_string(lineno));
    }
    ProblemInstance p;
    p.problem_id = j.value("problem_id", "");
    if (p.problem_id.empty()) {
      throw std::runtime_error("problem without problem_id at line " + std::to_string(lineno));
    }
    p.domain_label = j.value("domain", "");
    p.instruction = j.value("instruction", "");
    if (j.contains("context")) {
      for (const auto& d : j["context"]) {
        ContextDocument doc;
        doc.name = d.value("name", "");
        doc.text = d.value("text", "");
        p.context.push_back(std::move(doc));
      }
    }
    if (j.contains("gold")) p.gold = parse_gold(j["gold"]);
    else p.gold.kind = GoldAnswer::Kind::none_structural;
    if (j.contains("table_blocks") && j["table_blocks"].is_string()) {
      p.table_blocks = j["table_blocks"].get<std::string>();
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ProblemInstance> load_problems_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problems file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_problems_jsonl(buf.str());
}

}  // namespace reflect
