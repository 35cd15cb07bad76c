#include "reflect/prompts.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace reflect {

namespace fs = std::filesystem;

namespace {

const std::map<std::string, std::string>& builtin_templates() {
  static const std::map<std::string, std::string> t = {
      {"python_symbolic",
       "Solve the following problem by writing a complete, self-contained Python\n"
       "script. The script must compute the answer and print it so that the final\n"
       "line of output is the answer alone.\n\n"
       "Problem:\n{{instruction}}\n\n{{context}}\n{{hint}}"
       "Reply with exactly one ```python code block and nothing else.\n"},

      {"python_tabular",
       "Answer the question about the table below by writing a complete,\n"
       "self-contained Python script that computes the answer and prints it so\n"
       "that the final line of output is the answer alone.\n\n"
       "Table:\n{{table}}\n\nQuestion:\n{{instruction}}\n\n{{hint}}"
       "Reply with exactly one ```python code block and nothing else.\n"},

      {"logical_delegate",
       "Given the rules and facts below, decide whether the statement is True,\n"
       "False, or Unknown under the closed-world assumption.\n\n"
       "Rules and facts:\n{{context}}\n\nStatement: {{query}}\n\n"
       "Reason step by step, then end your reply with\n"
       "\"FINAL ANSWER: True\", \"FINAL ANSWER: False\", or \"FINAL ANSWER: Unknown\".\n"},

      {"retrieval_grounded",
       "Answer the question using only the retrieved sections below. Quote the\n"
       "answer span as directly as possible.\n\n"
       "Sections:\n{{sections}}\n\nQuestion: {{instruction}}\n\n"
       "End your reply with \"FINAL ANSWER: <answer>\".\n"},

      {"alfred_state_tracker",
       "Plan a sequence of actions to accomplish the task in the world described\n"
       "below.\n\nWorld:\n{{world}}\n\nTask: {{instruction}}\n\n"
       "Available actions: goto(dest), pickup(obj), put(obj, dest), open(obj),\n"
       "close(obj), toggle(obj), slice(obj), clean(obj), heat(obj), cool(obj).\n"
       "{{feedback}}"
       "Reply with one action per line and nothing else.\n"},

      {"diff_verifier",
       "Produce a patch for the problem below.\n\n"
       "Problem:\n{{instruction}}\n\n{{context}}\n{{feedback}}"
       "Reply with ONLY a unified diff (\"--- a/path\", \"+++ b/path\",\n"
       "\"@@ -l,c +l,c @@\" hunks). No prose before or after the diff.\n"},

      {"direct_cot_sc",
       "{{instruction}}\n\n{{context}}\n"
       "Think step by step. End your reply with \"FINAL ANSWER: <answer>\".\n"},

      {"react_step",
       "{{instruction}}\n\n"
       "Work in Thought / Action steps. Each turn, reply with:\n"
       "Thought: <your reasoning>\n"
       "Action: lookup[<term>] to search the provided documents, or\n"
       "Action: finish[<answer>] when you know the answer.\n\n"
       "{{transcript}}"},

      {"self_refine_critique",
       "Review the answer below for errors.\n\nProblem:\n{{instruction}}\n\n"
       "Answer:\n{{draft}}\n\n"
       "If the answer is correct and complete, reply exactly \"NO ISSUES\".\n"
       "Otherwise list the problems you found.\n"},

      {"self_refine_revise",
       "Revise the answer to fix the critique.\n\nProblem:\n{{instruction}}\n\n"
       "Previous answer:\n{{draft}}\n\nCritique:\n{{critique}}\n\n"
       "End your reply with \"FINAL ANSWER: <answer>\".\n"},

      {"reflexion_attempt",
       "{{instruction}}\n\n{{context}}\n{{memory}}"
       "Think step by step. End your reply with \"FINAL ANSWER: <answer>\".\n"},

      {"reflexion_reflect",
       "Your previous attempt at the problem below failed.\n\n"
       "Problem:\n{{instruction}}\n\nFailed attempt:\n{{attempt}}\n\n"
       "Write a short reflection on what went wrong and what to try differently\n"
       "next time.\n"},

      {"minimal_checklist",
       "Pause and run the self-check:\n"
       "- State check: what have I established so far?\n"
       "- Consistency check: do any steps contradict each other?\n"
       "- Assumption check: am I relying on anything unsupported?\n"
       "- Direction check: am I still on track toward the goal?\n"
       "- Decision: continue, or change course?\n"
       "Write the checklist as a \"Reflection:\" block, then continue.\n"},

      {"symbolic_retry_hint",
       "Your previous scripts failed to execute. Keep the script simple, avoid\n"
       "external packages beyond the standard library, and make sure it prints\n"
       "the answer.\n\n"},

      {"heavy_extract",
       "Extract structured elements from the reasoning step below. Reply with a\n"
       "single JSON object with keys \"evidence\", \"assumptions\", \"decisions\",\n"
       "\"goals\", \"conflicts\" (arrays; empty arrays when nothing applies).\n"
       "evidence: {\"text\", \"provenance\", \"confidence\": \"low|med|high\"}\n"
       "assumptions: {\"text\", \"justification\"}\n"
       "decisions: {\"text\", \"rationale\", \"reversible\": bool, \"tag\"?: "
       "\"strategy|final_answer\", \"pending\"?: bool}\n"
       "goals: {\"text\"?, \"parent\"?, \"id\"?, \"status\"?: \"open|active|done|blocked\"}\n"
       "conflicts: {\"a\", \"b\", \"severity\": \"low|med|critical\"}\n\n"
       "Reasoning step:\n{{step}}\n"},

      {"heavy_inspect",
       "Audit the reasoning state below. Check for unsupported assumptions,\n"
       "contradictions between elements, stalled progress, and unjustified\n"
       "confidence. Reply with a single JSON object:\n"
       "{\"failure_type\": \"logic|arithmetic|unsupported|incomplete|contradiction|"
       "stalled\",\n \"affected\": [element ids], \"severity\": \"low|med|high\",\n"
       " \"health\": \"good|caution|critical\"}\n\n"
       "State:\n{{state}}\n"},

      {"heavy_resolve",
       "Two state elements conflict. Decide which one to keep.\n\n"
       "Element {{a_id}}: {{a_text}}\nElement {{b_id}}: {{b_text}}\n\n"
       "Reply with a single JSON object {\"loser\": \"<id of the element to retract>\"}.\n"},

      {"heavy_summarize",
       "Summarize the reasoning steps below in at most five sentences, keeping\n"
       "every established result.\n\n{{steps}}\n"},
  };
  return t;
}

}  // namespace

PromptLibrary::PromptLibrary() : templates_(builtin_templates()) {}

PromptLibrary::PromptLibrary(const std::string& override_dir) : PromptLibrary() {
  if (override_dir.empty()) return;
  std::error_code ec;
  if (!fs::is_directory(override_dir, ec)) return;
  for (const auto& entry : fs::directory_iterator(override_dir, ec)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    if (!in) continue;
    std::stringstream buf;
    buf << in.rdbuf();
    templates_[entry.path().stem().string()] = buf.str();
  }
}

std::string PromptLibrary::render(const std::string& key,
                                  const std::map<std::string, std::string>& vars) const {
  auto it = templates_.find(key);
  if (it == templates_.end()) throw std::out_of_range("unknown prompt template: " + key);
  const std::string& tpl = it->second;
  std::string out;
  out.reserve(tpl.size());
  std::size_t pos = 0;
  while (pos < tpl.size()) {
    std::size_t open = tpl.find("{{", pos);
    if (open == std::string::npos) {
      out.append(tpl, pos, std::string::npos);
      break;
    }
    out.append(tpl, pos, open - pos);
    std::size_t close = tpl.find("}}", open + 2);
    if (close == std::string::npos) {
      out.append(tpl, open, std::string::npos);
      break;
    }
    std::string name = tpl.substr(open + 2, close - open - 2);
    auto vit = vars.find(name);
    if (vit != vars.end()) out += vit->second;
    pos = close + 2;
  }
  return out;
}

}  // namespace reflect
