#include <doctest.h>

#include "reflect/router.hpp"

using namespace reflect;

namespace {

ProblemInstance make_problem(std::string instruction, std::string context_text = "") {
  ProblemInstance p;
  p.problem_id = "t";
  p.instruction = std::move(instruction);
  if (!context_text.empty()) p.context.push_back({"doc", std::move(context_text)});
  return p;
}

const ClassifierThresholds kDefaults;

}  // namespace

TEST_CASE("feature extraction on keyword fixtures") {
  auto p = make_problem("Fix the bug; emit a unified diff", "diff --git a/x b/x\n");
  auto f = extract_features(p, default_verb_lexicon());
  CHECK(f.has_diff_scaffold);
  CHECK(f.requests_patch);

  auto rules = make_problem("True, False, or Unknown?",
                            "If the cat is red then the cat is big.");
  auto f2 = extract_features(rules, default_verb_lexicon());
  CHECK(f2.has_rule_sentences);
  CHECK(f2.has_tfu_query);

  auto empty = make_problem("");
  auto f3 = extract_features(empty, default_verb_lexicon());
  CHECK(f3 == FeatureVector{});
}

TEST_CASE("feature extraction is idempotent and ignores domain_label") {
  auto p = make_problem("Compute the integer remainder mod 1000 of 5 * 7 + 9",
                        "numbers: 12 34 56");
  p.domain_label = "aime";
  auto f1 = extract_features(p, default_verb_lexicon());
  p.domain_label = "something-else";
  auto f2 = extract_features(p, default_verb_lexicon());
  p.domain_label.clear();
  auto f3 = extract_features(p, default_verb_lexicon());
  CHECK(f1 == f2);
  CHECK(f2 == f3);
}

TEST_CASE("classification first-match precedence") {
  SUBCASE("patch request wins over everything") {
    auto p = make_problem("Emit a unified diff patch for the table bug",
                          "a | b\n1 | 2\n3 | 4\n");
    CHECK(classify(p, kDefaults, default_verb_lexicon()) == Shape::ARTIFACT);
  }
  SUBCASE("rule sentences plus TFU query yield LOGICAL") {
    auto p = make_problem("Is this true, false, or unknown? \"The cat is big.\"",
                          "If the cat is red then the cat is big. The cat is red.");
    CHECK(classify(p, kDefaults, default_verb_lexicon()) == Shape::LOGICAL);
  }
  SUBCASE("aligned numeric columns yield TABULAR") {
    auto p = make_problem("What is the total revenue?",
                          "year | revenue\n2020 | 100\n2021 | 120\n");
    CHECK(classify(p, kDefaults, default_verb_lexicon()) == Shape::TABULAR);
  }
  SUBCASE("long document yields EVIDENCE") {
    std::string doc;
    for (int i = 0; i < 1600; ++i) doc += "word ";
    auto p = make_problem("What does the paper conclude?", doc);
    CHECK(classify(p, kDefaults, default_verb_lexicon()) == Shape::EVIDENCE);
  }
  SUBCASE("math density plus integer request yields SYMBOLIC") {
    auto p = make_problem(
        "Compute 3 + 4 * 12 - 9 and give the remainder when divided by 1000; "
        "the answer is an integer.");
    CHECK(classify(p, kDefaults, default_verb_lexicon()) == Shape::SYMBOLIC);
  }
  SUBCASE("action verbs yield PROCEDURAL") {
    auto p = make_problem("Pick up the sponge, clean it, and put it on the table.",
                          "agent at: sink\nobjects: sponge at sink\n");
    CHECK(classify(p, kDefaults, default_verb_lexicon()) == Shape::PROCEDURAL);
  }
  SUBCASE("anything unmatched falls back") {
    auto p = make_problem("Name a color.");
    CHECK(classify(p, kDefaults, default_verb_lexicon()) == Shape::FALLBACK);
  }
}

TEST_CASE("classification never reads gold or domain and is stable across reruns") {
  auto p = make_problem("Short question?");
  p.domain_label = "swe_bench";
  p.gold.kind = GoldAnswer::Kind::exact_string;
  p.gold.values = {"x"};
  Shape first = classify(p, kDefaults, default_verb_lexicon());
  for (int i = 0; i < 5; ++i) {
    CHECK(classify(p, kDefaults, default_verb_lexicon()) == first);
  }
  p.domain_label.clear();
  p.gold.values.clear();
  CHECK(classify(p, kDefaults, default_verb_lexicon()) == first);
}

TEST_CASE("registry layers differ only in the two task-specific rows") {
  auto full = ToolRegistry::make(RegistryLayer::FULL);
  auto core = ToolRegistry::make(RegistryLayer::NO_DOMAIN_TOOLS);
  CHECK(full.tool_for(Shape::PROCEDURAL) == "alfred_state_tracker");
  CHECK(full.tool_for(Shape::ARTIFACT) == "diff_verifier");
  CHECK(core.tool_for(Shape::PROCEDURAL) == "direct_cot_sc");
  CHECK(core.tool_for(Shape::ARTIFACT) == "direct_cot_sc");
  for (Shape s : {Shape::SYMBOLIC, Shape::TABULAR, Shape::LOGICAL, Shape::EVIDENCE,
                  Shape::FALLBACK}) {
    CHECK(full.tool_for(s) == core.tool_for(s));
  }
}

TEST_CASE("registry from config applies overrides") {
  auto cfg = Config::from_string("layer = \"core\"\n[tools]\nfallback = \"direct_cot_sc\"\n");
  auto reg = ToolRegistry::from_config(cfg);
  CHECK(reg.layer() == RegistryLayer::NO_DOMAIN_TOOLS);
  CHECK(reg.tool_for(Shape::ARTIFACT) == "direct_cot_sc");
  CHECK_THROWS(reg.set_tool(Shape::FALLBACK, ""));
}
