#include <doctest.h>

#include <cstdio>

#include "reflect/scoring.hpp"

using namespace reflect;

namespace {

GoldAnswer gold(GoldAnswer::Kind kind, std::vector<std::string> values, double tol = 0.01) {
  GoldAnswer g;
  g.kind = kind;
  g.values = std::move(values);
  g.rel_tol = tol;
  return g;
}

}  // namespace

TEST_CASE("exact scorer: integers compare numerically, strings case-fold") {
  CHECK(score_exact("392", gold(GoldAnswer::Kind::integer, {"392"})).value == 1.0);
  CHECK(score_exact(" 0392 ", gold(GoldAnswer::Kind::integer, {"392"})).value == 1.0);
  CHECK(score_exact("391", gold(GoldAnswer::Kind::integer, {"392"})).value == 0.0);
  CHECK(score_exact("TRUE", gold(GoldAnswer::Kind::exact_string, {"True"})).value == 1.0);
  CHECK(score_exact("false", gold(GoldAnswer::Kind::exact_string, {"True"})).value == 0.0);
  CHECK_THROWS_AS(score_exact("x", gold(GoldAnswer::Kind::numeric, {"1"})), ScorerError);
}

TEST_CASE("numeric scorer bands") {
  auto g = gold(GoldAnswer::Kind::numeric, {"100"});
  CHECK(score_numeric("100.4", g, 0.01).value == 1.0);
  auto s = score_numeric("104", g, 0.01);
  CHECK(s.value == 0.0);
  CHECK(s.detail.at("within_1pct") == "false");
  CHECK(s.detail.at("within_5pct") == "true");
  CHECK(score_numeric("$1,234.00", gold(GoldAnswer::Kind::numeric, {"1234"}), 0.01).value ==
        1.0);
  auto bad = score_numeric("around a hundred", g, 0.01);
  CHECK(bad.value == 0.0);
  CHECK(bad.detail.count("reason") == 1);
  // zero gold uses an absolute band
  CHECK(score_numeric("0.005", gold(GoldAnswer::Kind::numeric, {"0"}), 0.01).value == 1.0);
  CHECK(score_numeric("0.05", gold(GoldAnswer::Kind::numeric, {"0"}), 0.01).value == 0.0);
}

TEST_CASE("numeric normalization by brute force over formatted variants") {
  const char* formats[] = {"1234", "1,234", "$1234", "$1,234.00", "1234.0", " 1234 "};
  auto g = gold(GoldAnswer::Kind::numeric, {"1234"});
  for (const char* f : formats) {
    CHECK(score_numeric(f, g, 0.01).value == 1.0);
  }
}

TEST_CASE("token F1") {
  CHECK(score_token_f1("red cat", {"red cat"}).value == doctest::Approx(1.0));
  CHECK(score_token_f1("dog", {"red cat"}).value == doctest::Approx(0.0));
  CHECK(score_token_f1("the red cat", {"red cat"}).value == doctest::Approx(1.0));
  CHECK(score_token_f1("", {}).value == doctest::Approx(1.0));
  CHECK(score_token_f1("x", {}).value == doctest::Approx(0.0));
  // multi-gold takes the max
  CHECK(score_token_f1("blue dog", {"red cat", "blue dog"}).value == doctest::Approx(1.0));
  // P/R symmetry for single gold: swapping answer and gold preserves F1
  auto a = score_token_f1("red cat roof", {"red cat"}).value;
  auto b = score_token_f1("red cat", {"red cat roof"}).value;
  CHECK(a == doctest::Approx(b));
}

TEST_CASE("action sequence scorer") {
  std::string plan = "pickup(apple)\ngoto(table)\nput(apple, table)";
  auto s = score_action_sequence(plan, plan);
  CHECK(s.value == 1.0);
  CHECK(s.detail.at("recall") == "1.0000");
  CHECK(s.detail.at("order_correct") == "true");

  std::string reversed = "put(apple, table)\ngoto(table)\npickup(apple)";
  auto r = score_action_sequence(reversed, plan);
  CHECK(r.value == 0.0);
  CHECK(r.detail.at("recall") == "1.0000");
  CHECK(r.detail.at("order_correct") == "false");

  std::string missing = "pickup(apple)\nput(apple, table)";
  auto m = score_action_sequence(missing, plan);
  CHECK(m.value == 0.0);
  CHECK(m.detail.at("recall") == "0.6667");

  CHECK(score_action_sequence("free text, no actions", plan).value == 0.0);
}

TEST_CASE("tiered patch scorer emits exactly the four tiers") {
  // 0.0: prose
  CHECK(score_swe_tiered("The bug is in foo()").value == 0.0);
  // 0.3: valid diff to a non-code file
  std::string readme =
      "--- a/README.md\n+++ b/README.md\n@@ -1,1 +1,1 @@\n-old\n+new\n";
  CHECK(score_swe_tiered(readme).value == 0.3);
  // 0.6: code file, broken added line
  std::string broken =
      "--- a/m.py\n+++ b/m.py\n@@ -1,1 +1,1 @@\n-x\n+def f(:\n";
  CHECK(score_swe_tiered(broken).value == 0.6);
  // 1.0: code file, parsing added line
  std::string fine =
      "--- a/m.py\n+++ b/m.py\n@@ -1,1 +1,1 @@\n-x\n+def f(): return 1\n";
  CHECK(score_swe_tiered(fine).value == 1.0);
}

TEST_CASE("tiered scorer: non-Python code files cap at 0.6") {
  std::string js = "--- a/app.js\n+++ b/app.js\n@@ -1,1 +1,1 @@\n-a\n+const x = 1;\n";
  CHECK(score_swe_tiered(js).value == 0.6);
}

TEST_CASE("tier monotonicity along the improvement ladder") {
  std::vector<std::string> ladder = {
      "prose answer",
      "--- a/README.md\n+++ b/README.md\n@@ -1,1 +1,1 @@\n-a\n+b\n",
      "--- a/m.py\n+++ b/m.py\n@@ -1,1 +1,1 @@\n-a\n+def f(:\n",
      "--- a/m.py\n+++ b/m.py\n@@ -1,1 +1,1 @@\n-a\n+def f(): return 1\n",
  };
  double prev = -1.0;
  for (const auto& text : ladder) {
    double tier = score_swe_tiered(text).value;
    CHECK(tier >= prev);
    prev = tier;
  }
}

TEST_CASE("wilson interval matches the published pilot intervals") {
  auto fmt = [](double v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.1f", v * 100.0);
    return std::string(buf);
  };
  auto a = wilson_ci(1, 60);
  CHECK(fmt(a.lo) == "0.3");
  CHECK(fmt(a.hi) == "8.9");
  auto b = wilson_ci(0, 60);
  CHECK(fmt(b.lo) == "0.0");
  CHECK(fmt(b.hi) == "6.0");
  auto c = wilson_ci(90, 100);
  CHECK(fmt(c.lo) == "82.6");
  CHECK(fmt(c.hi) == "94.5");
}

TEST_CASE("wilson interval contains the point estimate (property)") {
  for (long n = 1; n <= 200; n += 7) {
    for (long s = 0; s <= n; s += (n / 13) + 1) {
      auto w = wilson_ci(s, n);
      double p = static_cast<double>(s) / static_cast<double>(n);
      CHECK(w.lo <= p + 1e-12);
      CHECK(w.hi >= p - 1e-12);
      CHECK(w.lo >= 0.0);
      CHECK(w.hi <= 1.0);
    }
  }
  CHECK_THROWS_AS(wilson_ci(5, 4), std::domain_error);
  CHECK_THROWS_AS(wilson_ci(0, 0), std::domain_error);
}
