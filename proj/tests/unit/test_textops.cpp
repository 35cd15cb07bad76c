#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "reflect/engines/fences.hpp"
#include "reflect/engines/tfidf.hpp"
#include "reflect/engines/vote.hpp"
#include "reflect/strings.hpp"

using namespace reflect;
using namespace reflect::engines;

TEST_CASE("fenced code extraction") {
  CHECK(*extract_fenced_code("before\n```python\nprint(1)\n```\nafter") == "print(1)");
  CHECK(*extract_fenced_code("```\nx = 2\ny = 3\n```") == "x = 2\ny = 3");
  CHECK(!extract_fenced_code("no fence at all"));
  // two blocks: the first wins
  CHECK(*extract_fenced_code("```python\nfirst\n```\n```python\nsecond\n```") == "first");
  CHECK(!extract_fenced_code("``` unclosed"));
}

TEST_CASE("modal vote picks the most frequent normalized answer") {
  using V = std::vector<std::string>;
  CHECK(*modal_vote(V{"392", "776", "392"}) == "392");
  CHECK(!modal_vote(V{}));
  CHECK(*modal_vote(V{"1.50", "1.5"}) == "1.5");
  CHECK(*modal_vote(V{"10.0", "10", "9"}) == "10");
  SUBCASE("absent candidates are dropped") {
    std::vector<std::optional<std::string>> c = {std::nullopt, "7", std::nullopt};
    CHECK(*modal_vote(c) == "7");
    std::vector<std::optional<std::string>> none = {std::nullopt, std::nullopt};
    CHECK(!modal_vote(none));
  }
  SUBCASE("ties break toward the earliest first occurrence") {
    CHECK(*modal_vote(V{"b", "a", "b", "a"}) == "b");
    CHECK(*modal_vote(V{"x", "y"}) == "x");
  }
}

TEST_CASE("normalizer idempotence over a numeric-string corpus") {
  std::vector<std::string> corpus = {"1.50",  "0.500", "007", "-0",   "12.",   "+8",
                                     "392",   "10.0",  "3.14", "-2.0", "0.0",  "100",
                                     "0.050", "5",     "05.50"};
  for (const auto& s : corpus) {
    auto once = strings::normalize_answer(s);
    CHECK(strings::normalize_answer(once) == once);
  }
}

TEST_CASE("unique-mode votes are permutation invariant") {
  std::mt19937 rng(7);
  std::vector<std::string> base = {"4", "4", "4", "5", "5", "9"};
  auto expected = modal_vote(base);
  for (int i = 0; i < 200; ++i) {
    auto shuffled = base;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(modal_vote(shuffled) == expected);
  }
}

TEST_CASE("tfidf ranks the identical section first") {
  std::vector<NamedSection> docs = {
      {"s0", "alpha beta gamma"},
      {"s1", "delta epsilon zeta eta"},
      {"s2", "theta iota kappa"},
  };
  auto ranked = tfidf_retrieve("delta epsilon zeta eta", docs, 3);
  REQUIRE(!ranked.empty());
  CHECK(ranked[0].index == 1);
  CHECK(ranked[0].score > ranked[1].score);
}

TEST_CASE("zero-overlap query falls back to document order") {
  std::vector<NamedSection> docs = {{"s0", "alpha"}, {"s1", "beta"}, {"s2", "gamma"}};
  auto ranked = tfidf_retrieve("zzz qqq", docs, 2);
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].index == 0);
  CHECK(ranked[1].index == 1);
}

TEST_CASE("engineered frequencies match hand-computed cosine scores") {
  // 10-word vocabulary fixture; idf = ln(3/df), weight = ln(1+tf)*idf
  std::vector<NamedSection> docs = {
      {"s0", "cat cat dog"},          // cat tf=2, dog tf=1
      {"s1", "dog dog bird"},         // dog tf=2, bird tf=1
      {"s2", "fish fish fish bird"},  // fish tf=3, bird tf=1
  };
  auto ranked = tfidf_retrieve("cat dog", docs, 3);

  auto w = [](int tf, int df) { return std::log(1.0 + tf) * std::log(3.0 / df); };
  // query: cat tf=1 (df 1), dog tf=1 (df 2)
  double qc = w(1, 1), qd = w(1, 2);
  double qnorm = std::sqrt(qc * qc + qd * qd);
  // s0 vector: cat w(2,1), dog w(1,2)
  double s0c = w(2, 1), s0d = w(1, 2);
  double s0norm = std::sqrt(s0c * s0c + s0d * s0d);
  double expected_s0 = (qc * s0c + qd * s0d) / (qnorm * s0norm);
  // s1 vector: dog w(2,2), bird w(1,2)
  double s1d = w(2, 2), s1b = w(1, 2);
  double s1norm = std::sqrt(s1d * s1d + s1b * s1b);
  double expected_s1 = (qd * s1d) / (qnorm * s1norm);

  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0].index == 0);
  CHECK(ranked[0].score == doctest::Approx(expected_s0).epsilon(1e-12));
  CHECK(ranked[1].index == 1);
  CHECK(ranked[1].score == doctest::Approx(expected_s1).epsilon(1e-12));
  CHECK(ranked[2].score == doctest::Approx(0.0));
}

TEST_CASE("ties preserve section order") {
  std::vector<NamedSection> docs = {{"a", "same words alpha"},
                                    {"b", "same words beta"},
                                    {"c", "unrelated filler text"}};
  auto ranked = tfidf_retrieve("same words", docs, 3);
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0].score == doctest::Approx(ranked[1].score));
  CHECK(ranked[0].score > 0.0);
  CHECK(ranked[0].index == 0);
  CHECK(ranked[1].index == 1);
}
