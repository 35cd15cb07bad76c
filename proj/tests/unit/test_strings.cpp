#include <doctest.h>

#include "reflect/config.hpp"
#include "reflect/strings.hpp"

using namespace reflect;

TEST_CASE("whitespace token counting") {
  CHECK(strings::count_ws_tokens("") == 0);
  CHECK(strings::count_ws_tokens("one") == 1);
  CHECK(strings::count_ws_tokens("  a b\tc\nd  ") == 4);
}

TEST_CASE("canonical numeric form") {
  CHECK(strings::canonical_number("392") == "392");
  CHECK(strings::canonical_number("1.50") == "1.5");
  CHECK(strings::canonical_number("10.0") == "10");
  CHECK(strings::canonical_number("007") == "7");
  CHECK(strings::canonical_number("-0") == "0");
  CHECK(strings::canonical_number("+3.25") == "3.25");
  CHECK(strings::canonical_number("not a number") == "not a number");
}

TEST_CASE("normalize_answer folds case and numerics") {
  CHECK(strings::normalize_answer(" TRUE ") == "true");
  CHECK(strings::normalize_answer("392 ") == "392");
  CHECK(strings::normalize_answer("1.50") == "1.5");
}

TEST_CASE("lenient number parsing") {
  CHECK(*strings::parse_number_lenient("$1,234.00") == doctest::Approx(1234.0));
  CHECK(*strings::parse_number_lenient("45%") == doctest::Approx(45.0));
  CHECK(*strings::parse_number_lenient("(12)") == doctest::Approx(-12.0));
  CHECK(!strings::parse_number_lenient("twelve"));
  CHECK(!strings::parse_number_lenient(""));
}

TEST_CASE("final-answer marker takes the last occurrence") {
  std::string reply = "FINAL ANSWER: 3\nwait, recompute\nFINAL ANSWER: 7\n";
  CHECK(*strings::parse_final_answer(reply) == "7");
  CHECK(!strings::parse_final_answer("no marker here"));
  CHECK(*strings::parse_final_answer("final answer: ok") == "ok");
}

TEST_CASE("word-boundary phrase counting") {
  CHECK(strings::count_word_occurrences("pick up the cup, then pick up the pen", "pick up") == 2);
  CHECK(strings::count_word_occurrences("output the value", "put") == 0);
  CHECK(strings::count_word_occurrences("Put it down. put!", "put") == 2);
}

TEST_CASE("config parses sections, types, comments") {
  auto cfg = Config::from_string(
      "layer = \"full\"  # registry layer\n"
      "[sandbox]\n"
      "interpreter = \"python3\"\n"
      "timeout_ms = 5000\n"
      "[heavy]\n"
      "theta_u = 0.6\n"
      "enabled = true\n");
  CHECK(cfg.get_string("layer", "") == "full");
  CHECK(cfg.get_string("sandbox.interpreter", "") == "python3");
  CHECK(cfg.get_int("sandbox.timeout_ms", 0) == 5000);
  CHECK(cfg.get_double("heavy.theta_u", 0) == doctest::Approx(0.6));
  CHECK(cfg.get_bool("heavy.enabled", false));
  CHECK(cfg.get_int("missing.key", 42) == 42);
  CHECK_THROWS_AS(Config::from_string("novalue\n"), ConfigError);
  CHECK_THROWS_AS((void)cfg.get_int("layer", 0), ConfigError);
}
