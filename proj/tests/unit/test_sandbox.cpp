#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "reflect/engines/sandbox.hpp"

using namespace reflect::engines;
namespace fs = std::filesystem;

TEST_CASE("script output yields the last nonempty stdout line") {
  auto r = run_sandbox("print('working')\nprint()\nprint(392)\n", 5000);
  CHECK(r.exit_status == SandboxResult::ExitStatus::ok);
  REQUIRE(r.extracted_answer);
  CHECK(*r.extracted_answer == "392");
}

TEST_CASE("reduced-fraction enumeration over denominator 9999 prints 392") {
  auto r = run_sandbox(
      "from math import gcd\n"
      "nums = {n // gcd(n, 9999) for n in range(1, 10000)}\n"
      "print(len(nums) % 1000)\n",
      5000);
  REQUIRE(r.exit_status == SandboxResult::ExitStatus::ok);
  CHECK(*r.extracted_answer == "392");
}

TEST_CASE("infinite loops hit the wall-clock timeout") {
  auto r = run_sandbox("while True:\n    pass\n", 100);
  CHECK(r.exit_status == SandboxResult::ExitStatus::timeout);
  CHECK(!r.extracted_answer);
  CHECK(r.elapsed_ms >= 100);
}

TEST_CASE("syntax errors exit nonzero without an answer") {
  auto r = run_sandbox("def f(:\n", 5000);
  CHECK(r.exit_status == SandboxResult::ExitStatus::nonzero);
  CHECK(!r.extracted_answer);
  CHECK(!r.stderr_text.empty());
}

TEST_CASE("missing interpreter reports launch failure") {
  SandboxOptions opt;
  opt.interpreter = "definitely-not-an-interpreter";
  auto r = run_sandbox("print(1)", opt);
  CHECK(r.exit_status == SandboxResult::ExitStatus::launch_failure);
}

TEST_CASE("relative writes land in the private working directory") {
  // canary in the caller's cwd; the script writes ./canary.txt
  fs::path canary = fs::current_path() / "canary.txt";
  {
    std::ofstream f(canary);
    f << "untouched";
  }
  auto r = run_sandbox("open('canary.txt', 'w').write('clobbered')\nprint('done')\n", 5000);
  CHECK(r.exit_status == SandboxResult::ExitStatus::ok);
  std::ifstream check(canary);
  std::string content;
  std::getline(check, content);
  CHECK(content == "untouched");
  fs::remove(canary);
}

TEST_CASE("empty stdout on success yields no extracted answer") {
  auto r = run_sandbox("x = 1\n", 5000);
  CHECK(r.exit_status == SandboxResult::ExitStatus::ok);
  CHECK(!r.extracted_answer);
}
