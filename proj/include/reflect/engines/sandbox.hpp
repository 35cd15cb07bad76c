#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace reflect::engines {

struct SandboxResult {
  enum class ExitStatus { ok, nonzero, timeout, launch_failure };

  std::string stdout_text;
  std::string stderr_text;
  ExitStatus exit_status = ExitStatus::launch_failure;
  std::int64_t elapsed_ms = 0;
  /// Last nonempty stdout line, trimmed; present only when exit_status
  /// is ok and stdout is nonempty.
  std::optional<std::string> extracted_answer;
};

const char* exit_status_name(SandboxResult::ExitStatus s);

struct SandboxOptions {
  std::string interpreter = "python3";
  std::vector<std::string> interpreter_args;  // placed before the script path
  std::int64_t timeout_ms = 5000;
};

/// Runs the script through the configured external interpreter in a
/// fresh private working directory, enforcing a wall-clock timeout.
/// Isolation level: the subprocess sees only its own temp directory as
/// cwd (relative writes land there); no namespace or network isolation
/// is attempted. Failures are reported in exit_status, never raised.
SandboxResult run_sandbox(const std::string& script_text, const SandboxOptions& options);

inline SandboxResult run_sandbox(const std::string& script_text,
                                 std::int64_t timeout_ms = 5000) {
  SandboxOptions opt;
  opt.timeout_ms = timeout_ms;
  return run_sandbox(script_text, opt);
}

}  // namespace reflect::engines
