#include "reflect/engines/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "reflect/strings.hpp"

namespace reflect::engines {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const char* exit_status_name(SandboxResult::ExitStatus s) {
  switch (s) {
    case SandboxResult::ExitStatus::ok: return "ok";
    case SandboxResult::ExitStatus::nonzero: return "nonzero";
    case SandboxResult::ExitStatus::timeout: return "timeout";
    case SandboxResult::ExitStatus::launch_failure: return "launch_failure";
  }
  return "launch_failure";
}

namespace {

std::atomic<unsigned> g_run_counter{0};

fs::path make_private_dir() {
  auto base = fs::temp_directory_path();
  for (int attempt = 0; attempt < 64; ++attempt) {
    auto dir = base / ("reflect_sbx_" + std::to_string(::getpid()) + "_" +
                       std::to_string(g_run_counter.fetch_add(1)));
    std::error_code ec;
    if (fs::create_directory(dir, ec)) return dir;
  }
  return {};
}

void set_extracted_answer(SandboxResult* r) {
  if (r->exit_status != SandboxResult::ExitStatus::ok) return;
  std::optional<std::string> last;
  for (const auto& line : strings::split(r->stdout_text, '\n')) {
    std::string t = strings::trim(line);
    if (!t.empty()) last = t;
  }
  r->extracted_answer = last;
}

/// Drains both pipes until the deadline or both close; returns false on
/// deadline expiry.
bool drain_until(int out_fd, int err_fd, Clock::time_point deadline, std::string* out,
                 std::string* err) {
  bool out_open = true, err_open = true;
  char buf[4096];
  while (out_open || err_open) {
    auto now = Clock::now();
    if (now >= deadline) return false;
    int wait_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
    if (wait_ms < 1) wait_ms = 1;
    struct pollfd fds[2];
    nfds_t n = 0;
    if (out_open) fds[n++] = {out_fd, POLLIN, 0};
    if (err_open) fds[n++] = {err_fd, POLLIN, 0};
    int rc = ::poll(fds, n, wait_ms);
    if (rc == 0) continue;  // re-check deadline
    if (rc < 0) {
      if (errno == EINTR) continue;
      return true;  // treat poll failure as stream end; wait() decides status
    }
    for (nfds_t i = 0; i < n; ++i) {
      if ((fds[i].revents & (POLLIN | POLLHUP)) == 0) continue;
      ssize_t got = ::read(fds[i].fd, buf, sizeof(buf));
      if (got > 0) {
        (fds[i].fd == out_fd ? out : err)->append(buf, static_cast<std::size_t>(got));
      } else {
        if (fds[i].fd == out_fd) out_open = false;
        else err_open = false;
      }
    }
  }
  return true;
}

}  // namespace

SandboxResult run_sandbox(const std::string& script_text, const SandboxOptions& options) {
  SandboxResult result;
  auto start = Clock::now();
  auto finish = [&](SandboxResult::ExitStatus st) {
    result.exit_status = st;
    result.elapsed_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
    set_extracted_answer(&result);
    return result;
  };

  fs::path dir = make_private_dir();
  if (dir.empty()) return finish(SandboxResult::ExitStatus::launch_failure);
  fs::path script_path = dir / "script.py";
  {
    std::ofstream f(script_path);
    if (!f) return finish(SandboxResult::ExitStatus::launch_failure);
    f << script_text;
  }

  int out_pipe[2], err_pipe[2];
  if (::pipe(out_pipe) != 0) return finish(SandboxResult::ExitStatus::launch_failure);
  if (::pipe(err_pipe) != 0) {
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    return finish(SandboxResult::ExitStatus::launch_failure);
  }

  pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) ::close(fd);
    return finish(SandboxResult::ExitStatus::launch_failure);
  }

  if (pid == 0) {
    // child: own process group so a timeout kill reaps grandchildren too
    ::setpgid(0, 0);
    if (::chdir(dir.c_str()) != 0) ::_exit(127);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) ::close(fd);
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);

    std::vector<std::string> argv_store;
    argv_store.push_back(options.interpreter);
    for (const auto& a : options.interpreter_args) argv_store.push_back(a);
    argv_store.push_back(script_path.string());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    argv.push_back(nullptr);
    ::execvp(argv[0], argv.data());
    ::_exit(127);
  }

  ::close(out_pipe[1]);
  ::close(err_pipe[1]);

  auto deadline = start + std::chrono::milliseconds(options.timeout_ms);
  bool completed = drain_until(out_pipe[0], err_pipe[0], deadline, &result.stdout_text,
                               &result.stderr_text);
  ::close(out_pipe[0]);
  ::close(err_pipe[0]);

  int wstatus = 0;
  if (!completed) {
    ::kill(-pid, SIGKILL);
    ::waitpid(pid, &wstatus, 0);
    std::error_code ec;
    fs::remove_all(dir, ec);
    return finish(SandboxResult::ExitStatus::timeout);
  }

  // streams closed; the process should exit promptly, but guard with the
  // remaining wall-clock budget anyway
  while (true) {
    pid_t done = ::waitpid(pid, &wstatus, WNOHANG);
    if (done == pid) break;
    if (done < 0) break;
    if (Clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &wstatus, 0);
      std::error_code ec;
      fs::remove_all(dir, ec);
      return finish(SandboxResult::ExitStatus::timeout);
    }
    ::usleep(2000);
  }

  std::error_code ec;
  fs::remove_all(dir, ec);

  if (WIFEXITED(wstatus)) {
    int code = WEXITSTATUS(wstatus);
    if (code == 127) return finish(SandboxResult::ExitStatus::launch_failure);
    return finish(code == 0 ? SandboxResult::ExitStatus::ok
                            : SandboxResult::ExitStatus::nonzero);
  }
  return finish(SandboxResult::ExitStatus::nonzero);
}

}  // namespace reflect::engines
