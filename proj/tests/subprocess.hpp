#pragma once

// Minimal child-process helpers for driving the command-line tool.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <string>
#include <vector>

extern char** environ;

namespace dkpabe::testing {

struct Child {
  pid_t pid = -1;
  int out = -1;  // read end of the child's stdout
};

inline Child spawn(const std::vector<std::string>& argv, bool capture, const std::string& stderr_path = "") {
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  int pipefd[2] = {-1, -1};
  if (capture) {
    if (::pipe(pipefd) != 0) return {};
    posix_spawn_file_actions_adddup2(&fa, pipefd[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&fa, pipefd[0]);
    posix_spawn_file_actions_addclose(&fa, pipefd[1]);
  } else {
    posix_spawn_file_actions_addopen(&fa, STDOUT_FILENO, "/dev/null", O_WRONLY, 0);
  }
  posix_spawn_file_actions_addopen(&fa, STDERR_FILENO, stderr_path.empty() ? "/dev/null" : stderr_path.c_str(),
                                   O_WRONLY | O_CREAT | O_APPEND, 0600);
  Child c;
  if (posix_spawn(&c.pid, args[0], &fa, nullptr, args.data(), environ) != 0) c.pid = -1;
  posix_spawn_file_actions_destroy(&fa);
  if (capture) {
    ::close(pipefd[1]);
    c.out = pipefd[0];
  }
  return c;
}

// Exit status, or -1 for a signal or spawn failure.
inline int wait_exit(Child& c) {
  if (c.out >= 0) ::close(c.out);
  c.out = -1;
  if (c.pid < 0) return -1;
  int status = 0;
  while (::waitpid(c.pid, &status, 0) < 0) {
    if (errno != EINTR) return -1;
  }
  c.pid = -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

inline int run(const std::vector<std::string>& argv, const std::string& stderr_path = "") {
  auto c = spawn(argv, false, stderr_path);
  return wait_exit(c);
}

// Runs to completion and returns (exit status, stdout).
inline std::pair<int, std::string> run_capture(const std::vector<std::string>& argv,
                                               const std::string& stderr_path = "") {
  auto c = spawn(argv, true, stderr_path);
  std::string out;
  char buf[4096];
  for (;;) {
    ssize_t n = ::read(c.out, buf, sizeof buf);
    if (n <= 0) break;
    out.append(buf, static_cast<std::size_t>(n));
  }
  return {wait_exit(c), out};
}

// First line of the child's stdout, or "" after the timeout.
inline std::string read_line(Child& c, std::chrono::milliseconds timeout) {
  std::string line;
  auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    pollfd p{c.out, POLLIN, 0};
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (::poll(&p, 1, static_cast<int>(std::max<long>(1, left.count()))) <= 0) continue;
    char ch;
    if (::read(c.out, &ch, 1) != 1) break;
    if (ch == '\n') return line;
    line += ch;
  }
  return "";
}

inline int stop(Child& c, int sig = SIGTERM) {
  if (c.pid > 0) ::kill(c.pid, sig);
  return wait_exit(c);
}

}  // namespace dkpabe::testing
