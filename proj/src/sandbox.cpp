#include "ifim/sandbox.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <thread>

#include "ifim/error.hpp"
#include "ifim/jsonl.hpp"

namespace ifim::sandbox {

TempDir::TempDir(const std::string& stem) {
  auto pattern = (std::filesystem::temp_directory_path() / (stem + "-XXXXXX")).string();
  if (::mkdtemp(pattern.data()) == nullptr)
    throw Error(std::string("mkdtemp failed: ") + std::strerror(errno));
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

RunOutcome run_process(const std::vector<std::string>& argv, const std::filesystem::path& workdir,
                       std::chrono::milliseconds timeout) {
  RunOutcome out;
  if (argv.empty()) return out;

  // Everything the child touches is prepared before fork().
  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);
  const std::string dir = workdir.string();
  const std::string err_path = (workdir / ".stderr").string();
  const auto cpu_limit = static_cast<rlim_t>(timeout.count() / 1000 + 2);

  int report[2];
  if (::pipe2(report, O_CLOEXEC) != 0) return out;

  const auto start = std::chrono::steady_clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(report[0]);
    ::close(report[1]);
    return out;
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::close(report[0]);
    const int devnull = ::open("/dev/null", O_RDWR);
    const int errfd = ::open(err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    if (devnull >= 0) {
      ::dup2(devnull, STDIN_FILENO);
      ::dup2(devnull, STDOUT_FILENO);
    }
    if (errfd >= 0) ::dup2(errfd, STDERR_FILENO);
    rlimit cpu{cpu_limit, cpu_limit};
    ::setrlimit(RLIMIT_CPU, &cpu);
    if (::chdir(dir.c_str()) == 0) ::execvp(cargv[0], cargv.data());
    const int e = errno;
    [[maybe_unused]] auto n = ::write(report[1], &e, sizeof e);
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(report[1]);

  int status = 0;
  bool finished = false;
  while (true) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) {
      finished = true;
      break;
    }
    if (r < 0 && errno != EINTR) break;
    if (std::chrono::steady_clock::now() - start >= timeout) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (!finished) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    out.kind = ExitKind::timed_out;
  } else {
    // Reap anything the candidate left running in its group.
    ::kill(-pid, SIGKILL);
  }
  out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  int exec_errno = 0;
  const bool exec_failed = ::read(report[0], &exec_errno, sizeof exec_errno) == sizeof exec_errno;
  ::close(report[0]);

  if (exec_failed) {
    out.kind = ExitKind::launch_failed;
    out.stderr_text = std::string("exec failed: ") + std::strerror(exec_errno);
    return out;
  }
  if (finished) {
    if (WIFEXITED(status)) {
      out.kind = ExitKind::exited;
      out.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
      out.kind = ExitKind::signaled;
      out.signal = WTERMSIG(status);
    }
  }
  try {
    auto err = jsonl::read_file(err_path);
    if (err.size() > 4096) err.erase(0, err.size() - 4096);
    out.stderr_text = std::move(err);
  } catch (const Error&) {
  }
  return out;
}

}  // namespace ifim::sandbox
