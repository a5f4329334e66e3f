#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace ifim::sandbox {

/// Scratch directory removed (recursively) on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& stem = "ifim");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

enum class ExitKind { exited, signaled, timed_out, launch_failed };

struct RunOutcome {
  ExitKind kind = ExitKind::launch_failed;
  int exit_code = -1;
  int signal = 0;
  double wall_ms = 0.0;
  std::string stderr_text;  ///< at most the last 4 KiB
};

/// Runs argv in its own process group inside `workdir`, stdin and stdout
/// bound to /dev/null, stderr captured. The whole group is killed once
/// `timeout` elapses.
RunOutcome run_process(const std::vector<std::string>& argv, const std::filesystem::path& workdir,
                       std::chrono::milliseconds timeout);

}  // namespace ifim::sandbox
