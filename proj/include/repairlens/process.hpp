#pragma once

// External tool adapters: a shell command template with {input}, {output},
// {workdir} (and optionally {rule}, {self}) placeholders, run with a timeout.

#include <fcntl.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "repairlens/digest.hpp"
#include "repairlens/error.hpp"
#include "repairlens/io.hpp"

namespace repairlens {

namespace fs = std::filesystem;

struct ToolAdapter {
  std::string name;
  std::string command_template;
  double timeout_seconds = 600;
  std::vector<std::string> expected_artifacts;  // relative to the output dir
};

inline void validate_adapter(const ToolAdapter& a, const std::string& where) {
  if (a.command_template.find("{input}") == std::string::npos)
    throw Error(ErrorKind::ConfigError, where + ".command: template must contain {input}");
  if (!(a.timeout_seconds > 0)) throw Error(ErrorKind::ConfigError, where + ".timeout: must be > 0");
}

// Single-quoted for /bin/sh.
inline std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

inline std::string expand_template(std::string tmpl, const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    const std::string token = "{" + key + "}";
    const std::string quoted = shell_quote(value);
    for (auto pos = tmpl.find(token); pos != std::string::npos; pos = tmpl.find(token, pos + quoted.size()))
      tmpl.replace(pos, token.size(), quoted);
  }
  return tmpl;
}

inline std::string self_executable() {
  std::error_code ec;
  auto p = fs::read_symlink("/proc/self/exe", ec);
  return ec ? std::string{} : p.string();
}

struct ProcessResult {
  int exit_code = 0;
  bool timed_out = false;
  int signal = 0;
  std::string stdout_text;
  std::string stderr_text;
};

// Runs `/bin/sh -c command` in its own process group with stdout/stderr sent to
// the given files. On timeout the whole group is killed.
inline ProcessResult run_shell(const std::string& command, double timeout_seconds, const fs::path& stdout_path,
                               const fs::path& stderr_path, const fs::path& cwd = {}) {
  fs::create_directories(stdout_path.parent_path());
  const pid_t pid = fork();
  if (pid < 0) throw Error(ErrorKind::AdapterFailure, "fork failed");
  if (pid == 0) {
    setpgid(0, 0);
    int out = open(stdout_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    int err = open(stderr_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    int null_in = open("/dev/null", O_RDONLY);
    if (out < 0 || err < 0 || null_in < 0) _exit(127);
    dup2(null_in, STDIN_FILENO);
    dup2(out, STDOUT_FILENO);
    dup2(err, STDERR_FILENO);
    if (!cwd.empty() && chdir(cwd.c_str()) != 0) _exit(127);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);

  ProcessResult result;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_seconds);
  int status = 0;
  auto delay = std::chrono::milliseconds(1);
  while (true) {
    const pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw Error(ErrorKind::AdapterFailure, "waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      waitpid(pid, &status, 0);
      result.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(delay);
    delay = std::min(delay * 2, std::chrono::milliseconds(20));
  }
  if (!result.timed_out) {
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status)) {
      result.signal = WTERMSIG(status);
      result.exit_code = 128 + result.signal;
    }
  }
  result.stdout_text = io::read_file(stdout_path);
  result.stderr_text = io::read_file(stderr_path);
  return result;
}

struct ArtifactEntry {
  std::string path;  // relative to the output dir
  std::string sha256;
};

struct ArtifactManifest {
  std::string adapter;
  std::vector<ArtifactEntry> files;
  fs::path stdout_log;
  fs::path stderr_log;
};

struct InvocationExtras {
  std::map<std::string, std::string> placeholders;  // e.g. {"rule", "S1118"}
  fs::path log_dir;                                 // default: <output>/.logs
  std::string log_stem;                             // default: adapter name
};

// Runs the adapter once. Logs never land among the artifacts (hidden dir).
inline ArtifactManifest run_tool_adapter(const ToolAdapter& adapter, const fs::path& input_dir,
                                         const fs::path& output_dir, const InvocationExtras& extras = {}) {
  if (!fs::exists(input_dir)) throw Error(ErrorKind::AdapterFailure, "input " + input_dir.string() + " does not exist");
  fs::create_directories(output_dir);
  const fs::path workdir = fs::absolute(output_dir.parent_path());
  std::map<std::string, std::string> values{{"input", fs::absolute(input_dir).string()},
                                            {"output", fs::absolute(output_dir).string()},
                                            {"workdir", workdir.string()},
                                            {"self", self_executable()}};
  for (const auto& [k, v] : extras.placeholders) values[k] = v;
  const std::string command = expand_template(adapter.command_template, values);

  const fs::path log_dir = extras.log_dir.empty() ? output_dir / ".logs" : extras.log_dir;
  const std::string stem = extras.log_stem.empty() ? adapter.name : extras.log_stem;
  ArtifactManifest manifest;
  manifest.adapter = adapter.name;
  manifest.stdout_log = log_dir / (stem + ".stdout.log");
  manifest.stderr_log = log_dir / (stem + ".stderr.log");

  auto result = run_shell(command, adapter.timeout_seconds, manifest.stdout_log, manifest.stderr_log);
  if (result.timed_out)
    throw Error(ErrorKind::Timeout, adapter.name + " exceeded " + std::to_string(adapter.timeout_seconds) + " s");
  if (result.exit_code != 0)
    throw Error(ErrorKind::NonZeroExit, adapter.name + " exited with " + std::to_string(result.exit_code) +
                                            "; stderr: " + result.stderr_text);
  for (const auto& rel : adapter.expected_artifacts)
    if (!fs::exists(output_dir / rel)) throw Error(ErrorKind::MissingArtifact, adapter.name + " did not produce " + rel);
  for (const auto& rel : io::list_files(output_dir))
    manifest.files.push_back({rel, sha256_hex(io::read_file(output_dir / rel))});
  return manifest;
}

}  // namespace repairlens
