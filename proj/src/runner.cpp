/*
 * Copyright 2026 The fairpareto Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fairpareto/runner.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <thread>

#include "fairpareto/fairmetrics.hpp"
#include "fairpareto/worker_protocol.hpp"

extern char** environ;

namespace fairpareto {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

class UniqueFd {
 public:
  UniqueFd() = default;
  explicit UniqueFd(int fd) : fd_(fd) {}
  UniqueFd(UniqueFd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  UniqueFd& operator=(UniqueFd&& o) noexcept {
    reset(std::exchange(o.fd_, -1));
    return *this;
  }
  UniqueFd(const UniqueFd&) = delete;
  UniqueFd& operator=(const UniqueFd&) = delete;
  ~UniqueFd() { reset(); }

  int get() const { return fd_; }
  void reset(int fd = -1) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = fd;
  }

 private:
  int fd_ = -1;
};

/// Owns a spawned child; kills and reaps it on destruction if still running.
class ChildProcess {
 public:
  explicit ChildProcess(pid_t pid) : pid_(pid) {}
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;
  ~ChildProcess() { kill(); }

  void kill() {
    if (pid_ <= 0) return;
    ::kill(pid_, SIGKILL);
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
    pid_ = -1;
  }

  /// Waits up to `grace` for a normal exit, then kills. Returns the exit
  /// status when the child exited by itself.
  std::optional<int> reap(std::chrono::milliseconds grace) {
    const auto deadline = Clock::now() + grace;
    while (pid_ > 0) {
      int status = 0;
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_) {
        pid_ = -1;
        return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
      }
      if (r < 0 && errno != EINTR) {
        pid_ = -1;
        return std::nullopt;
      }
      if (Clock::now() > deadline) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    kill();
    return std::nullopt;
  }

 private:
  pid_t pid_ = -1;
};

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

ObjectiveVector zdt1_mf(std::span<const double> x, double fidelity_fraction) {
  if (x.size() < 2) throw ConfigError(fmt::format("zdt1 needs n >= 2, got {}", x.size()));
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(fmt::format("zdt1 input {} outside [0,1]", v));
  }
  if (!(fidelity_fraction > 0.0 && fidelity_fraction <= 1.0)) {
    throw ConfigError(fmt::format("fidelity fraction {} outside (0,1]", fidelity_fraction));
  }
  double tail = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) tail += x[i];
  const double g = 1.0 + 9.0 * tail / static_cast<double>(x.size() - 1);
  const double bias = 0.5 * (1.0 - fidelity_fraction);
  return {{"f1", x[0] + bias}, {"f2", g * (1.0 - std::sqrt(x[0] / g)) + bias}};
}

std::vector<double> builtin_point(const SearchSpace& space, const Configuration& config,
                                  std::size_t n) {
  const auto enc = encode(space, config);
  if (enc.size() < n) {
    throw ConfigError(fmt::format("space '{}' encodes to {} values, fewer than the {} inputs needed",
                                  space.name(), enc.size(), n));
  }
  std::vector<double> sum(n, 0.0);
  std::vector<double> count(n, 0.0);
  for (std::size_t j = 0; j < enc.size(); ++j) {
    sum[j % n] += enc[j];
    count[j % n] += 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) sum[i] = std::clamp(sum[i] / count[i], 0.0, 1.0);
  return sum;
}

EvaluationResult EvaluationResult::failed(std::string why, double wall_time_s) {
  EvaluationResult r;
  r.ok = false;
  r.failure = std::move(why);
  r.wall_time_s = wall_time_s;
  return r;
}

BuiltinBackend::BuiltinBackend(SearchSpace space, int max_fidelity, std::size_t dims)
    : space_(std::move(space)), max_fidelity_(max_fidelity), dims_(dims) {
  if (max_fidelity_ <= 0) throw ConfigError("builtin backend needs a positive max fidelity");
  if (dims_ < 2) throw ConfigError("zdt1 needs at least two inputs");
  if (space_.encoded_width() < dims_) {
    throw ConfigError(fmt::format("space '{}' encodes to {} values, fewer than {}", space_.name(),
                                  space_.encoded_width(), dims_));
  }
}

EvaluationResult BuiltinBackend::evaluate(const EvaluationRequest& request, std::stop_token stop) {
  if (stop.stop_requested()) return EvaluationResult::failed("cancelled");
  try {
    const auto x = builtin_point(space_, request.config, dims_);
    const double s = static_cast<double>(request.fidelity) / static_cast<double>(max_fidelity_);
    EvaluationResult r;
    r.ok = true;
    for (const auto& [k, v] : zdt1_mf(x, s)) r.objectives[k] = v;
    return r;
  } catch (const Error& e) {
    return EvaluationResult::failed(e.what());
  }
}

std::string BuiltinBackend::describe() const {
  return fmt::format("builtin:zdt1 (n={}, space {})", dims_, space_.name());
}

WorkerBackend::WorkerBackend(std::string command, std::chrono::milliseconds timeout,
                             std::vector<std::string> objectives)
    : command_(std::move(command)), timeout_(timeout), objectives_(std::move(objectives)) {
  if (command_.empty()) throw ConfigError("worker command must not be empty");
}

EvaluationResult WorkerBackend::evaluate(const EvaluationRequest& request, std::stop_token stop) {
  ignore_sigpipe_once();
  const auto start = Clock::now();
  auto fail = [&](std::string why) { return EvaluationResult::failed(std::move(why), seconds_since(start)); };

  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) return fail(fmt::format("pipe: {}", std::strerror(errno)));
  UniqueFd child_in(to_child[0]);
  UniqueFd parent_out(to_child[1]);
  if (::pipe2(from_child, O_CLOEXEC) != 0) return fail(fmt::format("pipe: {}", std::strerror(errno)));
  UniqueFd parent_in(from_child[0]);
  UniqueFd child_out(from_child[1]);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, child_in.get(), STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, child_out.get(), STDOUT_FILENO);
  std::string shell = "/bin/sh";
  std::string flag = "-c";
  std::string cmd = command_;
  char* argv[] = {shell.data(), flag.data(), cmd.data(), nullptr};
  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, shell.c_str(), &actions, nullptr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) return fail(fmt::format("cannot spawn worker: {}", std::strerror(rc)));
  ChildProcess child(pid);
  child_in.reset();
  child_out.reset();

  WorkerMessage start_msg = start_message(request.trial_id, request.config, request.fidelity, request.seed);
  start_msg.resume_from = request.resume_from;
  if (!write_all(parent_out.get(), encode_message(start_msg) + "\n")) {
    return fail("worker closed its input before the start message was sent");
  }
  parent_out.reset();

  EvaluationResult result;
  std::optional<int> last_progress;
  std::string buffer;
  const auto deadline = start + timeout_;
  char chunk[4096];
  bool eof = false;

  // Returns a failure message, or nullopt to keep reading. Sets result.ok on final.
  auto handle_line = [&](const std::string& line) -> std::optional<std::string> {
    WorkerMessage m;
    try {
      m = decode_message(line);
    } catch (const ProtocolError& e) {
      return fmt::format("malformed worker message ({}): '{}'", e.what(), line);
    }
    if (m.trial_id != request.trial_id) {
      return fmt::format("worker message for trial '{}' while running '{}': '{}'", m.trial_id,
                         request.trial_id, line);
    }
    switch (m.type) {
      case MessageType::start:
        return fmt::format("unexpected start message from worker: '{}'", line);
      case MessageType::progress:
        if (last_progress && *m.fidelity <= *last_progress) {
          return fmt::format("progress fidelity {} not above previous {}: '{}'", *m.fidelity,
                             *last_progress, line);
        }
        last_progress = m.fidelity;
        result.progress.push_back({*m.fidelity, *m.objectives});
        log().debug("{} progress at {}", request.trial_id, *m.fidelity);
        return std::nullopt;
      case MessageType::final:
        if (*m.fidelity != request.fidelity) {
          return fmt::format("final fidelity {} differs from requested {}: '{}'", *m.fidelity,
                             request.fidelity, line);
        }
        result.ok = true;
        result.objectives = *m.objectives;
        result.resumable = m.resumable.value_or(false);
        return std::nullopt;
      case MessageType::fail:
        return fmt::format("worker failed: {}", *m.message);
    }
    return std::nullopt;
  };

  while (!result.ok && !eof) {
    if (stop.stop_requested()) return fail("cancelled");
    if (Clock::now() > deadline) {
      return fail(fmt::format("timeout after {} ms", timeout_.count()));
    }
    pollfd pfd{parent_in.get(), POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 50);
    if (ready < 0) {
      if (errno == EINTR) continue;
      return fail(fmt::format("poll: {}", std::strerror(errno)));
    }
    if (ready == 0) continue;
    const ssize_t n = ::read(parent_in.get(), chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      return fail(fmt::format("read: {}", std::strerror(errno)));
    }
    if (n == 0) {
      eof = true;
    } else {
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
    std::size_t nl;
    while (!result.ok && (nl = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (auto err = handle_line(line)) return fail(*err);
    }
    if (eof && !result.ok && !buffer.empty()) {
      if (auto err = handle_line(buffer)) return fail(*err);
    }
  }
  if (!result.ok) {
    const auto status = child.reap(std::chrono::milliseconds(1000));
    return fail(fmt::format("worker exited without a final message (exit status {})",
                            status ? std::to_string(*status) : std::string("unknown")));
  }
  child.reap(std::chrono::milliseconds(2000));
  result.wall_time_s = seconds_since(start);
  return result;
}

EmbeddingsBackend::EmbeddingsBackend(std::string path_template) : template_(std::move(path_template)) {
  if (template_.empty()) throw ConfigError("embeddings backend needs a path template");
}

std::string EmbeddingsBackend::resolve(const EvaluationRequest& request) const {
  std::string path = template_;
  replace_all(path, "{trial_id}", request.trial_id);
  replace_all(path, "{fidelity}", std::to_string(request.fidelity));
  replace_all(path, "{seed}", std::to_string(request.seed));
  replace_all(path, "{config_key}", config_key(request.config));
  return path;
}

EvaluationResult EmbeddingsBackend::evaluate(const EvaluationRequest& request, std::stop_token stop) {
  const auto start = Clock::now();
  if (stop.stop_requested()) return EvaluationResult::failed("cancelled");
  const std::string path = resolve(request);
  if (!std::filesystem::exists(path)) {
    return EvaluationResult::failed(fmt::format("missing embedding file '{}'", path));
  }
  try {
    const auto report = compute_ranks(load_embeddings(path));
    const auto fairness = report.group_order.size() == 2
                              ? fairness_metric(report, FairnessMetric::rank_disparity,
                                                report.group_order[0], report.group_order[1])
                              : multi_group_metric(report, FairnessMetric::rank_disparity,
                                                   report.group_order);
    EvaluationResult r;
    r.ok = true;
    r.objectives["error"] = report.overall_error();
    r.objectives["rank_disparity"] = fairness.value;
    r.wall_time_s = seconds_since(start);
    return r;
  } catch (const Error& e) {
    return EvaluationResult::failed(fmt::format("{}: {}", path, e.what()), seconds_since(start));
  }
}

std::unique_ptr<ObjectiveBackend> make_backend(const std::string& spec, const SearchSpace& space,
                                               const BackendOptions& options) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string{} : spec.substr(colon + 1);
  if (kind == "builtin") {
    if (arg != "zdt1") throw ConfigError(fmt::format("unknown builtin backend '{}'", arg));
    return std::make_unique<BuiltinBackend>(space, options.max_fidelity, options.zdt_dims);
  }
  if (kind == "worker") {
    std::string cmd = arg;
    if (cmd.size() >= 2 && cmd.front() == '"' && cmd.back() == '"') cmd = cmd.substr(1, cmd.size() - 2);
    return std::make_unique<WorkerBackend>(cmd, options.timeout);
  }
  if (kind == "embeddings") return std::make_unique<EmbeddingsBackend>(arg);
  throw ConfigError(fmt::format("unknown backend '{}' (expected builtin:, worker: or embeddings:)", spec));
}

}  // namespace fairpareto
