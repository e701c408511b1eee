#include "gramfuzz/harness.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/mman.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <thread>

namespace gramfuzz {

using Clock = std::chrono::steady_clock;

namespace {

constexpr std::size_t kCrashTokenCap = 256;

std::chrono::microseconds since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - t0);
}

bool write_all(int fd, const void* buf, std::size_t n) {
  const char* p = static_cast<const char*>(buf);
  while (n > 0) {
    ssize_t w = ::write(fd, p, n);
    if (w < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    p += w;
    n -= static_cast<std::size_t>(w);
  }
  return true;
}

bool read_all(int fd, void* buf, std::size_t n) {
  char* p = static_cast<char*>(buf);
  while (n > 0) {
    ssize_t r = ::read(fd, p, n);
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    if (r == 0) return false;
    p += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

}  // namespace

struct Executor::Shared {
  std::uint8_t map[kMapSize];
  std::uint32_t input_len;
  std::uint32_t crash_len;
  char crash_token[kCrashTokenCap];
  char input[kMaxInputSize];
};

CoverageSink::CoverageSink(std::uint8_t* cells, Mode mode) : cells_(cells), mode_(mode) {}

void CoverageSink::crash(std::string_view token) {
  if (mode_ == Mode::direct) throw TargetCrash{std::string(token)};
  if (crash_buf_ && crash_len_) {
    std::size_t n = std::min(token.size(), crash_cap_);
    std::memcpy(crash_buf_, token.data(), n);
    *crash_len_ = static_cast<std::uint32_t>(n);
  }
  std::abort();
}

void CoverageSink::check_deadline() {
  if (Clock::now() >= *deadline_) throw TargetHang{};
}

const char* to_string(ExecStatus s) {
  switch (s) {
    case ExecStatus::ok: return "ok";
    case ExecStatus::crash: return "crash";
    case ExecStatus::hang: return "hang";
  }
  return "?";
}

std::vector<std::string> split_command(std::string_view cmd) {
  std::vector<std::string> out;
  std::string cur;
  bool in_word = false;
  char quote = 0;
  for (std::size_t i = 0; i < cmd.size(); ++i) {
    char c = cmd[i];
    if (quote) {
      if (c == quote) {
        quote = 0;
      } else if (c == '\\' && quote == '"' && i + 1 < cmd.size()) {
        cur += cmd[++i];
      } else {
        cur += c;
      }
      continue;
    }
    if (c == '"' || c == '\'') {
      quote = c;
      in_word = true;
    } else if (c == '\\' && i + 1 < cmd.size()) {
      cur += cmd[++i];
      in_word = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (in_word) out.push_back(std::move(cur));
      cur.clear();
      in_word = false;
    } else {
      cur += c;
      in_word = true;
    }
  }
  if (quote) throw ExecError("unterminated quote in command");
  if (in_word) out.push_back(std::move(cur));
  return out;
}

namespace {

bool resolvable(const std::string& prog) {
  if (prog.find('/') != std::string::npos) return ::access(prog.c_str(), X_OK) == 0;
  const char* path = std::getenv("PATH");
  if (!path) return false;
  std::string_view rest(path);
  while (true) {
    std::size_t colon = rest.find(':');
    std::string dir(rest.substr(0, colon));
    if (dir.empty()) dir = ".";
    if (::access((dir + "/" + prog).c_str(), X_OK) == 0) return true;
    if (colon == std::string_view::npos) return false;
    rest.remove_prefix(colon + 1);
  }
}

}  // namespace

Executor::Executor(TargetSpec spec) : spec_(std::move(spec)) {
  if (spec_.timeout.count() <= 0) throw ExecError("timeout must be positive");
  if (spec_.kind == TargetSpec::Kind::external_command) {
    if (spec_.command.empty()) throw ExecError("external target has an empty command");
    if (!resolvable(spec_.command[0]))
      throw ExecError("target not found: " + spec_.command[0]);
    char tmpl[] = "/tmp/gramfuzz-XXXXXX";
    if (!::mkdtemp(tmpl)) throw ExecError("cannot create scratch directory");
    scratch_ = tmpl;
    return;
  }
  if (!spec_.function) throw ExecError("target not found: " + spec_.name);
  if (spec_.isolation == Isolation::direct) {
    local_map_.assign(kMapSize, 0);
    return;
  }
  void* mem = ::mmap(nullptr, sizeof(Shared), PROT_READ | PROT_WRITE,
                     MAP_SHARED | MAP_ANONYMOUS, -1, 0);
  if (mem == MAP_FAILED) throw ExecError("mmap failed");
  shared_ = static_cast<Shared*>(mem);
  start_server();
}

Executor::~Executor() {
  stop_server();
  if (shared_) ::munmap(shared_, sizeof(Shared));
  if (!scratch_.empty()) {
    std::error_code ec;
    std::filesystem::remove_all(scratch_, ec);
  }
}

// Handlers installed by the host (test frameworks, sanitizers) must not
// intercept a target's deliberate abort.
namespace {
void reset_fault_signals() {
  for (int sig : {SIGABRT, SIGSEGV, SIGBUS, SIGFPE, SIGILL, SIGTRAP}) ::signal(sig, SIG_DFL);
}
}  // namespace

// The server sits in a loop: one control word in, fork a child that runs the
// target on the shared input, report the child's pid then its wait status.
void Executor::start_server() {
  int ctl[2], st[2];
  if (::pipe(ctl) != 0) throw ExecError("pipe failed");
  if (::pipe(st) != 0) {
    ::close(ctl[0]);
    ::close(ctl[1]);
    throw ExecError("pipe failed");
  }
  pid_t pid = ::fork();
  if (pid < 0) throw ExecError("fork failed");
  if (pid == 0) {
    ::close(ctl[1]);
    ::close(st[0]);
    struct rlimit no_core = {0, 0};
    ::setrlimit(RLIMIT_CORE, &no_core);
    ::signal(SIGPIPE, SIG_DFL);
    reset_fault_signals();
    std::uint32_t cmd;
    while (read_all(ctl[0], &cmd, sizeof cmd)) {
      pid_t child = ::fork();
      if (child < 0) ::_exit(1);
      if (child == 0) {
        ::close(ctl[0]);
        ::close(st[1]);
        CoverageSink sink(shared_->map, CoverageSink::Mode::forked);
        sink.set_crash_buffer(shared_->crash_token, &shared_->crash_len, kCrashTokenCap);
        try {
          spec_.function(ByteView(shared_->input, shared_->input_len), sink);
        } catch (...) {
          sink.crash("uncaught-exception");
        }
        ::_exit(0);
      }
      std::int32_t cpid = child;
      if (!write_all(st[1], &cpid, sizeof cpid)) ::_exit(0);
      int status = 0;
      while (::waitpid(child, &status, 0) < 0 && errno == EINTR) {
      }
      std::int32_t s = status;
      if (!write_all(st[1], &s, sizeof s)) ::_exit(0);
    }
    ::_exit(0);
  }
  ::close(ctl[0]);
  ::close(st[1]);
  ctl_fd_ = ctl[1];
  status_fd_ = st[0];
  server_pid_ = pid;
}

void Executor::stop_server() {
  if (server_pid_ <= 0) return;
  ::close(ctl_fd_);
  ::close(status_fd_);
  ::kill(server_pid_, SIGKILL);
  while (::waitpid(server_pid_, nullptr, 0) < 0 && errno == EINTR) {
  }
  server_pid_ = -1;
  ctl_fd_ = status_fd_ = -1;
}

const std::uint8_t* Executor::cells() const {
  return shared_ ? shared_->map : local_map_.data();
}

Executor::Raw Executor::run_direct(ByteView input) {
  std::memset(local_map_.data(), 0, kMapSize);
  CoverageSink sink(local_map_.data(), CoverageSink::Mode::direct);
  auto t0 = Clock::now();
  sink.set_deadline(t0 + spec_.timeout);
  Raw r{ExecStatus::ok, {}, std::nullopt};
  try {
    spec_.function(input, sink);
  } catch (const TargetCrash& c) {
    r.status = ExecStatus::crash;
    r.token = c.token;
  } catch (const TargetHang&) {
    r.status = ExecStatus::hang;
  } catch (...) {
    r.status = ExecStatus::crash;
    r.token = "uncaught-exception";
  }
  r.elapsed = since(t0);
  if (r.status == ExecStatus::hang && r.elapsed < spec_.timeout) r.elapsed = spec_.timeout;
  return r;
}

Executor::Raw Executor::run_forked(ByteView input) {
  for (int attempt = 0;; ++attempt) {
    std::memset(shared_->map, 0, kMapSize);
    shared_->crash_len = 0;
    shared_->input_len = static_cast<std::uint32_t>(input.size());
    std::memcpy(shared_->input, input.data(), input.size());
    auto t0 = Clock::now();
    std::uint32_t cmd = 1;
    std::int32_t child = 0;
    if (!write_all(ctl_fd_, &cmd, sizeof cmd) || !read_all(status_fd_, &child, sizeof child)) {
      stop_server();
      if (attempt > 0) throw ExecError("fork server died");
      start_server();
      continue;
    }
    bool timed_out = false;
    pollfd pfd{status_fd_, POLLIN, 0};
    while (true) {
      auto left = spec_.timeout - std::chrono::duration_cast<std::chrono::milliseconds>(
                                      Clock::now() - t0);
      int ms = static_cast<int>(std::max<std::int64_t>(left.count(), 0));
      int rc = ::poll(&pfd, 1, ms);
      if (rc < 0 && errno == EINTR) continue;
      if (rc == 0) {
        ::kill(child, SIGKILL);
        timed_out = true;
      }
      break;
    }
    std::int32_t status = 0;
    if (!read_all(status_fd_, &status, sizeof status)) {
      stop_server();
      if (attempt > 0) throw ExecError("fork server died");
      start_server();
      continue;
    }
    Raw r{ExecStatus::ok, since(t0), std::nullopt};
    if (timed_out) {
      r.status = ExecStatus::hang;
      if (r.elapsed < spec_.timeout) r.elapsed = spec_.timeout;
    } else if (WIFSIGNALED(status)) {
      r.status = ExecStatus::crash;
      if (shared_->crash_len > 0)
        r.token = std::string(shared_->crash_token,
                              std::min<std::size_t>(shared_->crash_len, kCrashTokenCap));
    }
    return r;
  }
}

Executor::Raw Executor::run_external(ByteView input) {
  auto input_path = scratch_ / "input";
  auto cov_path = scratch_ / "coverage";
  {
    std::ofstream f(input_path, std::ios::binary | std::ios::trunc);
    f.write(input.data(), static_cast<std::streamsize>(input.size()));
    if (!f) throw ExecError("cannot write input file");
  }
  std::filesystem::remove(cov_path);

  bool uses_file = false;
  std::vector<std::string> argv;
  for (const auto& a : spec_.command) {
    std::string s = a;
    for (std::size_t p; (p = s.find("@@")) != std::string::npos;) {
      s.replace(p, 2, input_path.string());
      uses_file = true;
    }
    argv.push_back(std::move(s));
  }
  std::vector<char*> cargv;
  for (auto& a : argv) cargv.push_back(a.data());
  cargv.push_back(nullptr);
  std::string cov_str = cov_path.string();
  std::string in_str = input_path.string();

  auto t0 = Clock::now();
  pid_t pid = ::fork();
  if (pid < 0) throw ExecError("fork failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    struct rlimit no_core = {0, 0};
    ::setrlimit(RLIMIT_CORE, &no_core);
    ::setenv(kCoverageFileEnv, cov_str.c_str(), 1);
    int devnull = ::open("/dev/null", O_RDWR);
    int in = uses_file ? devnull : ::open(in_str.c_str(), O_RDONLY);
    ::dup2(in, 0);
    ::dup2(devnull, 1);
    ::dup2(devnull, 2);
    ::execvp(cargv[0], cargv.data());
    ::_exit(127);
  }
  int status = 0;
  bool timed_out = false;
  auto nap = std::chrono::microseconds(20);
  while (true) {
    pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) throw ExecError("waitpid failed");
    if (Clock::now() - t0 >= spec_.timeout) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
      }
      timed_out = true;
      break;
    }
    std::this_thread::sleep_for(nap);
    nap = std::min(nap * 2, std::chrono::microseconds(2000));
  }
  Raw r{ExecStatus::ok, since(t0), std::nullopt};
  if (timed_out) {
    r.status = ExecStatus::hang;
    if (r.elapsed < spec_.timeout) r.elapsed = spec_.timeout;
  } else if (WIFSIGNALED(status)) {
    r.status = ExecStatus::crash;
    r.token = std::string("signal-") + std::to_string(WTERMSIG(status));
  }

  if (local_map_.size() != kMapSize) local_map_.assign(kMapSize, 0);
  std::memset(local_map_.data(), 0, kMapSize);
  std::ifstream f(cov_path, std::ios::binary);
  bool good = false;
  if (f) {
    f.read(reinterpret_cast<char*>(local_map_.data()), kMapSize);
    good = f.gcount() == static_cast<std::streamsize>(kMapSize) && f.peek() == EOF;
  }
  if (!good) {
    std::memset(local_map_.data(), 0, kMapSize);
    if (r.status == ExecStatus::ok)
      throw ExecError(f ? "coverage file corrupt (expected 65536 bytes)"
                        : "coverage file missing");
  }
  return r;
}

Executor::Raw Executor::run_raw(ByteView input) {
  if (input.size() > kMaxInputSize) input = input.substr(0, kMaxInputSize);
  if (spec_.kind == TargetSpec::Kind::external_command) return run_external(input);
  if (spec_.isolation == Isolation::direct) return run_direct(input);
  return run_forked(input);
}

ExecResult Executor::run(ByteView input) {
  Raw r = run_raw(input);
  ExecResult out;
  out.status = r.status;
  out.exec_time = r.elapsed;
  out.crash_token = std::move(r.token);
  std::memcpy(out.map.data(), cells(), kMapSize);
  return out;
}

CompactResult Executor::run_compact(ByteView input) {
  Raw r = run_raw(input);
  CompactResult out;
  out.status = r.status;
  out.exec_time = r.elapsed;
  out.crash_token = std::move(r.token);
  out.cells = compact(cells());
  out.signature = signature(out.cells);
  return out;
}

ExecResult execute(const TargetSpec& t, ByteView input) {
  Executor ex(t);
  return ex.run(input);
}

}  // namespace gramfuzz
