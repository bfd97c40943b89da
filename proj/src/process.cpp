#include "mcpscan/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <mutex>
#include <thread>
#include <utility>

extern char** environ;

namespace mcpscan {

namespace {

void ignore_sigpipe_once() {
    static std::once_flag flag;
    std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::vector<std::string> merged_environment(const std::map<std::string, std::string>& overrides) {
    std::vector<std::string> env;
    for (char** e = environ; *e != nullptr; ++e) {
        std::string_view entry(*e);
        auto eq = entry.find('=');
        std::string key(entry.substr(0, eq == std::string_view::npos ? entry.size() : eq));
        if (overrides.count(key) == 0) env.emplace_back(entry);
    }
    for (const auto& [k, v] : overrides) env.push_back(k + "=" + v);
    return env;
}

struct Pipe {
    int fds[2] = {-1, -1};
    Pipe() {
        if (::pipe(fds) != 0) throw LaunchError("pipe() failed: " + std::string(strerror(errno)));
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    void close_read() {
        if (fds[0] >= 0) ::close(fds[0]);
        fds[0] = -1;
    }
    void close_write() {
        if (fds[1] >= 0) ::close(fds[1]);
        fds[1] = -1;
    }
    int take_read() { int fd = fds[0]; fds[0] = -1; return fd; }
    int take_write() { int fd = fds[1]; fds[1] = -1; return fd; }
};

}  // namespace

ChildProcess ChildProcess::spawn(const SpawnOptions& options) {
    ignore_sigpipe_once();

    Pipe to_child;    // parent writes -> child stdin
    Pipe from_child;  // child stdout -> parent reads
    Pipe err_child;   // child stderr -> parent reads

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, to_child.fds[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, from_child.fds[1], STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, err_child.fds[1], STDERR_FILENO);
    posix_spawn_file_actions_addclose(&actions, to_child.fds[1]);
    posix_spawn_file_actions_addclose(&actions, from_child.fds[0]);
    posix_spawn_file_actions_addclose(&actions, err_child.fds[0]);

    std::vector<std::string> argv_store;
    argv_store.push_back(options.command);
    for (const auto& a : options.args) argv_store.push_back(a);
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    argv.push_back(nullptr);

    std::vector<std::string> env_store = merged_environment(options.env_overrides);
    std::vector<char*> envp;
    for (auto& s : env_store) envp.push_back(s.data());
    envp.push_back(nullptr);

    pid_t pid = -1;
    int rc = ::posix_spawnp(&pid, options.command.c_str(), &actions, nullptr, argv.data(),
                            envp.data());
    posix_spawn_file_actions_destroy(&actions);

    if (rc != 0) {
        throw LaunchError("failed to launch \"" + options.command +
                          "\": " + std::string(strerror(rc)));
    }

    ChildProcess child;
    child.pid_ = pid;
    child.stdin_fd_ = to_child.take_write();
    child.stdout_fd_ = from_child.take_read();
    child.stderr_fd_ = err_child.take_read();
    ::fcntl(child.stdout_fd_, F_SETFL, O_NONBLOCK);
    ::fcntl(child.stderr_fd_, F_SETFL, O_NONBLOCK);
    return child;
}

ChildProcess::ChildProcess(ChildProcess&& other) noexcept {
    *this = std::move(other);
}

ChildProcess& ChildProcess::operator=(ChildProcess&& other) noexcept {
    if (this != &other) {
        if (pid_ >= 0) terminate(std::chrono::milliseconds(0));
        pid_ = other.pid_;
        stdin_fd_ = other.stdin_fd_;
        stdout_fd_ = other.stdout_fd_;
        stderr_fd_ = other.stderr_fd_;
        read_buf_ = std::move(other.read_buf_);
        stderr_buf_ = std::move(other.stderr_buf_);
        reaped_ = other.reaped_;
        termination_ = other.termination_;
        other.pid_ = -1;
        other.stdin_fd_ = other.stdout_fd_ = other.stderr_fd_ = -1;
        other.reaped_ = true;
    }
    return *this;
}

ChildProcess::~ChildProcess() {
    if (pid_ >= 0 && !reaped_) terminate(std::chrono::milliseconds(100));
    if (stdin_fd_ >= 0) ::close(stdin_fd_);
    if (stdout_fd_ >= 0) ::close(stdout_fd_);
    if (stderr_fd_ >= 0) ::close(stderr_fd_);
}

void ChildProcess::drain_stderr_nonblocking() {
    if (stderr_fd_ < 0) return;
    char buf[4096];
    for (;;) {
        ssize_t n = ::read(stderr_fd_, buf, sizeof(buf));
        if (n > 0) {
            stderr_buf_.append(buf, static_cast<std::size_t>(n));
        } else {
            if (n == 0) {
                ::close(stderr_fd_);
                stderr_fd_ = -1;
            }
            break;
        }
    }
}

ChildProcess::ReadStatus ChildProcess::read_line(std::string& out,
                                                 std::chrono::steady_clock::time_point deadline) {
    for (;;) {
        auto nl = read_buf_.find('\n');
        if (nl != std::string::npos) {
            out = read_buf_.substr(0, nl);
            read_buf_.erase(0, nl + 1);
            if (!out.empty() && out.back() == '\r') out.pop_back();
            return ReadStatus::Line;
        }

        auto now = std::chrono::steady_clock::now();
        if (now >= deadline) return ReadStatus::Timeout;
        auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
        int timeout = static_cast<int>(std::min<std::int64_t>(wait_ms.count(), 200));

        struct pollfd fds[2];
        fds[0] = {stdout_fd_, POLLIN, 0};
        fds[1] = {stderr_fd_, POLLIN, 0};
        nfds_t nfds = stderr_fd_ >= 0 ? 2 : 1;
        int rc = ::poll(fds, nfds, timeout);
        if (rc < 0) {
            if (errno == EINTR) continue;
            throw SessionError("poll on child stdio failed: " + std::string(strerror(errno)));
        }
        drain_stderr_nonblocking();

        if (fds[0].revents & (POLLIN | POLLHUP)) {
            char buf[4096];
            ssize_t n = ::read(stdout_fd_, buf, sizeof(buf));
            if (n > 0) {
                read_buf_.append(buf, static_cast<std::size_t>(n));
            } else if (n == 0) {
                if (read_buf_.empty()) return ReadStatus::Eof;
                // Trailing data without a newline: surface it as a final line.
                out = std::exchange(read_buf_, {});
                return ReadStatus::Line;
            } else if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
                throw SessionError("read from child stdout failed: " +
                                   std::string(strerror(errno)));
            }
        }
    }
}

void ChildProcess::write_line(std::string_view line) {
    if (stdin_fd_ < 0) throw SessionError("child stdin is closed");
    std::string framed(line);
    framed.push_back('\n');
    std::size_t written = 0;
    while (written < framed.size()) {
        ssize_t n = ::write(stdin_fd_, framed.data() + written, framed.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw SessionError("write to child stdin failed: " + std::string(strerror(errno)));
        }
        written += static_cast<std::size_t>(n);
    }
}

void ChildProcess::close_stdin() {
    if (stdin_fd_ >= 0) {
        ::close(stdin_fd_);
        stdin_fd_ = -1;
    }
}

bool ChildProcess::running() {
    if (pid_ < 0 || reaped_) return false;
    int status = 0;
    pid_t rc = ::waitpid(pid_, &status, WNOHANG);
    if (rc == pid_) {
        reaped_ = true;
        termination_.exited = WIFEXITED(status);
        termination_.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        termination_.term_signal = WIFSIGNALED(status) ? WTERMSIG(status) : 0;
        return false;
    }
    return rc == 0;
}

ChildProcess::Termination ChildProcess::terminate(std::chrono::milliseconds grace) {
    if (reaped_) return termination_;
    close_stdin();
    drain_stderr_nonblocking();

    auto deadline = std::chrono::steady_clock::now() + grace;
    bool sent_term = false;
    for (;;) {
        int status = 0;
        pid_t rc = ::waitpid(pid_, &status, WNOHANG);
        if (rc == pid_) {
            reaped_ = true;
            termination_.exited = WIFEXITED(status);
            termination_.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
            termination_.term_signal = WIFSIGNALED(status) ? WTERMSIG(status) : 0;
            break;
        }
        auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            if (!sent_term) {
                ::kill(pid_, SIGTERM);
                sent_term = true;
                deadline = now + std::chrono::milliseconds(500);
            } else {
                ::kill(pid_, SIGKILL);
                termination_.forced_kill = true;
                int st = 0;
                ::waitpid(pid_, &st, 0);
                reaped_ = true;
                termination_.exited = false;
                termination_.term_signal = SIGKILL;
                break;
            }
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    drain_stderr_nonblocking();
    return termination_;
}

}  // namespace mcpscan
