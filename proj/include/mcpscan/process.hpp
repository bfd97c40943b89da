#pragma once

#include <chrono>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcpscan {

class LaunchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SessionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SpawnOptions {
    std::string command;
    std::vector<std::string> args;
    // Merged over the inherited environment.
    std::map<std::string, std::string> env_overrides;
};

/// A spawned child with line-oriented stdio. stderr is drained into a
/// diagnostics buffer to keep the child from blocking on a full pipe.
class ChildProcess {
public:
    static ChildProcess spawn(const SpawnOptions& options);  // throws LaunchError

    ChildProcess(ChildProcess&& other) noexcept;
    ChildProcess& operator=(ChildProcess&& other) noexcept;
    ChildProcess(const ChildProcess&) = delete;
    ChildProcess& operator=(const ChildProcess&) = delete;
    ~ChildProcess();

    enum class ReadStatus { Line, Eof, Timeout };
    ReadStatus read_line(std::string& out, std::chrono::steady_clock::time_point deadline);

    void write_line(std::string_view line);  // throws SessionError when the pipe is closed
    void close_stdin();

    /// Accumulated child stderr (drained opportunistically and at termination).
    const std::string& stderr_output() const { return stderr_buf_; }

    struct Termination {
        bool exited = false;      // true when the child exited on its own
        int exit_code = -1;       // valid when exited
        int term_signal = 0;      // signal that ended the child, if any
        bool forced_kill = false; // true when SIGKILL was needed
    };

    /// Closes stdin, waits up to `grace` for a clean exit, then escalates to
    /// SIGTERM and finally SIGKILL. Idempotent.
    Termination terminate(std::chrono::milliseconds grace);

    bool running();
    int pid() const { return pid_; }

private:
    ChildProcess() = default;

    void drain_stderr_nonblocking();

    int pid_ = -1;
    int stdin_fd_ = -1;
    int stdout_fd_ = -1;
    int stderr_fd_ = -1;
    std::string read_buf_;
    std::string stderr_buf_;
    bool reaped_ = false;
    Termination termination_{};
};

}  // namespace mcpscan
