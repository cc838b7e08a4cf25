#include "bbeval/external_adapter.hpp"

#include "bbeval/errors.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

#include <json.hpp>

extern char **environ;

namespace bbeval {

namespace {

constexpr std::size_t max_stderr_bytes = 16 * 1024;

std::string describe_status(int status) {
    if (WIFEXITED(status)) return "exit status " + std::to_string(WEXITSTATUS(status));
    if (WIFSIGNALED(status)) return "killed by signal " + std::to_string(WTERMSIG(status));
    return "unknown status";
}

void close_fd(int &fd) {
    if (fd >= 0) {
        ::close(fd);
        fd = -1;
    }
}

} // namespace

ExternalAdapter::ExternalAdapter(AdapterOptions options, Box domain, std::size_t budget, std::uint64_t seed)
    : options_(std::move(options)), domain_(std::move(domain)) {
    if (options_.command.empty()) throw Error(ErrorKind::AdapterFailure, "empty adapter command");

    // stdin is a socket so writes to a dead child fail with EPIPE instead of
    // raising SIGPIPE in the harness (send with MSG_NOSIGNAL).
    int in_pair[2];
    int out_pipe[2];
    int err_pipe[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, in_pair) != 0) {
        throw Error(ErrorKind::AdapterFailure, std::string("socketpair: ") + std::strerror(errno));
    }
    if (::pipe2(out_pipe, O_CLOEXEC) != 0 || ::pipe2(err_pipe, O_CLOEXEC) != 0) {
        throw Error(ErrorKind::AdapterFailure, std::string("pipe: ") + std::strerror(errno));
    }

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pair[1], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, err_pipe[1], STDERR_FILENO);

    std::vector<char *> argv;
    for (auto &a : options_.command) argv.push_back(a.data());
    argv.push_back(nullptr);

    int rc = ::posix_spawnp(&pid_, argv[0], &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in_pair[1]);
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    to_child_ = in_pair[0];
    from_child_ = out_pipe[0];
    err_child_ = err_pipe[0];
    if (rc != 0) {
        pid_ = -1;
        close_fd(to_child_);
        close_fd(from_child_);
        close_fd(err_child_);
        throw Error(ErrorKind::AdapterFailure,
                    "cannot spawn '" + options_.command.front() + "': " + std::strerror(rc));
    }

    nlohmann::json dom = nlohmann::json::array();
    for (const auto &iv : domain_) dom.push_back({iv.lo, iv.hi});
    nlohmann::json init = {{"type", "init"}, {"dim", domain_.size()}, {"domain", dom}, {"budget", budget}, {"seed", seed}};
    send(init.dump());
}

ExternalAdapter::~ExternalAdapter() { shutdown(); }

void ExternalAdapter::shutdown() {
    close_fd(to_child_);
    if (pid_ > 0) {
        // A conforming adapter exits on stdin EOF; give it a short grace period.
        int status = 0;
        bool reaped = false;
        for (int i = 0; i < 50 && !reaped; ++i) {
            pid_t r = ::waitpid(pid_, &status, WNOHANG);
            if (r == pid_ || r < 0) {
                reaped = true;
            } else {
                std::this_thread::sleep_for(std::chrono::milliseconds(10));
            }
        }
        if (!reaped) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, &status, 0);
        }
        pid_ = -1;
    }
    close_fd(from_child_);
    close_fd(err_child_);
}

void ExternalAdapter::send(const std::string &line) {
    std::string msg = line + "\n";
    std::size_t off = 0;
    while (off < msg.size()) {
        ssize_t n = ::send(to_child_, msg.data() + off, msg.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail(std::string("write to adapter failed: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

void ExternalAdapter::drain_stderr() {
    if (err_child_ < 0) return;
    char buf[4096];
    for (;;) {
        pollfd p{err_child_, POLLIN, 0};
        if (::poll(&p, 1, 0) <= 0 || !(p.revents & (POLLIN | POLLHUP))) return;
        ssize_t n = ::read(err_child_, buf, sizeof buf);
        if (n <= 0) {
            close_fd(err_child_);
            return;
        }
        if (err_buffer_.size() < max_stderr_bytes) err_buffer_.append(buf, static_cast<std::size_t>(n));
    }
}

void ExternalAdapter::fail(const std::string &what) {
    drain_stderr();
    std::string msg = what;
    if (pid_ > 0) {
        ::kill(pid_, SIGKILL);
        int status = 0;
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
        // Read whatever the child left behind now that it is gone.
        drain_stderr();
        msg += " [" + describe_status(status) + "]";
    }
    if (!err_buffer_.empty()) msg += "; adapter stderr: " + err_buffer_;
    shutdown();
    throw Error(ErrorKind::AdapterFailure, msg);
}

std::string ExternalAdapter::read_line() {
    auto deadline = std::chrono::steady_clock::now() + options_.timeout;
    for (;;) {
        auto nl = out_buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = out_buffer_.substr(0, nl);
            out_buffer_.erase(0, nl + 1);
            ++line_number_;
            return line;
        }
        if (from_child_ < 0) fail("adapter closed its output");

        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) {
            drain_stderr();
            if (pid_ > 0) {
                ::kill(pid_, SIGKILL);
                ::waitpid(pid_, nullptr, 0);
                pid_ = -1;
            }
            shutdown();
            throw Error(ErrorKind::Timeout, "no adapter message within " + std::to_string(options_.timeout.count()) + " ms");
        }

        pollfd fds[2] = {{from_child_, POLLIN, 0}, {err_child_, POLLIN, 0}};
        int nfds = err_child_ >= 0 ? 2 : 1;
        int rc = ::poll(fds, static_cast<nfds_t>(nfds), static_cast<int>(std::min<long long>(remaining.count(), 1000)));
        if (rc < 0) {
            if (errno == EINTR) continue;
            fail(std::string("poll: ") + std::strerror(errno));
        }
        if (nfds == 2 && (fds[1].revents & (POLLIN | POLLHUP))) drain_stderr();
        if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
            char buf[4096];
            ssize_t n = ::read(from_child_, buf, sizeof buf);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) {
                close_fd(from_child_);
                fail("adapter exited before sending a message (after line " + std::to_string(line_number_) + ")");
            }
            out_buffer_.append(buf, static_cast<std::size_t>(n));
        }
    }
}

std::optional<Point> ExternalAdapter::next_suggestion() {
    int violations = 0;
    for (;;) {
        std::string line = read_line();
        const std::string where = "line " + std::to_string(line_number_);

        nlohmann::json msg = nlohmann::json::parse(line, nullptr, false);
        if (msg.is_discarded() || !msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
            fail("malformed adapter message at " + where + ": " + line);
        }
        const auto type = msg["type"].get<std::string>();
        if (type == "done") return std::nullopt;
        if (type != "suggest" || !msg.contains("x") || !msg["x"].is_array()) {
            fail("malformed adapter message at " + where + ": " + line);
        }
        Point x;
        for (const auto &v : msg["x"]) {
            if (!v.is_number()) fail("malformed adapter message at " + where + ": " + line);
            x.push_back(v.get<double>());
        }
        if (contains(domain_, x)) return x;

        ++violations;
        std::string reason = "suggestion at " + where + " outside the domain: " + msg["x"].dump();
        if (violations >= options_.max_consecutive_violations) {
            fail("domain violation: " + std::to_string(violations) + " consecutive out-of-domain suggestions, last " + reason);
        }
        send(nlohmann::json{{"type", "error"}, {"message", reason}}.dump());
    }
}

void ExternalAdapter::send_result(double value) {
    send(nlohmann::json{{"type", "result"}, {"value", value}}.dump());
}

} // namespace bbeval
