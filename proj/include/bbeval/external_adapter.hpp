#pragma once

#include "bbeval/benchfn.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <sys/types.h>
#include <vector>

namespace bbeval {

struct AdapterOptions {
    std::vector<std::string> command;
    std::chrono::milliseconds timeout{60000};
    int max_consecutive_violations = 3;
};

/// One external optimizer process speaking line-delimited JSON on stdio.
///
/// Harness to adapter: init, then one result per accepted suggestion, or an
/// error reply for a rejected one. Adapter to harness: suggest or done.
/// The process is spawned in the constructor and reaped in the destructor.
class ExternalAdapter {
public:
    ExternalAdapter(AdapterOptions options, Box domain, std::size_t budget, std::uint64_t seed);
    ~ExternalAdapter();

    ExternalAdapter(const ExternalAdapter &) = delete;
    ExternalAdapter &operator=(const ExternalAdapter &) = delete;

    // Next in-domain suggestion; nullopt if the adapter sent done.
    // Throws AdapterFailure or Timeout.
    std::optional<Point> next_suggestion();
    void send_result(double value);

    std::size_t lines_read() const { return line_number_; }

private:
    std::string read_line();
    void send(const std::string &line);
    [[noreturn]] void fail(const std::string &what);
    void drain_stderr();
    void shutdown();

    AdapterOptions options_;
    Box domain_;
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    int err_child_ = -1;
    std::string out_buffer_;
    std::string err_buffer_;
    std::size_t line_number_ = 0;
};

} // namespace bbeval
