#include "bbeval/external_adapter.hpp"
#include "bbeval/optimizers.hpp"

#include "test_support.hpp"

#include <chrono>

using namespace bbeval;
using testing::error_kind;

namespace {

const Box unit2{{0, 1}, {0, 1}};

AdapterOptions fixture(std::vector<std::string> args, std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
    AdapterOptions o;
    o.command = {FIXTURE_ADAPTER};
    o.command.insert(o.command.end(), args.begin(), args.end());
    o.timeout = timeout;
    return o;
}

std::string failure_message(ExternalAdapter &a, int cycles) {
    try {
        for (int i = 0; i < cycles; ++i) {
            auto x = a.next_suggestion();
            if (!x) return "done";
            a.send_result(0.0);
        }
    } catch (const Error &e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("conforming adapter completes the budget") {
    ExternalAdapter a(fixture({"conforming"}), unit2, 25, 3);
    for (int i = 0; i < 25; ++i) {
        auto x = a.next_suggestion();
        REQUIRE(x);
        CHECK(contains(unit2, *x));
        a.send_result(-(*x)[0]);
    }
    CHECK(a.lines_read() == 25);
}

TEST_CASE("malformed line is reported with its number") {
    ExternalAdapter a(fixture({"malformed", "4"}), unit2, 10, 3);
    auto msg = failure_message(a, 10);
    CHECK(msg.find("AdapterFailure") != std::string::npos);
    CHECK(msg.find("line 4") != std::string::npos);
}

TEST_CASE("three consecutive out-of-domain suggestions terminate the adapter") {
    ExternalAdapter a(fixture({"out_of_domain"}), unit2, 10, 3);
    std::optional<ErrorKind> kind;
    std::string msg;
    try {
        a.next_suggestion();
    } catch (const Error &e) {
        kind = e.kind();
        msg = e.what();
    }
    CHECK(kind == ErrorKind::AdapterFailure);
    CHECK(msg.find("domain violation") != std::string::npos);
    CHECK(a.lines_read() == 3);
}

TEST_CASE("adapter recovering after two violations is accepted") {
    ExternalAdapter a(fixture({"recovering"}), unit2, 5, 3);
    for (int i = 0; i < 5; ++i) {
        auto x = a.next_suggestion();
        REQUIRE(x);
        CHECK(contains(unit2, *x));
        a.send_result(1.0);
    }
}

TEST_CASE("done ends the stream") {
    ExternalAdapter a(fixture({"early_done", "3"}), unit2, 10, 3);
    CHECK(failure_message(a, 10) == "done");
}

TEST_CASE("silent adapter times out") {
    auto start = std::chrono::steady_clock::now();
    {
        ExternalAdapter a(fixture({"silent"}, std::chrono::milliseconds(300)), unit2, 5, 3);
        CHECK(error_kind([&] { a.next_suggestion(); }) == ErrorKind::Timeout);
    }
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(5));
}

TEST_CASE("crashing adapter surfaces its exit status and stderr") {
    Box cube{{0, 1}, {0, 1}, {0, 1}};
    ExternalAdapter a(fixture({"crash_if_dim", "3"}), cube, 5, 3);
    auto msg = failure_message(a, 1);
    CHECK(msg.find("AdapterFailure") != std::string::npos);
    CHECK(msg.find("refusing dim 3") != std::string::npos);
}

TEST_CASE("missing executable is an adapter failure") {
    AdapterOptions o;
    o.command = {"/nonexistent/optimizer-binary"};
    CHECK(error_kind([&] { ExternalAdapter a(o, unit2, 5, 3); a.next_suggestion(); }) == ErrorKind::AdapterFailure);
}

TEST_CASE("session drives an external spec") {
    OptimizerSpec spec{"ext", OptimizerKind::external, {{"command", {FIXTURE_ADAPTER, "early_done", "4"}}}, "x"};
    Session s(spec, unit2, 10, 1);
    int n = 0;
    while (auto x = s.suggest()) {
        s.observe(*x, 0.5);
        ++n;
    }
    CHECK(n == 4);
    CHECK(s.stopped());
    CHECK(s.history().size() == 4);
}
