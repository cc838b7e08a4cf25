// Test adapter for the line-delimited JSON optimizer protocol.
//
// usage: fixture_adapter <mode> [arg]
//   conforming          uniform random suggestions until stdin closes
//   malformed N         emits a non-JSON line as its output line N
//   out_of_domain       every suggestion lies outside the box
//   recovering          two out-of-domain suggestions, then conforming
//   crash_if_dim D      exits with status 3 right after init when dim == D
//   early_done N        sends done after N results
//   silent              reads init and never answers

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <iostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

using nlohmann::json;

namespace {

void emit(const json &j) { std::cout << j.dump() << std::endl; }

bool read_message(json &out) {
    std::string line;
    if (!std::getline(std::cin, line)) return false;
    out = json::parse(line);
    return true;
}

} // namespace

int main(int argc, char **argv) {
    const std::string mode = argc > 1 ? argv[1] : "conforming";
    const long arg = argc > 2 ? std::stol(argv[2]) : 0;

    json init;
    if (!read_message(init) || init.value("type", "") != "init") return 1;
    const auto dim = init.at("dim").get<std::size_t>();
    const auto domain = init.at("domain").get<std::vector<std::vector<double>>>();
    std::mt19937_64 rng(init.at("seed").get<std::uint64_t>());

    if (mode == "crash_if_dim" && static_cast<long>(dim) == arg) {
        std::cerr << "fixture adapter: refusing dim " << dim << std::endl;
        return 3;
    }
    if (mode == "silent") {
        std::this_thread::sleep_for(std::chrono::seconds(30));
        return 0;
    }

    long lines_out = 0;
    long results = 0;
    long bad_left = mode == "recovering" ? 2 : 0;
    for (;;) {
        ++lines_out;
        if (mode == "malformed" && lines_out == arg) {
            std::cout << "this is not a protocol message" << std::endl;
        } else if (mode == "early_done" && results == arg) {
            emit({{"type", "done"}});
            json ignored;
            read_message(ignored);
            return 0;
        } else if (mode == "out_of_domain" || bad_left > 0) {
            std::vector<double> x(dim);
            for (std::size_t i = 0; i < dim; ++i) x[i] = domain[i][1] + 1.0;
            emit({{"type", "suggest"}, {"x", x}});
            if (bad_left > 0) --bad_left;
        } else {
            std::vector<double> x(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                std::uniform_real_distribution<double> u(domain[i][0], domain[i][1]);
                x[i] = u(rng);
            }
            emit({{"type", "suggest"}, {"x", x}});
        }
        json reply;
        if (!read_message(reply)) return 0;
        if (reply.value("type", "") == "result") ++results;
    }
}
