// Serial reference vs OpenMP campaign execution and report aggregation.

#include "bbeval/report.hpp"
#include "bbeval/runner.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <limits>
#include <omp.h>

using namespace bbeval;

namespace {

// Best of `rounds` timings, after one untimed warm-up call.
template <typename F>
double best_ms(int rounds, F &&f) {
    f();
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < rounds; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Compare serial and OpenMP campaign execution"};
    std::size_t workers = static_cast<std::size_t>(omp_get_max_threads());
    std::size_t repeats = 20;
    int rounds = 5;
    app.add_option("--workers", workers, "OpenMP threads for the parallel variant")->check(CLI::PositiveNumber);
    app.add_option("--repeats", repeats, "Repeats per method and function")->check(CLI::Range(2, 100000));
    app.add_option("--rounds", rounds, "Timed rounds per variant (best is reported)")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    CampaignConfig config;
    config.methods = {{"pso", OptimizerKind::pso, nlohmann::json::object(), ""},
                      {"random", OptimizerKind::random_search, nlohmann::json::object(), ""}};
    config.repeats = repeats;
    config.budget_per_dim = 40;
    config.base_seed = 7;
    config.workers = workers;
    config.output_dir = std::filesystem::temp_directory_path() / "bbeval_campaign_bench";

    const auto tasks = plan_runs(config);
    std::cout << std::fixed << std::setprecision(2);
    std::cout << "campaign: " << tasks.size() << " runs over " << config.functions().size() << " functions, "
              << workers << " worker(s), best of " << rounds << "\n";

    std::vector<RunRecord> serial, parallel;
    double t_serial = best_ms(rounds, [&] { serial = execute_runs_serial(config, tasks); });
    double t_parallel = best_ms(rounds, [&] { parallel = execute_runs(config, tasks, workers); });

    bool same = serial.size() == parallel.size();
    for (std::size_t i = 0; same && i < serial.size(); ++i) {
        same = serial[i].evaluations.size() == parallel[i].evaluations.size() && serial[i].metrics == parallel[i].metrics;
    }
    std::cout << "execute_runs_serial   " << std::setw(10) << t_serial << " ms\n";
    std::cout << "execute_runs          " << std::setw(10) << t_parallel << " ms  speedup "
              << (t_parallel > 0 ? t_serial / t_parallel : 0.0) << "x  identical=" << (same ? "yes" : "NO") << "\n";

    run_campaign(config);
    auto archive = load_archive(config.output_dir);
    ReportBundle rs, rp;
    double r_serial = best_ms(rounds, [&] { rs = build_report_serial(archive, "pso", "random"); });
    double r_parallel = best_ms(rounds, [&] { rp = build_report(archive, "pso", "random"); });
    bool same_report = to_json(rs) == to_json(rp);
    std::cout << "build_report_serial   " << std::setw(10) << r_serial << " ms\n";
    std::cout << "build_report          " << std::setw(10) << r_parallel << " ms  speedup "
              << (r_parallel > 0 ? r_serial / r_parallel : 0.0) << "x  identical=" << (same_report ? "yes" : "NO")
              << "\n";
    std::filesystem::remove_all(config.output_dir);
    return same && same_report ? 0 : 1;
}
