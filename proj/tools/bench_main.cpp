// bench: command-line front end for campaigns, reports, and the catalog.

#include "bbeval/archive.hpp"
#include "bbeval/benchfn.hpp"
#include "bbeval/errors.hpp"
#include "bbeval/report.hpp"
#include "bbeval/runner.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

using namespace bbeval;

int main(int argc, char **argv) {
    CLI::App app{"Black-box optimizer benchmarking harness"};
    app.require_subcommand(1);

    std::string config_file;
    bool resume = false;
    std::optional<std::size_t> workers;
    auto *run = app.add_subcommand("run", "Execute a campaign described by a JSON config");
    run->add_option("--config", config_file, "Campaign config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_flag("--resume", resume, "Only execute runs missing or failed in the existing archive");
    run->add_option("--workers", workers, "Override the config's worker count")->check(CLI::PositiveNumber);

    std::string archive_dir;
    std::string method_a;
    std::vector<std::string> method_b;
    double alpha = default_alpha;
    std::string out_dir;
    auto *report = app.add_subcommand("report", "Compare two methods from a campaign archive");
    report->add_option("--archive", archive_dir, "Campaign archive directory")->required()->check(CLI::ExistingDirectory);
    report->add_option("--a", method_a, "Method A")->required();
    report->add_option("--b", method_b, "Method B (repeat for extra table columns)")->required();
    report->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    report->add_option("--out", out_dir, "Write report.json and index.json here");

    auto *cat = app.add_subcommand("catalog", "Print the benchmark catalog as JSON");

    std::string validate_dir;
    auto *validate_cmd = app.add_subcommand("validate", "Re-derive every trace and metric in an archive");
    validate_cmd->add_option("--archive", validate_dir, "Campaign archive directory")
        ->required()
        ->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto config = load_campaign_config(config_file);
            if (workers) config.workers = *workers;
            auto summary = resume ? resume_campaign(config) : run_campaign(config);
            std::cout << "planned " << summary.planned << " runs, executed " << summary.executed << ", failed "
                      << summary.failed << "\nmanifest: " << summary.manifest.string() << "\n";
            return 0;
        }
        if (*report) {
            auto archive = load_archive(archive_dir);
            std::vector<ReportBundle> bundles;
            for (const auto &b : method_b) bundles.push_back(build_report(archive, method_a, b, alpha));
            std::cout << render_text_summary(bundles);
            if (!out_dir.empty()) {
                if (bundles.size() == 1) {
                    std::cout << "\nwrote " << export_dashboard_bundle(bundles.front(), out_dir).string() << "\n";
                } else {
                    for (const auto &b : bundles) {
                        auto dir = std::filesystem::path(out_dir) / (b.method_a + "_vs_" + b.method_b);
                        std::cout << "\nwrote " << export_dashboard_bundle(b, dir).string();
                    }
                    std::cout << "\n";
                }
            }
            return 0;
        }
        if (*cat) {
            std::cout << catalog_json(catalog()).dump(2) << "\n";
            return 0;
        }
        if (*validate_cmd) {
            auto result = validate_archive(validate_dir);
            for (const auto &m : result.mismatches) std::cout << "MISMATCH " << m << "\n";
            std::cout << result.records_checked << " records checked, " << result.mismatches.size()
                      << " mismatches\n";
            return result.ok() ? 0 : 1;
        }
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
