#pragma once

#include "bbeval/archive.hpp"
#include "bbeval/metrics.hpp"
#include "bbeval/stats.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace bbeval {

inline constexpr const char *report_schema_version = "1.0";

struct MethodSummary {
    TraceBands bands;
    std::vector<MetricVector> runs;
};

struct FunctionReport {
    std::string function_id;
    MethodSummary a;
    MethodSummary b;
    std::vector<ComparisonOutcome> outcomes; // one per metric, canonical metric order
    FunctionVerdict verdict;
};

struct Exclusion {
    std::string function_id;
    std::string reason;

    bool operator==(const Exclusion &) const = default;
};

/// Pairwise comparison of two methods over one campaign. Only quantile bands
/// of the traces are kept; raw traces stay in the archive.
struct ReportBundle {
    std::string schema_version = report_schema_version;
    std::string fingerprint;
    std::string method_a;
    std::string method_b;
    double alpha = default_alpha;
    std::vector<std::string> metrics;
    std::map<std::string, FunctionReport> per_function;
    std::map<std::string, PValueHistogram> histograms;
    TotalPerformance totals;
    std::vector<Exclusion> exclusions;
};

// Per-function work is spread over OpenMP threads; output is identical to
// build_report_serial. Throws UnknownMethod or NoComparableFunctions.
ReportBundle build_report(const Archive &archive, const std::string &method_a, const std::string &method_b,
                          double alpha = default_alpha);
ReportBundle build_report_serial(const Archive &archive, const std::string &method_a,
                                 const std::string &method_b, double alpha = default_alpha);

nlohmann::json to_json(const ReportBundle &bundle);
// Throws SchemaMismatch.
ReportBundle report_from_json(const nlohmann::json &j);

// Function ids referenced by histograms, verdicts, or exclusions that do not
// resolve inside the bundle.
std::vector<std::string> dangling_references(const ReportBundle &bundle);

// Table with one column per bundle; all bundles must share method_a.
std::string render_text_summary(std::span<const ReportBundle> bundles);
std::string render_text_summary(const ReportBundle &bundle);

// Writes report.json and index.json into out_dir. Throws IoFailure.
std::filesystem::path export_dashboard_bundle(const ReportBundle &bundle, const std::filesystem::path &out_dir);

} // namespace bbeval
