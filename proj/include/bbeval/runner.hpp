#pragma once

#include "bbeval/benchfn.hpp"
#include "bbeval/metrics.hpp"
#include "bbeval/optimizers.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bbeval {

inline constexpr const char *archive_schema_version = "1.0";

struct CampaignConfig {
    std::vector<OptimizerSpec> methods;
    std::vector<std::string> function_ids; // empty means the full catalog
    std::size_t repeats = 20;
    std::size_t budget = 40;
    // When set, each function gets budget_per_dim * dim evaluations instead of `budget`.
    std::optional<std::size_t> budget_per_dim;
    std::uint64_t base_seed = 0;
    std::size_t workers = 1;
    double alpha = 0.01;
    bool apply_bias_shifts = true;
    std::filesystem::path output_dir;

    std::size_t budget_for(const BenchmarkFunction &fn) const;
    std::vector<const BenchmarkFunction *> functions() const;
};

// Throws FatalConfigError.
void validate(const CampaignConfig &config);
CampaignConfig campaign_config_from_json(const nlohmann::json &j);
CampaignConfig load_campaign_config(const std::filesystem::path &file);
nlohmann::json to_json(const CampaignConfig &config);

// Hash of everything that affects results; workers and output_dir excluded.
std::string fingerprint(const CampaignConfig &config);

enum class RunStatus { completed, failed };
std::string_view to_string(RunStatus s);

struct RunRecord {
    std::string schema_version = archive_schema_version;
    std::string method_id;
    std::string function_id;
    std::size_t repeat_index = 0;
    std::uint64_t seed = 0;
    std::vector<Observation> evaluations;
    BestSeenTrace trace;
    std::optional<MetricVector> metrics;
    RunStatus status = RunStatus::completed;
    std::string diagnostic;
    std::uint64_t duration_ms = 0;
    // Unrecognized top-level fields, written back unchanged.
    nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json to_json(const RunRecord &r);
RunRecord run_record_from_json(const nlohmann::json &j);

// The function a given repeat is evaluated on: the catalog entry, or a
// freshly shifted variant when bias shifts are on and the optimum is predictable.
BenchmarkFunction function_for_repeat(const CampaignConfig &config, const BenchmarkFunction &fn,
                                      std::size_t repeat);

// One isolated run. Never throws for optimizer or adapter faults; those
// become status=failed records.
RunRecord execute_run(const CampaignConfig &config, const OptimizerSpec &method, const BenchmarkFunction &fn,
                      std::size_t repeat);

struct RunTask {
    const OptimizerSpec *method = nullptr;
    const BenchmarkFunction *function = nullptr;
    std::size_t repeat = 0;
};

std::vector<RunTask> plan_runs(const CampaignConfig &config);

// Runs the tasks across `workers` OpenMP threads; records come back in task order.
std::vector<RunRecord> execute_runs(const CampaignConfig &config, const std::vector<RunTask> &tasks,
                                    std::size_t workers);
// Plain loop over the same tasks, kept as the reference for execute_runs.
std::vector<RunRecord> execute_runs_serial(const CampaignConfig &config, const std::vector<RunTask> &tasks);

struct CampaignSummary {
    std::size_t planned = 0;
    std::size_t executed = 0;
    std::size_t failed = 0;
    std::filesystem::path manifest;
};

CampaignSummary run_campaign(const CampaignConfig &config);
CampaignSummary run_campaign_serial(const CampaignConfig &config);

// Re-runs only missing or failed records in config.output_dir.
// Throws ManifestMismatch if the archive was produced by a different config.
CampaignSummary resume_campaign(const CampaignConfig &config);

struct ValidationResult {
    std::size_t records_checked = 0;
    std::vector<std::string> mismatches;

    bool ok() const { return mismatches.empty(); }
};

// Re-derives values, traces, and metrics from stored evaluations.
ValidationResult validate_archive(const std::filesystem::path &dir);

} // namespace bbeval
