#pragma once

#include "bbeval/runner.hpp"

#include <compare>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace bbeval {

struct RunKey {
    std::string method_id;
    std::string function_id;
    std::size_t repeat = 0;

    auto operator<=>(const RunKey &) const = default;
};

struct ManifestEntry {
    RunKey key;
    RunStatus status = RunStatus::completed;
    std::string path;
};

struct Manifest {
    std::string schema_version = archive_schema_version;
    nlohmann::json config;
    nlohmann::json catalog;
    std::vector<ManifestEntry> runs;
};

nlohmann::json to_json(const Manifest &m);
Manifest manifest_from_json(const nlohmann::json &j);

// runs/<method_id>/<function_id>/<repeat>.json, relative to the archive root.
std::filesystem::path record_relative_path(const RunKey &key);

// Throws IoFailure. The file is written to a temporary and renamed into place.
void write_json_file(const std::filesystem::path &path, const nlohmann::json &j);
nlohmann::json read_json_file(const std::filesystem::path &path);

/// Serializes record writes from concurrent workers.
class ArchiveWriter {
public:
    explicit ArchiveWriter(std::filesystem::path root);

    void write(const RunRecord &record);
    void write_manifest(const Manifest &manifest);
    const std::filesystem::path &root() const { return root_; }

private:
    std::filesystem::path root_;
    std::mutex mutex_;
};

struct Archive {
    std::filesystem::path root;
    Manifest manifest;
    CampaignConfig config;
    std::vector<RunRecord> records; // manifest order; missing files are skipped
};

// Throws IoFailure or SchemaMismatch.
Archive load_archive(const std::filesystem::path &root);

} // namespace bbeval
