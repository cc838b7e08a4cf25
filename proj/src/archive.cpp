#include "bbeval/archive.hpp"

#include "bbeval/errors.hpp"

#include <fstream>
#include <sstream>
#include <thread>

namespace bbeval {

nlohmann::json to_json(const Manifest &m) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto &e : m.runs) {
        runs.push_back({{"method_id", e.key.method_id},
                        {"function_id", e.key.function_id},
                        {"repeat", e.key.repeat},
                        {"status", std::string(to_string(e.status))},
                        {"path", e.path}});
    }
    return {{"schema_version", m.schema_version}, {"config", m.config}, {"catalog", m.catalog}, {"runs", runs}};
}

Manifest manifest_from_json(const nlohmann::json &j) {
    try {
        Manifest m;
        m.schema_version = j.at("schema_version").get<std::string>();
        if (m.schema_version != archive_schema_version) {
            throw Error(ErrorKind::SchemaMismatch, "manifest schema " + m.schema_version + ", expected " +
                                                       archive_schema_version);
        }
        m.config = j.at("config");
        m.catalog = j.at("catalog");
        for (const auto &r : j.at("runs")) {
            ManifestEntry e;
            e.key.method_id = r.at("method_id").get<std::string>();
            e.key.function_id = r.at("function_id").get<std::string>();
            e.key.repeat = r.at("repeat").get<std::size_t>();
            e.status = r.at("status").get<std::string>() == "completed" ? RunStatus::completed : RunStatus::failed;
            e.path = r.at("path").get<std::string>();
            m.runs.push_back(std::move(e));
        }
        return m;
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::SchemaMismatch, std::string("manifest: ") + e.what());
    }
}

std::filesystem::path record_relative_path(const RunKey &key) {
    return std::filesystem::path("runs") / key.method_id / key.function_id / (std::to_string(key.repeat) + ".json");
}

void write_json_file(const std::filesystem::path &path, const nlohmann::json &j) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + path.parent_path().string() + ": " + ec.message());

    std::ostringstream suffix;
    suffix << ".tmp." << std::this_thread::get_id();
    auto tmp = path;
    tmp += suffix.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + tmp.string());
        out << j.dump(2) << '\n';
        if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot rename into " + path.string() + ": " + ec.message());
}

nlohmann::json read_json_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot read " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::SchemaMismatch, path.string() + ": " + e.what());
    }
}

ArchiveWriter::ArchiveWriter(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + root_.string() + ": " + ec.message());
}

void ArchiveWriter::write(const RunRecord &record) {
    auto j = to_json(record);
    auto path = root_ / record_relative_path({record.method_id, record.function_id, record.repeat_index});
    std::lock_guard lock(mutex_);
    write_json_file(path, j);
}

void ArchiveWriter::write_manifest(const Manifest &manifest) {
    std::lock_guard lock(mutex_);
    write_json_file(root_ / "manifest.json", to_json(manifest));
}

Archive load_archive(const std::filesystem::path &root) {
    Archive a;
    a.root = root;
    a.manifest = manifest_from_json(read_json_file(root / "manifest.json"));
    a.config = campaign_config_from_json(a.manifest.config);
    a.config.output_dir = root;
    for (const auto &e : a.manifest.runs) {
        auto path = root / e.path;
        if (!std::filesystem::exists(path)) continue;
        a.records.push_back(run_record_from_json(read_json_file(path)));
    }
    return a;
}

} // namespace bbeval
