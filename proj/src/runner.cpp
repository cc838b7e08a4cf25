#include "bbeval/runner.hpp"

#include "bbeval/archive.hpp"
#include "bbeval/errors.hpp"
#include "bbeval/seed.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>

#include <omp.h>

namespace bbeval {

std::size_t CampaignConfig::budget_for(const BenchmarkFunction &fn) const {
    return budget_per_dim ? *budget_per_dim * fn.dim : budget;
}

std::vector<const BenchmarkFunction *> CampaignConfig::functions() const {
    std::vector<const BenchmarkFunction *> out;
    if (function_ids.empty()) {
        for (const auto &fn : catalog()) out.push_back(&fn);
        return out;
    }
    for (const auto &id : function_ids) out.push_back(&find_function(id));
    return out;
}

void validate(const CampaignConfig &config) {
    auto fatal = [](const std::string &msg) { throw Error(ErrorKind::FatalConfigError, msg); };
    if (config.methods.empty()) fatal("campaign needs at least one method");
    std::set<std::string> ids;
    for (const auto &m : config.methods) {
        validate(m);
        if (!ids.insert(m.method_id).second) fatal("duplicate method_id '" + m.method_id + "'");
    }
    if (config.repeats < 2) fatal("repeats must be >= 2");
    if (config.budget < 1) fatal("budget must be >= 1");
    if (config.budget_per_dim && *config.budget_per_dim < 1) fatal("budget_per_dim must be >= 1");
    if (config.workers < 1) fatal("workers must be >= 1");
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) fatal("alpha must lie in (0, 1)");
    if (config.output_dir.empty()) fatal("output_dir must be set");
    std::set<std::string> fids;
    for (const auto &id : config.function_ids) {
        if (!fids.insert(id).second) fatal("duplicate function id '" + id + "'");
        try {
            find_function(id);
        } catch (const Error &e) {
            fatal(e.what());
        }
    }
}

CampaignConfig campaign_config_from_json(const nlohmann::json &j) {
    CampaignConfig c;
    try {
        for (const auto &m : j.at("methods")) c.methods.push_back(optimizer_spec_from_json(m));
        c.function_ids = j.value("function_ids", std::vector<std::string>{});
        c.repeats = j.value("repeats", c.repeats);
        c.budget = j.value("budget", c.budget);
        if (j.contains("budget_per_dim") && !j.at("budget_per_dim").is_null()) {
            c.budget_per_dim = j.at("budget_per_dim").get<std::size_t>();
        }
        c.base_seed = j.value("base_seed", c.base_seed);
        c.workers = j.value("workers", c.workers);
        c.alpha = j.value("alpha", c.alpha);
        c.apply_bias_shifts = j.value("apply_bias_shifts", c.apply_bias_shifts);
        c.output_dir = j.value("output_dir", std::string());
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::FatalConfigError, std::string("campaign config: ") + e.what());
    }
    validate(c);
    return c;
}

CampaignConfig load_campaign_config(const std::filesystem::path &file) {
    nlohmann::json j;
    try {
        j = read_json_file(file);
    } catch (const Error &e) {
        throw Error(ErrorKind::FatalConfigError, e.what());
    }
    return campaign_config_from_json(j);
}

nlohmann::json to_json(const CampaignConfig &c) {
    nlohmann::json methods = nlohmann::json::array();
    for (const auto &m : c.methods) methods.push_back(to_json(m));
    return {{"methods", methods},
            {"function_ids", c.function_ids},
            {"repeats", c.repeats},
            {"budget", c.budget},
            {"budget_per_dim", c.budget_per_dim ? nlohmann::json(*c.budget_per_dim) : nlohmann::json()},
            {"base_seed", c.base_seed},
            {"workers", c.workers},
            {"alpha", c.alpha},
            {"apply_bias_shifts", c.apply_bias_shifts},
            {"output_dir", c.output_dir.string()}};
}

std::string fingerprint(const CampaignConfig &config) {
    auto j = to_json(config);
    j.erase("workers");
    j.erase("output_dir");
    std::vector<std::string> ids;
    for (const auto *fn : config.functions()) ids.push_back(fn->id);
    j["function_ids"] = ids;
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << SeedHasher(0).add(j.dump()).digest();
    return os.str();
}

std::string_view to_string(RunStatus s) { return s == RunStatus::completed ? "completed" : "failed"; }

nlohmann::json to_json(const RunRecord &r) {
    nlohmann::json evals = nlohmann::json::array();
    for (const auto &e : r.evaluations) evals.push_back({{"x", e.x}, {"value", e.value}});
    nlohmann::json j = r.extra.is_object() ? r.extra : nlohmann::json::object();
    j["schema_version"] = r.schema_version;
    j["method_id"] = r.method_id;
    j["function_id"] = r.function_id;
    j["repeat_index"] = r.repeat_index;
    j["seed"] = r.seed;
    j["evaluations"] = evals;
    j["trace"] = r.trace.values;
    j["metrics"] = r.metrics ? nlohmann::json{{"best_found", r.metrics->best_found}, {"auc", r.metrics->auc}}
                             : nlohmann::json();
    j["status"] = std::string(to_string(r.status));
    if (r.status == RunStatus::failed) j["diagnostic"] = r.diagnostic;
    j["duration_ms"] = r.duration_ms;
    return j;
}

RunRecord run_record_from_json(const nlohmann::json &j) {
    static const std::set<std::string> known = {"schema_version", "method_id", "function_id", "repeat_index",
                                                "seed",           "evaluations", "trace",     "metrics",
                                                "status",         "diagnostic",  "duration_ms"};
    try {
        RunRecord r;
        r.schema_version = j.at("schema_version").get<std::string>();
        if (r.schema_version != archive_schema_version) {
            throw Error(ErrorKind::SchemaMismatch, "run record schema " + r.schema_version);
        }
        r.method_id = j.at("method_id").get<std::string>();
        r.function_id = j.at("function_id").get<std::string>();
        r.repeat_index = j.at("repeat_index").get<std::size_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        for (const auto &e : j.at("evaluations")) {
            r.evaluations.push_back({e.at("x").get<Point>(), e.at("value").get<double>()});
        }
        r.trace.values = j.at("trace").get<std::vector<double>>();
        if (!j.at("metrics").is_null()) {
            r.metrics = MetricVector{j["metrics"].at("best_found").get<double>(), j["metrics"].at("auc").get<double>()};
        }
        const auto status = j.at("status").get<std::string>();
        if (status != "completed" && status != "failed") throw Error(ErrorKind::SchemaMismatch, "bad status " + status);
        r.status = status == "completed" ? RunStatus::completed : RunStatus::failed;
        r.diagnostic = j.value("diagnostic", std::string());
        r.duration_ms = j.at("duration_ms").get<std::uint64_t>();
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!known.count(it.key())) r.extra[it.key()] = it.value();
        }
        return r;
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::SchemaMismatch, std::string("run record: ") + e.what());
    }
}

BenchmarkFunction function_for_repeat(const CampaignConfig &config, const BenchmarkFunction &fn,
                                      std::size_t repeat) {
    if (!config.apply_bias_shifts || !fn.predictable_optimum) return fn;
    return apply_bias_shift(fn, derive_shift_seed(config.base_seed, fn.id, repeat)).first;
}

namespace {

// Integer dimensions are rounded half away from zero here and nowhere else.
Point round_integer_dims(const BenchmarkFunction &fn, Point x) {
    for (std::size_t i : fn.integer_dims) {
        x[i] = std::clamp(std::round(x[i]), fn.domain[i].lo, fn.domain[i].hi);
    }
    return x;
}

} // namespace

RunRecord execute_run(const CampaignConfig &config, const OptimizerSpec &method, const BenchmarkFunction &fn,
                      std::size_t repeat) {
    const auto start = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.method_id = method.method_id;
    rec.function_id = fn.id;
    rec.repeat_index = repeat;
    rec.seed = derive_run_seed(config.base_seed, method.method_id, fn.id, repeat);
    const std::size_t budget = config.budget_for(fn);

    try {
        const BenchmarkFunction target = function_for_repeat(config, fn, repeat);
        Session session(method, fn.domain, budget, rec.seed);
        while (session.history().size() < budget) {
            auto suggestion = session.suggest();
            if (!suggestion) break;
            Point x = round_integer_dims(fn, *suggestion);
            double value = evaluate(target, x);
            session.observe(*suggestion, value);
            rec.evaluations.push_back({std::move(x), value});
        }
        std::vector<double> values;
        values.reserve(rec.evaluations.size());
        for (const auto &e : rec.evaluations) values.push_back(e.value);
        rec.trace = extend_to(best_seen_trace(values), budget);
        rec.metrics = compute_metrics(rec.trace);
        rec.status = RunStatus::completed;
    } catch (const std::exception &e) {
        rec.status = RunStatus::failed;
        rec.diagnostic = e.what();
        rec.trace = {};
        rec.metrics.reset();
    }
    rec.duration_ms = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count());
    return rec;
}

std::vector<RunTask> plan_runs(const CampaignConfig &config) {
    std::vector<RunTask> tasks;
    const auto fns = config.functions();
    for (const auto &m : config.methods) {
        for (const auto *fn : fns) {
            for (std::size_t r = 0; r < config.repeats; ++r) tasks.push_back({&m, fn, r});
        }
    }
    return tasks;
}

namespace {

// Applies `body` to every task index on `workers` threads. Exceptions thrown
// by `body` are captured and the first one rethrown after the loop.
template <typename Body>
void parallel_for_tasks(std::size_t count, std::size_t workers, Body body) {
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(workers))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

Manifest make_manifest(const CampaignConfig &config, const std::vector<RunTask> &tasks,
                       const std::vector<RunStatus> &statuses) {
    Manifest m;
    m.config = to_json(config);
    std::vector<BenchmarkFunction> fns;
    for (const auto *fn : config.functions()) fns.push_back(*fn);
    m.catalog = catalog_json(fns);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        RunKey key{tasks[i].method->method_id, tasks[i].function->id, tasks[i].repeat};
        m.runs.push_back({key, statuses[i], record_relative_path(key).generic_string()});
    }
    return m;
}

// Executes the selected tasks and writes each record as soon as it finishes.
CampaignSummary run_selected(const CampaignConfig &config, const std::vector<RunTask> &tasks,
                             std::vector<RunStatus> statuses, const std::vector<std::size_t> &todo,
                             std::size_t workers) {
    ArchiveWriter writer(config.output_dir);
    auto body = [&](std::size_t k) {
        const auto &t = tasks[todo[k]];
        auto rec = execute_run(config, *t.method, *t.function, t.repeat);
        statuses[todo[k]] = rec.status;
        writer.write(rec);
    };
    if (workers <= 1) {
        for (std::size_t k = 0; k < todo.size(); ++k) body(k);
    } else {
        parallel_for_tasks(todo.size(), workers, body);
    }
    writer.write_manifest(make_manifest(config, tasks, statuses));

    CampaignSummary s;
    s.planned = tasks.size();
    s.executed = todo.size();
    s.failed = static_cast<std::size_t>(std::count(statuses.begin(), statuses.end(), RunStatus::failed));
    s.manifest = config.output_dir / "manifest.json";
    return s;
}

} // namespace

std::vector<RunRecord> execute_runs(const CampaignConfig &config, const std::vector<RunTask> &tasks,
                                    std::size_t workers) {
    std::vector<RunRecord> out(tasks.size());
    parallel_for_tasks(tasks.size(), workers, [&](std::size_t i) {
        out[i] = execute_run(config, *tasks[i].method, *tasks[i].function, tasks[i].repeat);
    });
    return out;
}

std::vector<RunRecord> execute_runs_serial(const CampaignConfig &config, const std::vector<RunTask> &tasks) {
    std::vector<RunRecord> out;
    out.reserve(tasks.size());
    for (const auto &t : tasks) out.push_back(execute_run(config, *t.method, *t.function, t.repeat));
    return out;
}

CampaignSummary run_campaign(const CampaignConfig &config) {
    validate(config);
    auto tasks = plan_runs(config);
    std::vector<std::size_t> todo(tasks.size());
    for (std::size_t i = 0; i < todo.size(); ++i) todo[i] = i;
    return run_selected(config, tasks, std::vector<RunStatus>(tasks.size(), RunStatus::failed), todo,
                        config.workers);
}

CampaignSummary run_campaign_serial(const CampaignConfig &config) {
    validate(config);
    auto tasks = plan_runs(config);
    std::vector<std::size_t> todo(tasks.size());
    for (std::size_t i = 0; i < todo.size(); ++i) todo[i] = i;
    return run_selected(config, tasks, std::vector<RunStatus>(tasks.size(), RunStatus::failed), todo, 1);
}

CampaignSummary resume_campaign(const CampaignConfig &config) {
    validate(config);
    const auto manifest_path = config.output_dir / "manifest.json";
    if (!std::filesystem::exists(manifest_path)) return run_campaign(config);

    const auto manifest = manifest_from_json(read_json_file(manifest_path));
    CampaignConfig stored;
    try {
        stored = campaign_config_from_json(manifest.config);
    } catch (const Error &e) {
        throw Error(ErrorKind::ManifestMismatch, std::string("stored config unreadable: ") + e.what());
    }
    if (fingerprint(stored) != fingerprint(config)) {
        throw Error(ErrorKind::ManifestMismatch,
                    "archive fingerprint " + fingerprint(stored) + " does not match config " + fingerprint(config));
    }

    auto tasks = plan_runs(config);
    std::vector<RunStatus> statuses(tasks.size(), RunStatus::failed);
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        RunKey key{tasks[i].method->method_id, tasks[i].function->id, tasks[i].repeat};
        auto path = config.output_dir / record_relative_path(key);
        bool done = false;
        if (std::filesystem::exists(path)) {
            try {
                done = run_record_from_json(read_json_file(path)).status == RunStatus::completed;
            } catch (const Error &) {
                done = false;
            }
        }
        if (done) {
            statuses[i] = RunStatus::completed;
        } else {
            todo.push_back(i);
        }
    }
    return run_selected(config, tasks, std::move(statuses), todo, config.workers);
}

ValidationResult validate_archive(const std::filesystem::path &dir) {
    ValidationResult res;
    const auto manifest = manifest_from_json(read_json_file(dir / "manifest.json"));
    const auto config = campaign_config_from_json(manifest.config);
    auto bad = [&](const std::string &where, const std::string &what) { res.mismatches.push_back(where + ": " + what); };

    for (const auto &entry : manifest.runs) {
        const std::string where = entry.path;
        const auto path = dir / entry.path;
        if (!std::filesystem::exists(path)) {
            bad(where, "record file missing");
            continue;
        }
        RunRecord rec;
        try {
            rec = run_record_from_json(read_json_file(path));
        } catch (const Error &e) {
            bad(where, e.what());
            continue;
        }
        ++res.records_checked;
        if (rec.method_id != entry.key.method_id || rec.function_id != entry.key.function_id ||
            rec.repeat_index != entry.key.repeat) {
            bad(where, "record key does not match manifest");
            continue;
        }
        if (rec.status != entry.status) bad(where, "status differs from manifest");
        if (rec.seed != derive_run_seed(config.base_seed, rec.method_id, rec.function_id, rec.repeat_index)) {
            bad(where, "seed does not match derivation");
        }

        const BenchmarkFunction *fn = nullptr;
        try {
            fn = &find_function(rec.function_id);
        } catch (const Error &e) {
            bad(where, e.what());
            continue;
        }
        const std::size_t budget = config.budget_for(*fn);
        if (rec.evaluations.size() > budget) bad(where, "more evaluations than budget");

        const auto target = function_for_repeat(config, *fn, rec.repeat_index);
        std::vector<double> values;
        for (std::size_t i = 0; i < rec.evaluations.size(); ++i) {
            const auto &e = rec.evaluations[i];
            values.push_back(e.value);
            try {
                if (evaluate(target, e.x) != e.value) bad(where, "evaluation " + std::to_string(i) + " value differs");
            } catch (const Error &err) {
                bad(where, "evaluation " + std::to_string(i) + ": " + err.what());
            }
        }
        if (rec.status != RunStatus::completed) continue;
        try {
            auto trace = extend_to(best_seen_trace(values), budget);
            if (trace != rec.trace) bad(where, "trace differs from re-derivation");
            auto metrics = compute_metrics(trace);
            if (!rec.metrics || *rec.metrics != metrics) bad(where, "metrics differ from re-derivation");
        } catch (const Error &err) {
            bad(where, err.what());
        }
    }
    return res;
}

} // namespace bbeval
