#include "bbeval/report.hpp"

#include "bbeval/errors.hpp"

#include <algorithm>
#include <exception>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>

#include <omp.h>

namespace bbeval {

namespace {

using RecordIndex = std::map<std::pair<std::string, std::string>, std::vector<const RunRecord *>>;

struct PendingFunction {
    std::string function_id;
    std::vector<const RunRecord *> a;
    std::vector<const RunRecord *> b;
};

std::string summarize_failures(const std::string &method, const std::vector<const RunRecord *> &runs,
                               std::size_t repeats) {
    std::size_t failed = 0;
    std::string first;
    for (const auto *r : runs) {
        if (r->status == RunStatus::failed) {
            if (failed++ == 0) first = r->diagnostic;
        }
    }
    std::ostringstream os;
    if (runs.size() < repeats) {
        os << "method " << method << ": " << (repeats - runs.size()) << " of " << repeats << " records missing";
    }
    if (failed > 0) {
        if (os.tellp() > 0) os << "; ";
        if (first.size() > 200) first = first.substr(0, 200) + "...";
        os << "method " << method << ": " << failed << " failed run(s), first: " << first;
    }
    if (os.tellp() == 0 && runs.size() < 2) os << "method " << method << ": fewer than 2 completed repeats";
    return os.str();
}

FunctionReport analyze_function(const PendingFunction &pf, double alpha) {
    FunctionReport fr;
    fr.function_id = pf.function_id;
    auto summarize = [](const std::vector<const RunRecord *> &runs) {
        MethodSummary s;
        std::vector<BestSeenTrace> traces;
        for (const auto *r : runs) {
            traces.push_back(r->trace);
            s.runs.push_back(*r->metrics);
        }
        s.bands = trace_quantiles(traces);
        return s;
    };
    fr.a = summarize(pf.a);
    fr.b = summarize(pf.b);

    for (auto name : metric_names()) {
        MetricSample sa{pf.a.front()->method_id, pf.function_id, std::string(name), {}};
        MetricSample sb{pf.b.front()->method_id, pf.function_id, std::string(name), {}};
        for (const auto &m : fr.a.runs) sa.values.push_back(metric_value(m, name));
        for (const auto &m : fr.b.runs) sb.values.push_back(metric_value(m, name));
        fr.outcomes.push_back(compare(sa, sb, alpha));
    }
    fr.verdict = classify(fr.outcomes, alpha);
    return fr;
}

ReportBundle build_report_impl(const Archive &archive, const std::string &method_a, const std::string &method_b,
                               double alpha, bool parallel) {
    const auto &config = archive.config;
    auto has_method = [&](const std::string &id) {
        return std::any_of(config.methods.begin(), config.methods.end(),
                           [&](const OptimizerSpec &m) { return m.method_id == id; });
    };
    for (const auto *id : {&method_a, &method_b}) {
        if (!has_method(*id)) throw Error(ErrorKind::UnknownMethod, "method '" + *id + "' not in archive");
    }

    RecordIndex index;
    for (const auto &r : archive.records) index[{r.method_id, r.function_id}].push_back(&r);
    for (auto &[key, runs] : index) {
        std::sort(runs.begin(), runs.end(),
                  [](const RunRecord *x, const RunRecord *y) { return x->repeat_index < y->repeat_index; });
    }

    ReportBundle bundle;
    bundle.fingerprint = fingerprint(config);
    bundle.method_a = method_a;
    bundle.method_b = method_b;
    bundle.alpha = alpha;
    for (auto name : metric_names()) bundle.metrics.emplace_back(name);

    std::vector<PendingFunction> pending;
    for (const auto *fn : config.functions()) {
        PendingFunction pf{fn->id, index[{method_a, fn->id}], index[{method_b, fn->id}]};
        auto usable = [&](const std::vector<const RunRecord *> &runs) {
            return runs.size() >= config.repeats && runs.size() >= 2 &&
                   std::all_of(runs.begin(), runs.end(),
                               [](const RunRecord *r) { return r->status == RunStatus::completed; });
        };
        if (usable(pf.a) && usable(pf.b)) {
            pending.push_back(std::move(pf));
            continue;
        }
        std::string reason;
        if (!usable(pf.a)) reason = summarize_failures(method_a, pf.a, config.repeats);
        if (!usable(pf.b) && method_b != method_a) {
            if (!reason.empty()) reason += "; ";
            reason += summarize_failures(method_b, pf.b, config.repeats);
        }
        bundle.exclusions.push_back({fn->id, reason});
    }
    if (pending.empty()) {
        throw Error(ErrorKind::NoComparableFunctions, method_a + " vs " + method_b + ": no function has complete runs");
    }

    std::vector<FunctionReport> reports(pending.size());
    if (parallel) {
        std::exception_ptr failure;
        std::mutex failure_mutex;
        const auto n = static_cast<std::ptrdiff_t>(pending.size());
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            try {
                reports[static_cast<std::size_t>(i)] = analyze_function(pending[static_cast<std::size_t>(i)], alpha);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    } else {
        for (std::size_t i = 0; i < pending.size(); ++i) reports[i] = analyze_function(pending[i], alpha);
    }

    std::vector<FunctionVerdict> verdicts;
    std::map<std::string, std::vector<ComparisonOutcome>> by_metric;
    for (auto &fr : reports) {
        verdicts.push_back(fr.verdict);
        for (const auto &o : fr.outcomes) by_metric[o.metric_name].push_back(o);
        bundle.per_function.emplace(fr.function_id, std::move(fr));
    }
    for (const auto &[metric, outcomes] : by_metric) bundle.histograms[metric] = pvalue_histogram(outcomes);
    bundle.totals = total_performance(verdicts);
    return bundle;
}

nlohmann::json bands_json(const TraceBands &b) {
    return {{"median", b.median}, {"q25", b.q25}, {"q75", b.q75}};
}

nlohmann::json runs_json(const std::vector<MetricVector> &runs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &m : runs) arr.push_back({{"best_found", m.best_found}, {"auc", m.auc}});
    return arr;
}

nlohmann::json outcome_json(const ComparisonOutcome &o) {
    return {{"function_id", o.function_id}, {"metric_name", o.metric_name}, {"mean_a", o.mean_a},
            {"mean_b", o.mean_b},           {"u_statistic", o.u_statistic}, {"p_value", o.p_value},
            {"direction", std::string(to_string(o.direction))}, {"significant", o.significant}};
}

ComparisonOutcome outcome_from_json(const nlohmann::json &j) {
    ComparisonOutcome o;
    o.function_id = j.at("function_id").get<std::string>();
    o.metric_name = j.at("metric_name").get<std::string>();
    o.mean_a = j.at("mean_a").get<double>();
    o.mean_b = j.at("mean_b").get<double>();
    o.u_statistic = j.at("u_statistic").get<double>();
    o.p_value = j.at("p_value").get<double>();
    o.direction = direction_from_string(j.at("direction").get<std::string>());
    o.significant = j.at("significant").get<bool>();
    return o;
}

MethodSummary summary_from_json(const nlohmann::json &traces, const nlohmann::json &runs) {
    MethodSummary s;
    s.bands.median = traces.at("median").get<std::vector<double>>();
    s.bands.q25 = traces.at("q25").get<std::vector<double>>();
    s.bands.q75 = traces.at("q75").get<std::vector<double>>();
    for (const auto &r : runs) s.runs.push_back({r.at("best_found").get<double>(), r.at("auc").get<double>()});
    return s;
}

} // namespace

ReportBundle build_report(const Archive &archive, const std::string &method_a, const std::string &method_b,
                          double alpha) {
    return build_report_impl(archive, method_a, method_b, alpha, true);
}

ReportBundle build_report_serial(const Archive &archive, const std::string &method_a, const std::string &method_b,
                                 double alpha) {
    return build_report_impl(archive, method_a, method_b, alpha, false);
}

nlohmann::json to_json(const ReportBundle &b) {
    nlohmann::json per_function = nlohmann::json::object();
    for (const auto &[id, fr] : b.per_function) {
        nlohmann::json outcomes = nlohmann::json::object();
        for (const auto &o : fr.outcomes) outcomes[o.metric_name] = outcome_json(o);
        per_function[id] = {
            {"traces", {{"a", bands_json(fr.a.bands)}, {"b", bands_json(fr.b.bands)}}},
            {"runs", {{"a", runs_json(fr.a.runs)}, {"b", runs_json(fr.b.runs)}}},
            {"outcomes", outcomes},
            {"verdict", {{"function_id", fr.verdict.function_id},
                         {"category", std::string(to_string(fr.verdict.category))}}},
        };
    }
    nlohmann::json histograms = nlohmann::json::object();
    for (const auto &[metric, h] : b.histograms) {
        histograms[metric] = {{"edges", h.edges}, {"a_bins", h.a_bins}, {"b_bins", h.b_bins}};
    }
    nlohmann::json exclusions = nlohmann::json::array();
    for (const auto &e : b.exclusions) exclusions.push_back({{"function_id", e.function_id}, {"reason", e.reason}});
    return {{"schema_version", b.schema_version},
            {"fingerprint", b.fingerprint},
            {"pair", {{"a", b.method_a}, {"b", b.method_b}}},
            {"alpha", b.alpha},
            {"metrics", b.metrics},
            {"per_function", per_function},
            {"histograms", histograms},
            {"totals", {{"wins", b.totals.wins}, {"loses", b.totals.loses}, {"ties", b.totals.ties}, {"mixed", b.totals.mixed}}},
            {"exclusions", exclusions}};
}

ReportBundle report_from_json(const nlohmann::json &j) {
    try {
        ReportBundle b;
        b.schema_version = j.at("schema_version").get<std::string>();
        if (b.schema_version != report_schema_version) {
            throw Error(ErrorKind::SchemaMismatch,
                        "report schema " + b.schema_version + ", expected " + report_schema_version);
        }
        b.fingerprint = j.at("fingerprint").get<std::string>();
        b.method_a = j.at("pair").at("a").get<std::string>();
        b.method_b = j.at("pair").at("b").get<std::string>();
        b.alpha = j.at("alpha").get<double>();
        b.metrics = j.at("metrics").get<std::vector<std::string>>();
        for (const auto &[id, f] : j.at("per_function").items()) {
            FunctionReport fr;
            fr.function_id = id;
            fr.a = summary_from_json(f.at("traces").at("a"), f.at("runs").at("a"));
            fr.b = summary_from_json(f.at("traces").at("b"), f.at("runs").at("b"));
            for (const auto &m : b.metrics) fr.outcomes.push_back(outcome_from_json(f.at("outcomes").at(m)));
            fr.verdict.function_id = f.at("verdict").at("function_id").get<std::string>();
            fr.verdict.category = category_from_string(f.at("verdict").at("category").get<std::string>());
            fr.verdict.per_metric = fr.outcomes;
            b.per_function.emplace(id, std::move(fr));
        }
        for (const auto &[metric, h] : j.at("histograms").items()) {
            PValueHistogram ph;
            ph.edges = h.at("edges").get<std::vector<double>>();
            ph.a_bins = h.at("a_bins").get<std::vector<std::vector<std::string>>>();
            ph.b_bins = h.at("b_bins").get<std::vector<std::vector<std::string>>>();
            b.histograms.emplace(metric, std::move(ph));
        }
        const auto &t = j.at("totals");
        b.totals = {t.at("wins").get<std::size_t>(), t.at("loses").get<std::size_t>(), t.at("ties").get<std::size_t>(),
                    t.at("mixed").get<std::size_t>()};
        for (const auto &e : j.at("exclusions")) {
            b.exclusions.push_back({e.at("function_id").get<std::string>(), e.at("reason").get<std::string>()});
        }
        return b;
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::SchemaMismatch, std::string("report: ") + e.what());
    }
}

std::vector<std::string> dangling_references(const ReportBundle &bundle) {
    std::set<std::string> missing;
    auto check = [&](const std::string &id) {
        if (!bundle.per_function.count(id)) missing.insert(id);
    };
    for (const auto &[metric, h] : bundle.histograms) {
        for (const auto *side : {&h.a_bins, &h.b_bins}) {
            for (const auto &bin : *side) {
                for (const auto &id : bin) check(id);
            }
        }
    }
    for (const auto &[id, fr] : bundle.per_function) {
        if (fr.verdict.function_id != id) missing.insert(fr.verdict.function_id);
        for (const auto &o : fr.outcomes) {
            if (o.function_id != id) missing.insert(o.function_id);
        }
    }
    return {missing.begin(), missing.end()};
}

std::string render_text_summary(std::span<const ReportBundle> bundles) {
    if (bundles.empty()) return {};
    const std::string &a = bundles.front().method_a;
    for (const auto &b : bundles) {
        if (b.method_a != a) {
            throw Error(ErrorKind::MismatchedSamples, "summary columns must share method " + a);
        }
    }

    std::vector<std::string> header{a + " (vs)"};
    for (const auto &b : bundles) header.push_back(b.method_b);
    std::size_t label_w = header.front().size();
    for (auto name : metric_names()) label_w = std::max(label_w, name.size() + 2);
    label_w = std::max<std::size_t>(label_w, 8);
    std::vector<std::size_t> col_w;
    for (std::size_t i = 1; i < header.size(); ++i) col_w.push_back(std::max<std::size_t>(header[i].size(), 6));

    std::ostringstream os;
    auto rule = [&] {
        std::size_t w = label_w;
        for (auto c : col_w) w += 2 + c;
        os << std::string(w, '-') << '\n';
    };

    rule();
    os << std::left << std::setw(static_cast<int>(label_w)) << header.front();
    for (std::size_t i = 0; i < col_w.size(); ++i) os << "  " << std::right << std::setw(static_cast<int>(col_w[i])) << header[i + 1];
    os << '\n';
    rule();
    auto row = [&](const std::string &label, auto value) {
        os << std::left << std::setw(static_cast<int>(label_w)) << label;
        for (std::size_t i = 0; i < bundles.size(); ++i) {
            os << "  " << std::right << std::setw(static_cast<int>(col_w[i])) << value(bundles[i]);
        }
        os << '\n';
    };
    row("Wins", [](const ReportBundle &b) { return b.totals.wins; });
    row("Loses", [](const ReportBundle &b) { return b.totals.loses; });
    row("Ties", [](const ReportBundle &b) { return b.totals.ties; });
    row("Mixed", [](const ReportBundle &b) { return b.totals.mixed; });
    rule();

    // signf_win counts per metric, "A>B / B>A".
    os << "Significance wins (p <= alpha), " << a << " > other / other > " << a << '\n';
    for (auto name : metric_names()) {
        row("  " + std::string(name), [&](const ReportBundle &b) {
            std::size_t up = 0, down = 0;
            for (const auto &[id, fr] : b.per_function) {
                for (const auto &o : fr.outcomes) {
                    if (o.metric_name != name || !(o.p_value <= b.alpha)) continue;
                    if (o.direction == Direction::a_higher) ++up;
                    if (o.direction == Direction::b_higher) ++down;
                }
            }
            return std::to_string(up) + "/" + std::to_string(down);
        });
    }

    for (const auto &b : bundles) {
        if (b.exclusions.empty()) continue;
        os << "\nExclusions (" << b.method_a << " vs " << b.method_b << ")\n";
        for (const auto &e : b.exclusions) os << "  " << e.function_id << ": " << e.reason << '\n';
    }
    return os.str();
}

std::string render_text_summary(const ReportBundle &bundle) {
    return render_text_summary(std::span<const ReportBundle>(&bundle, 1));
}

std::filesystem::path export_dashboard_bundle(const ReportBundle &bundle, const std::filesystem::path &out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());

    std::vector<std::string> ids;
    for (const auto &[id, fr] : bundle.per_function) ids.push_back(id);
    nlohmann::json index = {{"schema_version", bundle.schema_version},
                            {"report", "report.json"},
                            {"fingerprint", bundle.fingerprint},
                            {"pair", {{"a", bundle.method_a}, {"b", bundle.method_b}}},
                            {"metrics", bundle.metrics},
                            {"function_ids", ids}};
    write_json_file(out_dir / "report.json", to_json(bundle));
    write_json_file(out_dir / "index.json", index);
    return out_dir / "report.json";
}

} // namespace bbeval
