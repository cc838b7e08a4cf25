#include "bbeval/report.hpp"

#include "../support/synthetic_archive.hpp"
#include "test_support.hpp"

#include <fstream>
#include <random>
#include <regex>
#include <sstream>

using namespace bbeval;
using testing::error_kind;
using testing::TempDir;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> twelve{"neg_sphere_2d",      "neg_sphere_5d",    "neg_rosenbrock_2d",
                                      "neg_rastrigin_2d",   "neg_ackley_2d",    "neg_griewank_2d",
                                      "cosine_bowl_2d",     "neg_styblinski_tang_2d", "neg_himmelblau_2d",
                                      "neg_abs_sum_3d",     "mixed_int_quadratic_3d", "bump_mixture_2d"};

const Archive &campaign_archive() {
    static TempDir dir("report_campaign");
    static Archive archive = [] {
        CampaignConfig c;
        c.methods = {{"pso", OptimizerKind::pso, {{"swarm_size", 5}}, "v2"},
                     {"rs", OptimizerKind::random_search, nlohmann::json::object(), "v1"}};
        c.function_ids = twelve;
        c.repeats = 8;
        c.budget = 40;
        c.base_seed = 3;
        c.workers = 2;
        c.output_dir = dir.path();
        run_campaign(c);
        return load_archive(dir.path());
    }();
    return archive;
}

std::vector<double> ramp(double lo, double hi, std::size_t n, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto &x : v) x = u(rng);
    return v;
}

// A dominates 3, loses 1, ties 2.
Archive engineered_archive() {
    std::mt19937_64 rng(12);
    synthetic::RawRuns raw;
    const std::vector<std::pair<std::string, int>> plan{{"neg_sphere_2d", 1},    {"neg_sphere_5d", 1},
                                                        {"neg_ackley_2d", 1},    {"neg_griewank_2d", -1},
                                                        {"cosine_bowl_2d", 0},   {"bump_mixture_2d", 0}};
    for (const auto &[fid, sign] : plan) {
        for (int r = 0; r < 20; ++r) {
            auto low = ramp(0.0, 0.1, 10, rng);
            auto high = ramp(0.9, 1.0, 10, rng);
            if (sign > 0) {
                raw["A"][fid].push_back(high);
                raw["B"][fid].push_back(low);
            } else if (sign < 0) {
                raw["A"][fid].push_back(low);
                raw["B"][fid].push_back(high);
            } else {
                auto same = ramp(0.0, 1.0, 10, rng);
                raw["A"][fid].push_back(same);
                raw["B"][fid].push_back(same);
            }
        }
    }
    return synthetic::make_archive(raw, 20, 10);
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("report over a 12-function campaign") {
    const auto &archive = campaign_archive();
    auto b = build_report(archive, "pso", "rs");
    CHECK(b.per_function.size() == 12);
    CHECK(b.totals.total() == 12);
    CHECK(b.exclusions.empty());
    CHECK(dangling_references(b).empty());
    CHECK(b.metrics == std::vector<std::string>{"best_found", "auc"});
    CHECK(b.fingerprint == fingerprint(archive.config));

    for (const auto &[id, fr] : b.per_function) {
        CHECK(fr.function_id == id);
        CHECK(fr.verdict.function_id == id);
        CHECK(fr.a.runs.size() == 8);
        CHECK(fr.b.runs.size() == 8);
        REQUIRE(fr.outcomes.size() == 2);
        std::size_t len = archive.config.budget_for(find_function(id));
        CHECK(fr.a.bands.median.size() == len);
        for (std::size_t i = 0; i < len; ++i) {
            CHECK(fr.a.bands.q25[i] <= fr.a.bands.median[i]);
            CHECK(fr.a.bands.median[i] <= fr.a.bands.q75[i]);
        }
    }
    for (const auto &[metric, h] : b.histograms) {
        std::size_t n = 0;
        for (const auto *side : {&h.a_bins, &h.b_bins}) {
            for (const auto &bin : *side) n += bin.size();
        }
        std::size_t equal = 0;
        for (const auto &[id, fr] : b.per_function) {
            for (const auto &o : fr.outcomes) equal += o.metric_name == metric && o.direction == Direction::equal_means;
        }
        CHECK(n + equal == 12);
    }
}

TEST_CASE("bands and outcomes match the metrics and stats modules") {
    const auto &archive = campaign_archive();
    auto b = build_report(archive, "pso", "rs");
    const auto &fr = b.per_function.at("neg_rastrigin_2d");

    std::vector<BestSeenTrace> traces;
    MetricSample best_a{"pso", "neg_rastrigin_2d", "best_found", {}};
    MetricSample best_b{"rs", "neg_rastrigin_2d", "best_found", {}};
    for (const auto &r : archive.records) {
        if (r.function_id != "neg_rastrigin_2d") continue;
        if (r.method_id == "pso") {
            traces.push_back(r.trace);
            best_a.values.push_back(r.metrics->best_found);
        } else {
            best_b.values.push_back(r.metrics->best_found);
        }
    }
    auto bands = trace_quantiles(traces);
    CHECK(fr.a.bands.median == bands.median);
    CHECK(fr.a.bands.q75 == bands.q75);
    auto o = compare(best_a, best_b, b.alpha);
    CHECK(fr.outcomes[0].p_value == o.p_value);
    CHECK(fr.outcomes[0].u_statistic == o.u_statistic);
}

TEST_CASE("self comparison is all ties with p = 1") {
    const auto &archive = campaign_archive();
    auto b = build_report(archive, "rs", "rs");
    CHECK(b.totals == TotalPerformance{0, 0, 12, 0});
    for (const auto &[id, fr] : b.per_function) {
        for (const auto &o : fr.outcomes) {
            CHECK(o.p_value == 1.0);
            CHECK(o.direction == Direction::equal_means);
        }
    }
}

TEST_CASE("engineered fixture totals") {
    auto archive = engineered_archive();
    auto b = build_report(archive, "A", "B");
    CHECK(b.totals == TotalPerformance{3, 1, 2, 0});
    CHECK(b.per_function.at("neg_griewank_2d").verdict.category == Category::lose);
    CHECK(b.per_function.at("cosine_bowl_2d").verdict.category == Category::tie);

    auto swapped = build_report(archive, "B", "A");
    CHECK(swapped.totals == TotalPerformance{1, 3, 2, 0});
}

TEST_CASE("serial and parallel reports agree and are stable") {
    const auto &archive = campaign_archive();
    auto par = to_json(build_report(archive, "pso", "rs"));
    CHECK(par == to_json(build_report_serial(archive, "pso", "rs")));
    CHECK(par.dump() == to_json(build_report(archive, "pso", "rs")).dump());
}

TEST_CASE("report errors") {
    const auto &archive = campaign_archive();
    CHECK(error_kind([&] { build_report(archive, "pso", "cmaes"); }) == ErrorKind::UnknownMethod);

    synthetic::RawRuns raw;
    raw["A"]["neg_sphere_2d"] = {{1.0}, {2.0}};
    raw["B"]["neg_sphere_2d"] = {{1.0}, {2.0}};
    auto a = synthetic::make_archive(raw, 2, 1);
    a.records.back() = synthetic::failed_record("B", "neg_sphere_2d", 1, "boom");
    CHECK(error_kind([&] { build_report(a, "A", "B"); }) == ErrorKind::NoComparableFunctions);
}

TEST_CASE("functions with failed or missing runs are excluded") {
    auto archive = engineered_archive();
    for (auto &r : archive.records) {
        if (r.method_id == "B" && r.function_id == "neg_sphere_5d" && r.repeat_index == 4) {
            r = synthetic::failed_record("B", "neg_sphere_5d", 4, "AdapterFailure: adapter exited with status 3");
        }
    }
    archive.records.erase(std::remove_if(archive.records.begin(), archive.records.end(),
                                         [](const RunRecord &r) {
                                             return r.method_id == "A" && r.function_id == "neg_ackley_2d" &&
                                                    r.repeat_index < 2;
                                         }),
                          archive.records.end());
    auto b = build_report(archive, "A", "B");
    CHECK(b.per_function.size() == 4);
    CHECK(b.totals == TotalPerformance{1, 1, 2, 0});
    REQUIRE(b.exclusions.size() == 2);
    CHECK(b.exclusions[0].function_id == "neg_ackley_2d");
    CHECK(b.exclusions[0].reason.find("missing") != std::string::npos);
    CHECK(b.exclusions[1].function_id == "neg_sphere_5d");
    CHECK(b.exclusions[1].reason.find("adapter exited") != std::string::npos);
    CHECK(dangling_references(b).empty());

    auto text = render_text_summary(b);
    CHECK(text.find("Exclusions") != std::string::npos);
    CHECK(text.find("neg_sphere_5d") != std::string::npos);
    CHECK(text.find("adapter exited") != std::string::npos);
}

TEST_CASE("text summary layout") {
    ReportBundle b;
    b.method_a = "A";
    b.method_b = "B";
    b.metrics = {"best_found", "auc"};
    b.totals = {65, 15, 51, 0};
    auto text = render_text_summary(b);
    CHECK(std::regex_search(text, std::regex("\\nWins +65\\n")));
    CHECK(std::regex_search(text, std::regex("\\nLoses +15\\n")));
    CHECK(std::regex_search(text, std::regex("\\nTies +51\\n")));
    CHECK(std::regex_search(text, std::regex("\\nMixed +0\\n")));
    CHECK(text.find("Exclusions") == std::string::npos);
    CHECK(text.find("best_found") != std::string::npos);

    ReportBundle c = b;
    c.method_b = "C";
    c.totals = {64, 14, 55, 0};
    std::vector<ReportBundle> cols{b, c};
    auto two = render_text_summary(cols);
    CHECK(std::regex_search(two, std::regex("A \\(vs\\) +B +C\\n")));
    CHECK(std::regex_search(two, std::regex("\\nWins +65 +64\\n")));
    CHECK(std::regex_search(two, std::regex("\\nTies +51 +55\\n")));

    c.method_a = "Z";
    std::vector<ReportBundle> bad{b, c};
    CHECK(error_kind([&] { render_text_summary(bad); }));
}

TEST_CASE("significance counts in the text summary") {
    auto b = build_report(engineered_archive(), "A", "B");
    auto text = render_text_summary(b);
    CHECK(std::regex_search(text, std::regex("best_found +3/1\\n")));
    CHECK(std::regex_search(text, std::regex("auc +3/1\\n")));
}

TEST_CASE("json round trip and schema check") {
    auto b = build_report(campaign_archive(), "pso", "rs");
    auto j = to_json(b);
    auto back = report_from_json(nlohmann::json::parse(j.dump()));
    CHECK(to_json(back) == j);
    for (const char *key : {"schema_version", "fingerprint", "pair", "alpha", "metrics", "per_function", "histograms",
                            "totals", "exclusions"}) {
        CHECK(j.contains(key));
    }
    CHECK(j["histograms"]["auc"]["edges"].size() == 7);
    CHECK(j["per_function"]["neg_sphere_2d"]["traces"]["a"].contains("median"));

    auto bad = j;
    bad["schema_version"] = "9.9";
    CHECK(error_kind([&] { report_from_json(bad); }) == ErrorKind::SchemaMismatch);
    bad = j;
    bad.erase("totals");
    CHECK(error_kind([&] { report_from_json(bad); }) == ErrorKind::SchemaMismatch);
}

TEST_CASE("dangling references are detected") {
    auto b = build_report(engineered_archive(), "A", "B");
    b.histograms["auc"].a_bins[0].push_back("ghost_fn");
    auto d = dangling_references(b);
    CHECK(d == std::vector<std::string>{"ghost_fn"});
}

TEST_CASE("dashboard export") {
    TempDir one("export1"), two("export2");
    auto b = build_report(campaign_archive(), "pso", "rs");
    export_dashboard_bundle(b, one.path());
    export_dashboard_bundle(b, two.path());
    export_dashboard_bundle(b, one.path());
    CHECK(slurp(one.path() / "report.json") == slurp(two.path() / "report.json"));
    CHECK(slurp(one.path() / "index.json") == slurp(two.path() / "index.json"));

    auto j = read_json_file(one.path() / "report.json");
    auto index = read_json_file(one.path() / "index.json");
    CHECK(index["report"] == "report.json");
    CHECK(index["function_ids"].size() == 12);
    for (const auto &[metric, h] : j["histograms"].items()) {
        for (const char *side : {"a_bins", "b_bins"}) {
            for (const auto &bin : h[side]) {
                for (const auto &id : bin) CHECK(j["per_function"].contains(id.get<std::string>()));
            }
        }
    }
}
