#include "bbeval/stats.hpp"

#include "bbeval/errors.hpp"
#include "bbeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bbeval {

namespace {

struct RankSummary {
    double rank_sum_a = 0.0;
    double tie_term = 0.0;
    bool has_ties = false;
};

RankSummary rank_samples(std::span<const double> a, std::span<const double> b) {
    struct Tagged {
        double value;
        bool from_a;
    };
    std::vector<Tagged> pooled;
    pooled.reserve(a.size() + b.size());
    for (double v : a) pooled.push_back({v, true});
    for (double v : b) pooled.push_back({v, false});
    std::sort(pooled.begin(), pooled.end(), [](const Tagged &x, const Tagged &y) { return x.value < y.value; });

    RankSummary s;
    std::size_t i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j].value == pooled[i].value) ++j;
        const double t = static_cast<double>(j - i);
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k) {
            if (pooled[k].from_a) s.rank_sum_a += avg_rank;
        }
        if (t > 1) {
            s.has_ties = true;
            s.tie_term += t * t * t - t;
        }
        i = j;
    }
    return s;
}

} // namespace

std::vector<double> mann_whitney_null_pmf(std::size_t n_a, std::size_t n_b) {
    // p_{i,j}(u) = i/(i+j) p_{i-1,j}(u-j) + j/(i+j) p_{i,j-1}(u): condition on
    // whether the largest pooled value comes from A. All terms are positive,
    // so the recurrence is stable in floating point at any size.
    std::vector<std::vector<double>> prev(n_b + 1, std::vector<double>{1.0});
    std::vector<std::vector<double>> cur(n_b + 1);
    for (std::size_t i = 1; i <= n_a; ++i) {
        cur[0] = {1.0};
        for (std::size_t j = 1; j <= n_b; ++j) {
            std::vector<double> pmf(i * j + 1, 0.0);
            const double wa = static_cast<double>(i) / static_cast<double>(i + j);
            const double wb = static_cast<double>(j) / static_cast<double>(i + j);
            const auto &from_a = prev[j];    // (i-1, j), support 0..(i-1)j
            const auto &from_b = cur[j - 1]; // (i, j-1), support 0..i(j-1)
            for (std::size_t u = 0; u < from_a.size(); ++u) pmf[u + j] += wa * from_a[u];
            for (std::size_t u = 0; u < from_b.size(); ++u) pmf[u] += wb * from_b[u];
            cur[j] = std::move(pmf);
        }
        std::swap(prev, cur);
    }
    return prev[n_b];
}

double mann_whitney_exact_p(std::size_t n_a, std::size_t n_b, double u) {
    const auto pmf = mann_whitney_null_pmf(n_a, n_b);
    double lower = 0.0, upper = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        const double kk = static_cast<double>(k);
        if (kk <= u + 1e-9) lower += pmf[k];
        if (kk >= u - 1e-9) upper += pmf[k];
    }
    return std::min(1.0, 2.0 * std::min(lower, upper));
}

double mann_whitney_normal_p(std::size_t n_a, std::size_t n_b, double u, double tie_term) {
    const double na = static_cast<double>(n_a);
    const double nb = static_cast<double>(n_b);
    const double n = na + nb;
    const double mu = 0.5 * na * nb;
    const double var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (!(var > 0.0)) return 1.0;
    const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(var);
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

MwuResult mann_whitney_u(std::span<const double> a, std::span<const double> b, MwuMode mode) {
    if (a.size() < 2 || b.size() < 2) {
        throw Error(ErrorKind::SampleTooSmall, "Mann-Whitney U needs at least 2 values per sample");
    }
    const auto rs = rank_samples(a, b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());

    MwuResult r;
    r.u_a = rs.rank_sum_a - na * (na + 1.0) / 2.0;
    r.u_b = na * nb - r.u_a;

    bool exact = false;
    switch (mode) {
    case MwuMode::exact:
        if (rs.has_ties) throw Error(ErrorKind::ExactModeWithTies, "exact mode requested but samples contain ties");
        exact = true;
        break;
    case MwuMode::approximate: exact = false; break;
    case MwuMode::automatic: exact = !rs.has_ties && std::min(a.size(), b.size()) <= 10; break;
    }
    r.used_exact = exact;
    r.p_value = exact ? mann_whitney_exact_p(a.size(), b.size(), r.u_a)
                      : mann_whitney_normal_p(a.size(), b.size(), r.u_a, rs.tie_term);
    return r;
}

double MetricSample::mean() const {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::string_view to_string(Direction d) {
    switch (d) {
    case Direction::a_higher: return "a_higher";
    case Direction::b_higher: return "b_higher";
    case Direction::equal_means: return "equal_means";
    }
    return "unknown";
}

Direction direction_from_string(std::string_view s) {
    if (s == "a_higher") return Direction::a_higher;
    if (s == "b_higher") return Direction::b_higher;
    if (s == "equal_means") return Direction::equal_means;
    throw Error(ErrorKind::SchemaMismatch, "unknown direction '" + std::string(s) + "'");
}

ComparisonOutcome compare(const MetricSample &a, const MetricSample &b, double alpha) {
    if (a.function_id != b.function_id || a.metric_name != b.metric_name) {
        throw Error(ErrorKind::MismatchedSamples, "samples " + a.function_id + "/" + a.metric_name + " and " +
                                                      b.function_id + "/" + b.metric_name + " are not comparable");
    }
    const auto test = mann_whitney_u(a.values, b.values);
    ComparisonOutcome o;
    o.function_id = a.function_id;
    o.metric_name = a.metric_name;
    o.mean_a = a.mean();
    o.mean_b = b.mean();
    o.u_statistic = test.u_a;
    o.p_value = test.p_value;
    o.direction = o.mean_a > o.mean_b   ? Direction::a_higher
                  : o.mean_a < o.mean_b ? Direction::b_higher
                                        : Direction::equal_means;
    o.significant = o.p_value <= alpha;
    return o;
}

bool signf_win(const MetricSample &a, const MetricSample &b, double alpha) {
    const auto o = compare(a, b, alpha);
    return o.direction == Direction::a_higher && o.significant;
}

namespace {

void require_unique_functions(std::span<const ComparisonOutcome> outcomes) {
    std::set<std::string> seen;
    for (const auto &o : outcomes) {
        if (!seen.insert(o.function_id).second) {
            throw Error(ErrorKind::DuplicateFunction, "function '" + o.function_id + "' appears twice");
        }
    }
}

} // namespace

WinSets win_sets(std::span<const ComparisonOutcome> outcomes) {
    require_unique_functions(outcomes);
    WinSets w;
    for (const auto &o : outcomes) {
        if (o.direction == Direction::a_higher) w.wins_a.insert(o.function_id);
        if (o.direction == Direction::b_higher) w.wins_b.insert(o.function_id);
    }
    return w;
}

std::string_view to_string(Category c) {
    switch (c) {
    case Category::win: return "win";
    case Category::lose: return "lose";
    case Category::tie: return "tie";
    case Category::mixed: return "mixed";
    }
    return "unknown";
}

Category category_from_string(std::string_view s) {
    if (s == "win") return Category::win;
    if (s == "lose") return Category::lose;
    if (s == "tie") return Category::tie;
    if (s == "mixed") return Category::mixed;
    throw Error(ErrorKind::SchemaMismatch, "unknown category '" + std::string(s) + "'");
}

FunctionVerdict classify(std::span<const ComparisonOutcome> per_metric, double alpha,
                         std::span<const std::string_view> metrics) {
    FunctionVerdict v;
    if (!per_metric.empty()) v.function_id = per_metric.front().function_id;
    for (const auto &o : per_metric) {
        if (o.function_id != v.function_id) {
            throw Error(ErrorKind::MissingMetric, "outcomes mix functions '" + v.function_id + "' and '" +
                                                      o.function_id + "'");
        }
    }
    for (auto name : metrics) {
        bool found = std::any_of(per_metric.begin(), per_metric.end(),
                                 [&](const ComparisonOutcome &o) { return o.metric_name == name; });
        if (!found) {
            throw Error(ErrorKind::MissingMetric,
                        "function '" + v.function_id + "' has no outcome for metric '" + std::string(name) + "'");
        }
    }

    bool improved = false;
    bool regressed = false;
    for (const auto &o : per_metric) {
        if (!(o.p_value <= alpha)) continue;
        // A significant outcome with exactly equal means counts for neither side.
        if (o.direction == Direction::a_higher) improved = true;
        if (o.direction == Direction::b_higher) regressed = true;
    }
    v.category = improved && regressed ? Category::mixed
                 : improved            ? Category::win
                 : regressed           ? Category::lose
                                       : Category::tie;
    v.per_metric.assign(per_metric.begin(), per_metric.end());
    return v;
}

FunctionVerdict classify(std::span<const ComparisonOutcome> per_metric, double alpha) {
    const auto names = metric_names();
    return classify(per_metric, alpha, names);
}

TotalPerformance total_performance(std::span<const FunctionVerdict> verdicts) {
    TotalPerformance t;
    for (const auto &v : verdicts) {
        switch (v.category) {
        case Category::win: ++t.wins; break;
        case Category::lose: ++t.loses; break;
        case Category::tie: ++t.ties; break;
        case Category::mixed: ++t.mixed; break;
        }
    }
    return t;
}

std::vector<double> default_pvalue_edges() { return {0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0}; }

std::size_t pvalue_bin(std::span<const double> edges, double p) {
    const std::size_t bins = edges.size() - 1;
    for (std::size_t k = 0; k + 1 < bins; ++k) {
        if (p < edges[k + 1]) return k;
    }
    return bins - 1;
}

PValueHistogram pvalue_histogram(std::span<const ComparisonOutcome> outcomes, std::span<const double> edges) {
    require_unique_functions(outcomes);
    PValueHistogram h;
    h.edges.assign(edges.begin(), edges.end());
    h.a_bins.resize(edges.size() - 1);
    h.b_bins.resize(edges.size() - 1);
    for (const auto &o : outcomes) {
        if (o.direction == Direction::equal_means) continue;
        auto &bins = o.direction == Direction::a_higher ? h.a_bins : h.b_bins;
        bins[pvalue_bin(edges, o.p_value)].push_back(o.function_id);
    }
    for (auto *side : {&h.a_bins, &h.b_bins}) {
        for (auto &bin : *side) std::sort(bin.begin(), bin.end());
    }
    return h;
}

PValueHistogram pvalue_histogram(std::span<const ComparisonOutcome> outcomes) {
    const auto edges = default_pvalue_edges();
    return pvalue_histogram(outcomes, edges);
}

} // namespace bbeval
