#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bbeval {

enum class MwuMode { exact, approximate, automatic };

struct MwuResult {
    double u_a = 0.0;
    double u_b = 0.0;
    double p_value = 1.0;
    bool used_exact = false;
};

/// Two-sided Mann-Whitney U test.
///
/// U_A = R_A - n_a (n_a + 1) / 2 with average ranks for ties. Exact mode uses
/// the permutation distribution of U and rejects tied data. Approximate mode
/// is the normal approximation with tie-corrected variance and a 0.5
/// continuity correction; a zero variance (all pooled values equal) gives
/// p = 1. Automatic picks exact for tie-free data with min(n_a, n_b) <= 10.
///
/// Throws SampleTooSmall (either side < 2) or ExactModeWithTies.
MwuResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                         MwuMode mode = MwuMode::automatic);

// Null distribution of U for tie-free samples, pmf[u] for u = 0..n_a n_b.
std::vector<double> mann_whitney_null_pmf(std::size_t n_a, std::size_t n_b);

// Two-sided exact p for an observed U: min(1, 2 min(P(U <= u), P(U >= u))).
double mann_whitney_exact_p(std::size_t n_a, std::size_t n_b, double u);

// tie_term is sum over tie groups of (t^3 - t).
double mann_whitney_normal_p(std::size_t n_a, std::size_t n_b, double u, double tie_term);

struct MetricSample {
    std::string method_id;
    std::string function_id;
    std::string metric_name;
    std::vector<double> values;

    double mean() const;
};

enum class Direction { a_higher, b_higher, equal_means };
std::string_view to_string(Direction d);
Direction direction_from_string(std::string_view s);

struct ComparisonOutcome {
    std::string function_id;
    std::string metric_name;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double u_statistic = 0.0;
    double p_value = 1.0;
    Direction direction = Direction::equal_means;
    bool significant = false;

    bool operator==(const ComparisonOutcome &) const = default;
};

inline constexpr double default_alpha = 0.01;

// Throws MismatchedSamples when function or metric differ.
ComparisonOutcome compare(const MetricSample &a, const MetricSample &b, double alpha = default_alpha);

// mean(a) > mean(b) and p <= alpha.
bool signf_win(const MetricSample &a, const MetricSample &b, double alpha = default_alpha);

struct WinSets {
    std::set<std::string> wins_a;
    std::set<std::string> wins_b;
};

// Split by sample-mean direction only; equal means land in neither set.
// Throws DuplicateFunction.
WinSets win_sets(std::span<const ComparisonOutcome> outcomes);

enum class Category { win, lose, tie, mixed };
std::string_view to_string(Category c);
Category category_from_string(std::string_view s);

struct FunctionVerdict {
    std::string function_id;
    Category category = Category::tie;
    std::vector<ComparisonOutcome> per_metric;
};

// Per-function verdict from A's perspective. Throws MissingMetric if any of
// `metrics` has no outcome, or if outcomes refer to different functions.
FunctionVerdict classify(std::span<const ComparisonOutcome> per_metric, double alpha,
                         std::span<const std::string_view> metrics);
FunctionVerdict classify(std::span<const ComparisonOutcome> per_metric, double alpha = default_alpha);

struct TotalPerformance {
    std::size_t wins = 0;
    std::size_t loses = 0;
    std::size_t ties = 0;
    std::size_t mixed = 0;

    std::size_t total() const { return wins + loses + ties + mixed; }
    bool operator==(const TotalPerformance &) const = default;
};

TotalPerformance total_performance(std::span<const FunctionVerdict> verdicts);

std::vector<double> default_pvalue_edges();

// Bins are [e_k, e_{k+1}); the last bin also includes its right edge.
std::size_t pvalue_bin(std::span<const double> edges, double p);

struct PValueHistogram {
    std::vector<double> edges;
    std::vector<std::vector<std::string>> a_bins;
    std::vector<std::vector<std::string>> b_bins;
};

// Function ids split by win_sets then binned by p-value; ids sorted within a bin.
// Throws DuplicateFunction.
PValueHistogram pvalue_histogram(std::span<const ComparisonOutcome> outcomes,
                                 std::span<const double> edges);
PValueHistogram pvalue_histogram(std::span<const ComparisonOutcome> outcomes);

} // namespace bbeval
