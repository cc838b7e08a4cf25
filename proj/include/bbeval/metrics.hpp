#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace bbeval {

// Running maximum of the objective after each evaluation.
struct BestSeenTrace {
    std::vector<double> values;

    bool operator==(const BestSeenTrace &) const = default;
};

struct MetricVector {
    double best_found = 0.0;
    double auc = 0.0;

    bool operator==(const MetricVector &) const = default;
};

inline constexpr std::string_view metric_best_found = "best_found";
inline constexpr std::string_view metric_auc = "auc";

// Metric names in their canonical order.
std::vector<std::string_view> metric_names();
double metric_value(const MetricVector &m, std::string_view name);

// Throws EmptyRun or NonFiniteValue.
BestSeenTrace best_seen_trace(std::span<const double> raw);

// Right-extends with the final value so early-stopped runs span the budget.
BestSeenTrace extend_to(BestSeenTrace trace, std::size_t length);

// auc is the mean of the step function over its length.
MetricVector compute_metrics(const BestSeenTrace &trace);

struct TraceBands {
    std::vector<double> median;
    std::vector<double> q25;
    std::vector<double> q75;
};

// Linear interpolation between order statistics, h = (n - 1) p.
double quantile_sorted(std::span<const double> sorted, double p);

// Pointwise quantiles across equal-length traces. Throws LengthMismatch, or
// EmptyRun for an empty list.
TraceBands trace_quantiles(std::span<const BestSeenTrace> traces);

} // namespace bbeval
