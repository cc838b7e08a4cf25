#include "bbeval/metrics.hpp"

#include "bbeval/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bbeval {

std::vector<std::string_view> metric_names() { return {metric_best_found, metric_auc}; }

double metric_value(const MetricVector &m, std::string_view name) {
    if (name == metric_best_found) return m.best_found;
    if (name == metric_auc) return m.auc;
    throw Error(ErrorKind::MissingMetric, "unknown metric '" + std::string(name) + "'");
}

BestSeenTrace best_seen_trace(std::span<const double> raw) {
    if (raw.empty()) throw Error(ErrorKind::EmptyRun, "no evaluations");
    BestSeenTrace t;
    t.values.reserve(raw.size());
    double best = raw.front();
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw[i])) {
            throw Error(ErrorKind::NonFiniteValue, "evaluation " + std::to_string(i) + " is not finite");
        }
        best = std::max(best, raw[i]);
        t.values.push_back(best);
    }
    return t;
}

BestSeenTrace extend_to(BestSeenTrace trace, std::size_t length) {
    if (!trace.values.empty() && trace.values.size() < length) {
        trace.values.resize(length, trace.values.back());
    }
    return trace;
}

MetricVector compute_metrics(const BestSeenTrace &trace) {
    if (trace.values.empty()) throw Error(ErrorKind::EmptyRun, "empty trace");
    MetricVector m;
    m.best_found = trace.values.back();
    // Averaging the shortfall keeps flat traces exact.
    double gap = 0.0;
    for (double v : trace.values) gap += m.best_found - v;
    m.auc = m.best_found - gap / static_cast<double>(trace.values.size());
    return m;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw Error(ErrorKind::EmptyRun, "quantile of empty sample");
    double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    auto lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

TraceBands trace_quantiles(std::span<const BestSeenTrace> traces) {
    if (traces.empty()) throw Error(ErrorKind::EmptyRun, "no traces");
    const std::size_t len = traces.front().values.size();
    for (const auto &t : traces) {
        if (t.values.size() != len) throw Error(ErrorKind::LengthMismatch, "traces differ in length");
    }
    TraceBands bands;
    bands.median.resize(len);
    bands.q25.resize(len);
    bands.q75.resize(len);
    std::vector<double> column(traces.size());
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t k = 0; k < traces.size(); ++k) column[k] = traces[k].values[i];
        std::sort(column.begin(), column.end());
        bands.q25[i] = quantile_sorted(column, 0.25);
        bands.median[i] = quantile_sorted(column, 0.5);
        bands.q75[i] = quantile_sorted(column, 0.75);
    }
    return bands;
}

} // namespace bbeval
