#pragma once

// Estimators over delay samples and replication summaries: mean delay, CCDF,
// nearest-rank percentiles, replication confidence intervals, lag
// autocorrelation, and the load identity rho = lambda/(L*mu).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fecsim/engine.hpp"
#include "fecsim/errors.hpp"

namespace fecsim {

inline double load(double lambda, std::uint32_t threads, double mu) {
    return lambda / (static_cast<double>(threads) * mu);
}

inline double mean_of(std::span<const double> samples) {
    if (samples.empty()) throw EmptySet("mean of empty sample set");
    double acc = 0.0;
    for (double x : samples) acc += x;
    return acc / static_cast<double>(samples.size());
}

inline double mean_delay(const DelayRecordSet& set) {
    if (set.records.empty()) throw EmptySet("mean_delay of empty record set");
    double acc = 0.0;
    for (const auto& r : set.records) acc += r.delay_ms;
    return acc / static_cast<double>(set.records.size());
}

// P(sample > t) at each grid point; right-continuous, matching the analytic
// CCDF convention in the oracles.
inline std::vector<double> ccdf(std::span<const double> samples,
                                std::span<const double> grid) {
    if (samples.empty()) throw EmptySet("ccdf of empty sample set");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out;
    out.reserve(grid.size());
    const double n = static_cast<double>(sorted.size());
    for (double t : grid) {
        auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
        out.push_back(static_cast<double>(above) / n);
    }
    return out;
}

// Nearest-rank percentile on a sorted copy: level p in (0,100].
inline double percentile(std::span<const double> samples, double level) {
    if (samples.empty()) throw EmptySet("percentile of empty sample set");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    auto rank = static_cast<std::size_t>(
        std::ceil(level / 100.0 * static_cast<double>(sorted.size())));
    if (rank < 1) rank = 1;
    if (rank > sorted.size()) rank = sorted.size();
    return sorted[rank - 1];
}

// Pearson correlation between the series and its lag-shifted self, each side
// centered by its own mean. Exactly -1 for an alternating series at lag 1.
inline double autocorrelation(std::span<const double> samples, std::size_t lag) {
    if (lag < 1) throw ConfigError("autocorrelation lag must be >= 1");
    if (samples.size() < lag + 2)
        throw EmptySet("autocorrelation needs at least lag+2 samples");
    const std::size_t n = samples.size() - lag;
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += samples[i];
        mean_b += samples[i + lag];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = samples[i] - mean_a;
        const double db = samples[i + lag] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a <= 0.0 || var_b <= 0.0)
        throw DegenerateVariance("autocorrelation of a constant series");
    return cov / std::sqrt(var_a * var_b);
}

// Grand mean and 95% halfwidth (normal approximation, sample stdev).
inline std::pair<double, double> replication_ci(std::span<const double> means) {
    if (means.size() < 2)
        throw TooFewReplications("confidence interval needs >= 2 replications");
    const double grand = mean_of(means);
    double ss = 0.0;
    for (double m : means) ss += (m - grand) * (m - grand);
    const double stdev = std::sqrt(ss / static_cast<double>(means.size() - 1));
    const double halfwidth =
        1.96 * stdev / std::sqrt(static_cast<double>(means.size()));
    return {grand, halfwidth};
}

struct SummaryStats {
    double mean = 0.0;
    double p50 = 0.0;
    double p80 = 0.0;
    double p95 = 0.0;
    double p99 = 0.0;
    double p999 = 0.0;
    double ci95_halfwidth = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<double, double>> ccdf;  // (t, P(D > t))
};

inline SummaryStats summarize(std::span<const double> delays,
                              std::span<const double> replication_means,
                              std::size_t ccdf_points = 50) {
    if (delays.empty()) throw EmptySet("summarize of empty sample set");
    SummaryStats s;
    s.mean = mean_of(delays);
    s.p50 = percentile(delays, 50.0);
    s.p80 = percentile(delays, 80.0);
    s.p95 = percentile(delays, 95.0);
    s.p99 = percentile(delays, 99.0);
    s.p999 = percentile(delays, 99.9);
    if (replication_means.size() >= 2)
        s.ci95_halfwidth = replication_ci(replication_means).second;

    const double hi = std::max(s.p999 * 1.25, 1e-12);
    std::vector<double> grid(ccdf_points);
    for (std::size_t i = 0; i < ccdf_points; ++i)
        grid[i] = hi * static_cast<double>(i) / static_cast<double>(ccdf_points - 1);
    auto probs = ccdf(delays, grid);
    s.ccdf.reserve(ccdf_points);
    for (std::size_t i = 0; i < ccdf_points; ++i) s.ccdf.emplace_back(grid[i], probs[i]);
    return s;
}

inline nlohmann::ordered_json to_json(const SummaryStats& s) {
    nlohmann::ordered_json j;
    j["mean_ms"] = s.mean;
    j["p50_ms"] = s.p50;
    j["p80_ms"] = s.p80;
    j["p95_ms"] = s.p95;
    j["p99_ms"] = s.p99;
    j["p99.9_ms"] = s.p999;
    if (std::isfinite(s.ci95_halfwidth)) j["ci95_halfwidth_ms"] = s.ci95_halfwidth;
    auto arr = nlohmann::ordered_json::array();
    for (auto [t, p] : s.ccdf) arr.push_back({{"t_ms", t}, {"p_gt", p}});
    j["ccdf"] = arr;
    return j;
}

}  // namespace fecsim
