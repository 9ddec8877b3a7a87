#pragma once

// Closed-form and brute-force references the simulator is checked against:
// M/M/1 and M/Erlang-k/1 mean delays, the sorted-departure coupling check,
// order-statistic CCDFs, the stability boundary, and the exhaustive
// enumeration of the two-request two-point example.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "fecsim/core.hpp"
#include "fecsim/errors.hpp"
#include "fecsim/service_models.hpp"

namespace fecsim {

// Pooled service rate boundary: the maximum stable request arrival rate for
// any work-conserving policy.
inline double capacity_boundary(std::uint32_t threads, double mu, std::uint32_t k) {
    return static_cast<double>(threads) * mu / static_cast<double>(k);
}

// k = 1: every work-conserving policy behaves as an M/M/1 queue with pooled
// service rate L*mu. Mean sojourn time 1/(L*mu - lambda).
inline double mm1_mean_delay(double lambda, std::uint32_t threads, double mu) {
    const double pooled = static_cast<double>(threads) * mu;
    if (lambda >= pooled)
        throw Unstable("mm1_mean_delay: lambda >= L*mu");
    return 1.0 / (pooled - lambda);
}

// Greedy with k > 1 serves requests one at a time; each request is k pooled
// service stages, i.e. Erlang(k, L*mu) service in an M/G/1 queue. Mean delay
// from Pollaczek-Khinchine: lambda*E[S^2] / (2*(1 - lambda*E[S])) + E[S].
inline double merlang_mean_delay(double lambda, std::uint32_t threads, double mu,
                                 std::uint32_t k) {
    const double pooled = static_cast<double>(threads) * mu;
    const double es = static_cast<double>(k) / pooled;
    const double rho = lambda * es;
    if (rho >= 1.0)
        throw Unstable("merlang_mean_delay: lambda*k >= L*mu");
    const double es2 =
        static_cast<double>(k) * static_cast<double>(k + 1) / (pooled * pooled);
    return lambda * es2 / (2.0 * (1.0 - rho)) + es;
}

// Single-server path of effective chunks: arrival instants s_i, service times
// S_i, departures t_i = max(s_i, t_{i-1}) + S_i.
struct EffectiveChunkPath {
    std::vector<double> arrivals;
    std::vector<double> services;
    std::vector<double> departures;
};

inline EffectiveChunkPath make_effective_chunk_path(std::vector<double> arrivals,
                                                    std::vector<double> services) {
    if (arrivals.size() != services.size() || arrivals.empty())
        throw MalformedAssignment("path needs equal, non-zero arrival/service counts");
    EffectiveChunkPath path;
    path.departures.resize(arrivals.size());
    double prev_t = -std::numeric_limits<double>::infinity();
    double prev_s = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
        if (arrivals[i] <= prev_s)
            throw MalformedAssignment("chunk arrivals must be strictly increasing");
        if (!(services[i] > 0.0))
            throw MalformedAssignment("chunk service times must be > 0");
        prev_s = arrivals[i];
        const double start = std::max(arrivals[i], prev_t);
        path.departures[i] = start + services[i];
        prev_t = path.departures[i];
    }
    path.arrivals = std::move(arrivals);
    path.services = std::move(services);
    return path;
}

struct CouplingCheck {
    double greedy_sum = 0.0;  // sum over requests of t_{i*k}
    double alt_sum = 0.0;     // sum over requests of t_{max index of its block}
    bool dominance = false;   // greedy_sum <= alt_sum
};

// The sorted-departure comparison: under greedy, request i finishes with the
// (i*k)-th effective chunk; any alternative partition of the same departure
// path into per-request blocks of k chunks finishes request i at its block's
// last chunk. Summed completion times must favor greedy on every path.
//
// `blocks` is a partition of {0, ..., N*k-1} (indices into path.departures)
// into N blocks of exactly k.
inline CouplingCheck coupled_departure_check(
    const EffectiveChunkPath& path, std::uint32_t k,
    const std::vector<std::vector<std::uint32_t>>& blocks) {
    const std::size_t total = path.departures.size();
    if (k == 0 || total % k != 0 || blocks.size() != total / k)
        throw MalformedAssignment("assignment is not a partition into k-blocks");
    std::vector<bool> seen(total, false);
    std::vector<std::uint32_t> completion_indices;
    completion_indices.reserve(blocks.size());
    for (const auto& block : blocks) {
        if (block.size() != k)
            throw MalformedAssignment("every block must contain exactly k chunks");
        std::uint32_t last = 0;
        for (std::uint32_t idx : block) {
            if (idx >= total || seen[idx])
                throw MalformedAssignment("block indices must partition the path");
            seen[idx] = true;
            last = std::max(last, idx);
        }
        completion_indices.push_back(last);
    }

    // Summing both sides in ascending index order keeps the comparison exact
    // when the alternative coincides with greedy.
    std::sort(completion_indices.begin(), completion_indices.end());
    CouplingCheck result;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        result.greedy_sum += path.departures[(i + 1) * k - 1];
        result.alt_sum += path.departures[completion_indices[i]];
    }
    result.dominance = result.greedy_sum <= result.alt_sum;
    return result;
}

// P(k-th smallest of r i.i.d. draws > t): fewer than k of the r draws are
// <= t, so sum_{j<k} C(r,j) F^j (1-F)^(r-j).
inline double order_statistic_ccdf(const ServiceTimeModel& model, std::uint32_t r,
                                   std::uint32_t k, double t) {
    if (k < 1 || k > r)
        throw ConfigError("order_statistic_ccdf requires 1 <= k <= r");
    const double f = cdf(model, t);
    const double q = 1.0 - f;
    double binom = 1.0;  // C(r, j), running
    double term = std::pow(q, static_cast<double>(r));
    double sum = 0.0;
    for (std::uint32_t j = 0; j < k; ++j) {
        if (j > 0) {
            binom *= static_cast<double>(r - j + 1) / static_cast<double>(j);
            term = binom * std::pow(f, static_cast<double>(j)) *
                   std::pow(q, static_cast<double>(r - j));
        }
        sum += term;
    }
    return std::min(1.0, std::max(0.0, sum));
}

// Exact per-request expected delays for the fixed worked scenario: two
// requests arriving together, L = 2 threads, coding (2,1), two-point chunk
// time. Pure enumeration over the finite outcome tree; independent of the
// event-driven engine.
inline std::pair<double, double> two_request_expected_delays(const TwoPoint& model,
                                                             PolicyKind policy) {
    const double values[2] = {model.value0, model.value1};
    const double probs[2] = {model.p0, 1.0 - model.p0};
    double e1 = 0.0, e2 = 0.0;
    if (policy == PolicyKind::Greedy) {
        // Both threads work on request 1; on its first completed chunk the
        // sibling is terminated and both threads redraw for request 2.
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c)
                    for (int d = 0; d < 2; ++d) {
                        const double p = probs[a] * probs[b] * probs[c] * probs[d];
                        const double d1 = std::min(values[a], values[b]);
                        const double d2 = d1 + std::min(values[c], values[d]);
                        e1 += p * d1;
                        e2 += p * d2;
                    }
    } else if (policy == PolicyKind::Sharing) {
        // One thread each, started immediately.
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const double p = probs[a] * probs[b];
                e1 += p * values[a];
                e2 += p * values[b];
            }
    } else {
        throw ConfigError("two_request_expected_delays covers greedy and sharing");
    }
    return {e1, e2};
}

}  // namespace fecsim
