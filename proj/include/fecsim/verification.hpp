#pragma once

// End-to-end checks tying the simulator to its closed-form oracles and
// structural claims: M/M/1 equivalence of work-conserving policies at k=1,
// the Erlang-k M/G/1 value for greedy, gap growth in k, the exhaustively
// enumerated two-request example, sorted-departure dominance, pooled
// exponential service, order-statistic CCDFs, the redundancy tradeoff shape,
// the stability boundary, and byte-identical reruns.
//
// Every tolerance is pinned here. The smoke tier (default) runs 10
// replications x 20000 arrivals per sweep point; the full tier runs
// 50 x 62500.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "fecsim/oracles.hpp"
#include "fecsim/scenarios.hpp"

namespace fecsim {

struct VerifyOptions {
    bool full_tier = false;
    std::uint64_t seed = 2;
    unsigned workers = 0;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

inline constexpr double kOracleRelTol = 0.03;     // simulated vs closed-form mean
inline constexpr double kSupNormTol = 0.01;       // CCDF sup-norm distances
inline constexpr double kPooledMeanRelTol = 0.01; // min-of-L mean vs 1/(L*mu)
inline constexpr double kQueueGrowthBound = 0.2;  // stable vs diverging queues
inline constexpr double kEnumRelTol = 1e-9;       // enumerated expectations
inline constexpr double kAnalyticTol = 1e-12;     // pure closed-form identities

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

inline PresetOverrides tier_overrides(const VerifyOptions& opt) {
    PresetOverrides ov;
    ov.seed = opt.seed;
    ov.replications = opt.full_tier ? 50u : 10u;
    ov.arrivals = opt.full_tier ? 62500u : 20000u;
    return ov;
}

// mean(b - a) and its 95% halfwidth over paired replications.
inline std::pair<double, double> paired_diff_ci(const std::vector<double>& a,
                                                const std::vector<double>& b) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = b[i] - a[i];
    return replication_ci(d);
}

}  // namespace detail

// k=1: greedy and round-robin both match 1/(L*mu - lambda) and each other;
// sharing is strictly worse at every load.
inline CheckResult check_mm1_equivalence(const VerifyOptions& opt) {
    CheckResult res{"mm1-equivalence", true, ""};
    Scenario s = make_fig6_scenario(detail::tier_overrides(opt));
    RunOptions run_opt;
    run_opt.workers = opt.workers;
    auto points = run_scenario(s, run_opt);
    double worst_rel = 0.0;
    for (std::size_t i = 0; i < points.size(); i += 3) {
        const auto& greedy = points[i];
        const auto& rr = points[i + 1];
        const auto& sharing = points[i + 2];
        const double oracle = greedy.oracle;
        for (const auto* p : {&greedy, &rr}) {
            const double rel = std::abs(p->run.grand_mean - oracle) / oracle;
            worst_rel = std::max(worst_rel, rel);
            if (rel > kOracleRelTol) {
                res.pass = false;
                res.detail += " " + policy_name(p->policy) + "@rho=" +
                              detail::fmt(p->sweep_value) + " off by " +
                              detail::fmt(100 * rel) + "%;";
            }
        }
        const bool mutual =
            std::abs(greedy.run.grand_mean - rr.run.grand_mean) <=
                rr.run.ci95 &&
            std::abs(greedy.run.grand_mean - rr.run.grand_mean) <= greedy.run.ci95;
        if (!mutual) {
            res.pass = false;
            res.detail += " greedy/round_robin CIs separate at rho=" +
                          detail::fmt(greedy.sweep_value) + ";";
        }
        if (!(sharing.run.grand_mean > greedy.run.grand_mean &&
              sharing.run.grand_mean > rr.run.grand_mean)) {
            res.pass = false;
            res.detail += " sharing not strictly worse at rho=" +
                          detail::fmt(greedy.sweep_value) + ";";
        }
    }
    if (res.pass)
        res.detail = "worst |sim-oracle|/oracle = " + detail::fmt(100 * worst_rel) +
                     "% (tol " + detail::fmt(100 * kOracleRelTol) + "%)";
    return res;
}

// k=2: greedy matches the Erlang-k M/G/1 mean; round-robin is never better
// (paired comparison, CI-adjusted).
inline CheckResult check_greedy_pk_oracle(const VerifyOptions& opt) {
    CheckResult res{"greedy-pk-oracle", true, ""};
    Scenario s = make_fig7_scenario(detail::tier_overrides(opt));
    RunOptions run_opt;
    run_opt.workers = opt.workers;
    auto points = run_scenario(s, run_opt);
    double worst_rel = 0.0;
    for (std::size_t i = 0; i < points.size(); i += 2) {
        const auto& greedy = points[i];
        const auto& rr = points[i + 1];
        const double rel =
            std::abs(greedy.run.grand_mean - greedy.oracle) / greedy.oracle;
        worst_rel = std::max(worst_rel, rel);
        if (rel > kOracleRelTol) {
            res.pass = false;
            res.detail += " greedy@rho=" + detail::fmt(greedy.sweep_value) +
                          " off by " + detail::fmt(100 * rel) + "%;";
        }
        auto [gap, halfwidth] =
            detail::paired_diff_ci(greedy.run.rep_means, rr.run.rep_means);
        if (gap < -halfwidth) {
            res.pass = false;
            res.detail += " round_robin beat greedy at rho=" +
                          detail::fmt(greedy.sweep_value) + ";";
        }
    }
    if (res.pass)
        res.detail = "worst |sim-oracle|/oracle = " + detail::fmt(100 * worst_rel) +
                     "%, round_robin >= greedy at every point";
    return res;
}

// rho = 0.1: the (round_robin - greedy) gap is zero within CI at k=1 and
// non-decreasing in k.
inline CheckResult check_gap_growth(const VerifyOptions& opt) {
    CheckResult res{"gap-growth-in-k", true, ""};
    Scenario s = make_fig8_scenario(detail::tier_overrides(opt));
    RunOptions run_opt;
    run_opt.workers = opt.workers;
    auto points = run_scenario(s, run_opt);
    std::vector<double> gaps, halfwidths;
    for (std::size_t i = 0; i < points.size(); i += 2) {
        auto [gap, halfwidth] =
            detail::paired_diff_ci(points[i].run.rep_means, points[i + 1].run.rep_means);
        gaps.push_back(gap);
        halfwidths.push_back(halfwidth);
    }
    if (std::abs(gaps.front()) > halfwidths.front()) {
        res.pass = false;
        res.detail += " gap at k=1 (" + detail::fmt(gaps.front()) +
                      ") not zero within CI " + detail::fmt(halfwidths.front()) + ";";
    }
    for (std::size_t i = 0; i + 1 < gaps.size(); ++i) {
        const double slack =
            std::sqrt(halfwidths[i] * halfwidths[i] +
                      halfwidths[i + 1] * halfwidths[i + 1]);
        if (gaps[i + 1] < gaps[i] - slack) {
            res.pass = false;
            res.detail += " gap decreased from k=" + std::to_string(i + 1) + " to k=" +
                          std::to_string(i + 2) + ";";
        }
    }
    if (res.pass) {
        res.detail = "gaps:";
        for (double g : gaps) res.detail += " " + detail::fmt(g);
    }
    return res;
}

// The two-request worked example: exact enumeration values, and the engine
// reproduces them within 3% over 1e5 replications.
inline CheckResult check_two_request_example(const VerifyOptions& opt) {
    CheckResult res{"two-request-example", true, ""};
    const TwoPoint model{2.0 / 3.0, 0.0, 3000.0};

    auto [g1, g2] = two_request_expected_delays(model, PolicyKind::Greedy);
    auto [s1, s2] = two_request_expected_delays(model, PolicyKind::Sharing);
    auto close = [](double a, double b) {
        return std::abs(a - b) <= kEnumRelTol * std::max(std::abs(b), 1.0);
    };
    if (!close(g1, 1000.0 / 3.0) || !close(g2, 2000.0 / 3.0)) {
        res.pass = false;
        res.detail += " enumeration(greedy) = (" + detail::fmt(g1) + ", " +
                      detail::fmt(g2) + ") != (1000/3, 2000/3);";
    }
    if (!close(s1, 1000.0) || !close(s2, 1000.0)) {
        res.pass = false;
        res.detail += " enumeration(sharing) = (" + detail::fmt(s1) + ", " +
                      detail::fmt(s2) + ") != (1000, 1000);";
    }
    // Constant chunk time: sharing is never worse on either request.
    const TwoPoint constant{1.0, 7.0, 7.0};
    auto [cg1, cg2] = two_request_expected_delays(constant, PolicyKind::Greedy);
    auto [cs1, cs2] = two_request_expected_delays(constant, PolicyKind::Sharing);
    if (!(cs1 <= cg1 + kAnalyticTol && cs2 <= cg2 + kAnalyticTol)) {
        res.pass = false;
        res.detail += " sharing not <= greedy under constant chunk time;";
    }

    SimConfig cfg;
    cfg.arrival_rate = 1.0;  // unused; explicit arrivals below
    cfg.num_threads = 2;
    cfg.coding = {2, 1};
    cfg.service_model = model;
    cfg.num_arrivals = 2;
    cfg.master_seed = opt.seed;
    const std::vector<double> together{0.0, 0.0};
    const std::uint32_t reps = 100000;
    for (PolicyKind kind : {PolicyKind::Greedy, PolicyKind::Sharing}) {
        cfg.policy = {kind, 0};
        double sum1 = 0.0, sum2 = 0.0;
        for (std::uint32_t r = 0; r < reps; ++r) {
            auto out = simulate_with_arrivals(cfg, r, together);
            sum1 += out.records.records[0].delay_ms;
            sum2 += out.records.records[1].delay_ms;
        }
        const double m1 = sum1 / reps, m2 = sum2 / reps;
        const double e1 = kind == PolicyKind::Greedy ? g1 : s1;
        const double e2 = kind == PolicyKind::Greedy ? g2 : s2;
        if (std::abs(m1 - e1) / e1 > kOracleRelTol ||
            std::abs(m2 - e2) / e2 > kOracleRelTol) {
            res.pass = false;
            res.detail += " sim(" + policy_name({kind, 0}) + ") = (" +
                          detail::fmt(m1) + ", " + detail::fmt(m2) + ") vs (" +
                          detail::fmt(e1) + ", " + detail::fmt(e2) + ");";
        }
    }
    if (res.pass)
        res.detail = "enumeration exact; simulation within " +
                     detail::fmt(100 * kOracleRelTol) + "% over " +
                     std::to_string(reps) + " replications";
    return res;
}

// Sorted-departure dominance on randomized paths and partitions: the greedy
// completion-time sum never exceeds the alternative's.
inline CheckResult check_coupling_dominance(const VerifyOptions& opt) {
    CheckResult res{"coupling-dominance", true, ""};
    std::uint64_t cases = 0;
    RngStream rng(opt.seed, {hash_label("coupling")});
    for (std::uint32_t k : {2u, 3u, 4u}) {
        for (int trial = 0; trial < 1000; ++trial) {
            const std::uint32_t requests =
                3 + static_cast<std::uint32_t>(rng.next_uniform() * 8.0);
            const std::uint32_t chunks = requests * k;
            std::vector<double> arrivals(chunks), services(chunks);
            double t = 0.0;
            for (std::uint32_t i = 0; i < chunks; ++i) {
                t += -std::log1p(-rng.next_uniform());
                arrivals[i] = t;
                services[i] = 0.05 + 2.0 * rng.next_uniform();
            }
            auto path = make_effective_chunk_path(arrivals, services);

            std::vector<std::uint32_t> order(chunks);
            for (std::uint32_t i = 0; i < chunks; ++i) order[i] = i;
            for (std::uint32_t i = chunks - 1; i > 0; --i) {
                auto j = static_cast<std::uint32_t>(rng.next_uniform() * (i + 1));
                std::swap(order[i], order[std::min(j, i)]);
            }
            std::vector<std::vector<std::uint32_t>> blocks(requests);
            for (std::uint32_t i = 0; i < chunks; ++i)
                blocks[i / k].push_back(order[i]);

            auto check = coupled_departure_check(path, k, blocks);
            ++cases;
            if (!check.dominance) {
                res.pass = false;
                res.detail += " counterexample at k=" + std::to_string(k) +
                              " trial " + std::to_string(trial) + ";";
            }

            if (trial == 0) {
                // The greedy partition itself must give exact equality.
                std::vector<std::vector<std::uint32_t>> identity(requests);
                for (std::uint32_t i = 0; i < chunks; ++i)
                    identity[i / k].push_back(i);
                auto same = coupled_departure_check(path, k, identity);
                if (same.greedy_sum != same.alt_sum || !same.dominance) {
                    res.pass = false;
                    res.detail += " identity partition not an exact tie at k=" +
                                  std::to_string(k) + ";";
                }
            }
        }
    }
    if (res.pass)
        res.detail = "dominance held on " + std::to_string(cases) +
                     " randomized (path, partition) instances";
    return res;
}

// With all L threads busy, the next chunk departs after an Exp(L*mu) time:
// empirical mean of min-of-L draws within 1%, CCDF within 0.01 sup-norm.
inline CheckResult check_pooled_exponential_rate(const VerifyOptions& opt) {
    CheckResult res{"pooled-exponential-rate", true, ""};
    const std::uint32_t threads = 16;
    const double mu = 0.01;
    const double pooled_mean = 1.0 / (threads * mu);
    const ServiceTimeModel model = Exponential{mu};
    const std::uint32_t trials = 1000000;

    RngStream stream(opt.seed, {hash_label("pooled-min")});
    std::vector<double> mins(trials);
    double sum = 0.0;
    for (std::uint32_t i = 0; i < trials; ++i) {
        double m = sample(model, stream);
        for (std::uint32_t l = 1; l < threads; ++l)
            m = std::min(m, sample(model, stream));
        mins[i] = m;
        sum += m;
    }
    const double mean = sum / trials;
    const double rel = std::abs(mean - pooled_mean) / pooled_mean;
    if (rel > kPooledMeanRelTol) {
        res.pass = false;
        res.detail += " mean of min " + detail::fmt(mean) + " vs " +
                      detail::fmt(pooled_mean) + " (" + detail::fmt(100 * rel) + "%);";
    }

    std::vector<double> grid(100);
    for (int i = 0; i < 100; ++i)
        grid[i] = 5.0 * pooled_mean * (i + 1) / 100.0;
    auto empirical = ccdf(mins, grid);
    double sup = 0.0;
    for (int i = 0; i < 100; ++i)
        sup = std::max(sup,
                       std::abs(empirical[i] - std::exp(-(threads * mu) * grid[i])));
    if (sup > kSupNormTol) {
        res.pass = false;
        res.detail += " CCDF sup-norm " + detail::fmt(sup) + ";";
    }
    if (res.pass)
        res.detail = "mean err " + detail::fmt(100 * rel) + "%, CCDF sup-norm " +
                     detail::fmt(sup);
    return res;
}

// Analytic order-statistic CCDF: reproduces the two-point 1/9 probability
// exactly, is non-increasing in r, and matches the engine within 0.01
// sup-norm at 1e5 single-request replications.
inline CheckResult check_order_statistic_ccdf(const VerifyOptions& opt) {
    CheckResult res{"order-statistic-ccdf", true, ""};
    const double two_point_tail =
        order_statistic_ccdf(TwoPoint{2.0 / 3.0, 0.0, 3000.0}, 2, 1, 2999.0);
    if (std::abs(two_point_tail - 1.0 / 9.0) > kAnalyticTol) {
        res.pass = false;
        res.detail += " P(min of 2 > 2999) = " + detail::fmt(two_point_tail) +
                      " != 1/9;";
    }

    CcdfScenario s = make_fig10_scenario(PresetOverrides{
        opt.seed, std::uint32_t{100000}, std::nullopt, std::nullopt});
    s.r_values = {2, 4, 16};
    auto families = run_ccdf_unlimited(s, opt.workers);
    double worst = 0.0;
    for (const auto& fam : families) {
        worst = std::max(worst, fam.sup_distance);
        if (fam.sup_distance > kSupNormTol) {
            res.pass = false;
            res.detail += " r=" + std::to_string(fam.r) + " sup-norm " +
                          detail::fmt(fam.sup_distance) + ";";
        }
    }
    for (std::size_t f = 0; f + 1 < families.size(); ++f)
        for (std::size_t i = 0; i < s.t_grid.size(); ++i)
            if (families[f + 1].analytic[i] > families[f].analytic[i] + kAnalyticTol) {
                res.pass = false;
                res.detail += " CCDF increased from r=" +
                              std::to_string(families[f].r) + " to r=" +
                              std::to_string(families[f + 1].r) + ";";
                break;
            }
    if (res.pass)
        res.detail = "two-point tail exact; worst simulated sup-norm " +
                     detail::fmt(worst);
    return res;
}

// Fixed-redundancy sweep on the trace-like model: delay is U-shaped in m
// (interior minimum) while service time never increases.
inline CheckResult check_redundancy_tradeoff(const VerifyOptions& opt) {
    CheckResult res{"redundancy-tradeoff", true, ""};
    PresetOverrides ov;
    ov.seed = opt.seed;
    ov.replications = opt.full_tier ? 50u : 10u;
    ov.arrivals = opt.full_tier ? 10000u : 5000u;
    TradeoffScenario s = make_fig9_scenario(ov);
    RunOptions run_opt;
    run_opt.workers = opt.workers;
    auto points = run_tradeoff(s, run_opt);

    std::size_t argmin = 0;
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].run.grand_mean < points[argmin].run.grand_mean) argmin = i;
    if (argmin == 0 || argmin + 1 == points.size()) {
        res.pass = false;
        res.detail += " delay minimum at edge m=" +
                      std::to_string(points[argmin].m) + ";";
    }
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        std::vector<double> service_a, service_b;
        for (const auto& rep : points[i].run.reps) service_a.push_back(rep.mean_service);
        for (const auto& rep : points[i + 1].run.reps)
            service_b.push_back(rep.mean_service);
        auto [diff, halfwidth] = detail::paired_diff_ci(service_a, service_b);
        if (diff > halfwidth) {  // service time increased beyond noise
            res.pass = false;
            res.detail += " service time increased from m=" +
                          std::to_string(points[i].m) + " to m=" +
                          std::to_string(points[i + 1].m) + ";";
        }
    }
    if (res.pass)
        res.detail = "delay minimum interior at m=" + std::to_string(points[argmin].m) +
                     " (delay " + detail::fmt(points[argmin].run.grand_mean) +
                     " ms); service time non-increasing";
    return res;
}

// Work-conserving policies just inside the boundary lambda = L*mu/k stay
// flat; just outside, the queue-slope statistic flags divergence.
inline CheckResult check_stability_boundary(const VerifyOptions& opt) {
    CheckResult res{"stability-boundary", true, ""};
    SimConfig cfg;
    cfg.num_threads = 16;
    cfg.coding = {17, 2};
    cfg.service_model = Exponential{0.25};
    cfg.num_arrivals = 20000;
    cfg.master_seed = opt.seed;
    cfg.replications = opt.full_tier ? 24 : 16;
    const double boundary =
        capacity_boundary(cfg.num_threads, 0.25, cfg.coding.k);  // 2 req/ms
    RunOptions run_opt;
    run_opt.workers = opt.workers;
    run_opt.keep_delays = false;

    for (PolicyKind kind : {PolicyKind::Greedy, PolicyKind::RoundRobin}) {
        cfg.policy = {kind, 0};
        cfg.arrival_rate = 0.95 * boundary;
        auto stable = run_replications(cfg, run_opt);
        cfg.arrival_rate = 1.05 * boundary;
        auto unstable = run_replications(cfg, run_opt);
        if (!std::isfinite(stable.grand_mean) ||
            stable.mean_queue_growth > kQueueGrowthBound) {
            res.pass = false;
            res.detail += " " + policy_name({kind, 0}) +
                          " flagged divergent at 0.95*boundary (growth " +
                          detail::fmt(stable.mean_queue_growth) + ");";
        }
        if (unstable.mean_queue_growth <= kQueueGrowthBound) {
            res.pass = false;
            res.detail += " " + policy_name({kind, 0}) +
                          " not flagged at 1.05*boundary (growth " +
                          detail::fmt(unstable.mean_queue_growth) + ");";
        }
        if (res.pass)
            res.detail += " " + policy_name({kind, 0}) + ": growth " +
                          detail::fmt(stable.mean_queue_growth) + " vs " +
                          detail::fmt(unstable.mean_queue_growth) + ";";
    }
    return res;
}

// Identical (preset, seed) runs serialize to byte-identical CSV, and the
// worker count does not affect output.
inline CheckResult check_deterministic_output(const VerifyOptions& opt) {
    CheckResult res{"deterministic-output", true, ""};
    PresetOverrides ov;
    ov.seed = opt.seed;
    ov.replications = 3;
    ov.arrivals = 2000;

    auto csv_of = [&](auto make, unsigned workers) {
        auto scenario = make(ov);
        RunOptions run_opt;
        run_opt.workers = workers;
        if constexpr (std::is_same_v<decltype(scenario), Scenario>) {
            Scenario small = scenario;
            if (small.sweep == SweepVar::Load)
                small.sweep_values = {small.sweep_values.front(),
                                      small.sweep_values.back()};
            return scenario_result_table(run_scenario(small, run_opt)).to_csv();
        } else if constexpr (std::is_same_v<decltype(scenario), TradeoffScenario>) {
            TradeoffScenario small = scenario;
            small.base.num_arrivals = 1000;
            small.m_values = {2, 3, 4};
            return tradeoff_result_table(run_tradeoff(small, run_opt)).to_csv();
        } else {
            CcdfScenario small = scenario;
            small.replications = 2000;
            small.r_values = {2, 4};
            return ccdf_result_table(small, run_ccdf_unlimited(small, workers))
                .to_csv();
        }
    };

    auto expect_equal = [&](const std::string& name, const std::string& a,
                            const std::string& b) {
        if (a != b) {
            res.pass = false;
            res.detail += " " + name + " differs between runs;";
        }
    };
    expect_equal("fig6", csv_of([](const PresetOverrides& o) { return make_fig6_scenario(o); }, opt.workers),
                 csv_of([](const PresetOverrides& o) { return make_fig6_scenario(o); }, opt.workers));
    expect_equal("fig6-workers", csv_of([](const PresetOverrides& o) { return make_fig6_scenario(o); }, 1),
                 csv_of([](const PresetOverrides& o) { return make_fig6_scenario(o); }, 2));
    expect_equal("fig7", csv_of([](const PresetOverrides& o) { return make_fig7_scenario(o); }, opt.workers),
                 csv_of([](const PresetOverrides& o) { return make_fig7_scenario(o); }, opt.workers));
    expect_equal("fig8", csv_of([](const PresetOverrides& o) { return make_fig8_scenario(o); }, opt.workers),
                 csv_of([](const PresetOverrides& o) { return make_fig8_scenario(o); }, opt.workers));
    expect_equal("fig9", csv_of([](const PresetOverrides& o) { return make_fig9_scenario(o); }, opt.workers),
                 csv_of([](const PresetOverrides& o) { return make_fig9_scenario(o); }, opt.workers));
    expect_equal("fig10", csv_of([](const PresetOverrides& o) { return make_fig10_scenario(o); }, opt.workers),
                 csv_of([](const PresetOverrides& o) { return make_fig10_scenario(o); }, opt.workers));
    if (res.pass) res.detail = "all presets byte-identical across reruns and worker counts";
    return res;
}

// Quick oracle/property subset (no long sweeps).
inline std::vector<CheckResult> verify_quick(const VerifyOptions& opt) {
    return {check_two_request_example(opt), check_coupling_dominance(opt),
            check_pooled_exponential_rate(opt), check_order_statistic_ccdf(opt)};
}

inline std::vector<CheckResult> verify_all(const VerifyOptions& opt) {
    return {check_mm1_equivalence(opt),
            check_greedy_pk_oracle(opt),
            check_gap_growth(opt),
            check_two_request_example(opt),
            check_coupling_dominance(opt),
            check_pooled_exponential_rate(opt),
            check_order_statistic_ccdf(opt),
            check_redundancy_tradeoff(opt),
            check_stability_boundary(opt),
            check_deterministic_output(opt)};
}

}  // namespace fecsim
