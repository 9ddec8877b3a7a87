#pragma once

// Experiment presets and sweep runners. A Scenario derives one SimConfig per
// (sweep value, policy) pair, runs it through the replication pool, and
// attaches the applicable closed-form oracle. Load sweeps fix lambda and L
// and derive mu from rho = lambda/(L*mu).

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fecsim/oracles.hpp"
#include "fecsim/runner.hpp"

namespace fecsim {

enum class SweepVar { None, Load, CodeDimension };

inline std::string sweep_name(SweepVar v) {
    switch (v) {
        case SweepVar::None: return "none";
        case SweepVar::Load: return "rho";
        case SweepVar::CodeDimension: return "k";
    }
    return "?";
}

struct Scenario {
    std::string name;
    SimConfig base;
    SweepVar sweep = SweepVar::None;
    std::vector<double> sweep_values;  // rho grid, k grid, or {0} for none
    std::vector<PolicySpec> policies;
    bool mm1_oracle = false;      // attach 1/(L*mu - lambda) to k=1 rows
    bool merlang_oracle = false;  // attach the Erlang-k M/G/1 value to greedy rows
};

struct ScenarioPoint {
    std::string scenario;
    std::string sweep;
    double sweep_value = 0.0;
    PolicySpec policy;
    SimConfig cfg;
    double oracle = std::numeric_limits<double>::quiet_NaN();
    RunResult run;
};

inline SimConfig derive_config(const Scenario& s, double sweep_value,
                               const PolicySpec& policy) {
    SimConfig cfg = s.base;
    cfg.policy = policy;
    switch (s.sweep) {
        case SweepVar::None:
            break;
        case SweepVar::Load: {
            const double mu =
                cfg.arrival_rate / (static_cast<double>(cfg.num_threads) * sweep_value);
            cfg.service_model = Exponential{mu};
            break;
        }
        case SweepVar::CodeDimension: {
            cfg.coding.k = static_cast<std::uint32_t>(sweep_value);
            cfg.coding.n = cfg.num_threads + cfg.coding.k - 1;
            break;
        }
    }
    return cfg;
}

inline double scenario_oracle(const Scenario& s, const SimConfig& cfg) {
    const auto* exp_model = std::get_if<Exponential>(&cfg.service_model);
    if (!exp_model) return std::numeric_limits<double>::quiet_NaN();
    const bool work_conserving = cfg.policy.kind == PolicyKind::Greedy ||
                                 cfg.policy.kind == PolicyKind::RoundRobin;
    if (s.mm1_oracle && cfg.coding.k == 1 && work_conserving)
        return mm1_mean_delay(cfg.arrival_rate, cfg.num_threads, exp_model->rate);
    if (s.merlang_oracle && cfg.policy.kind == PolicyKind::Greedy)
        return merlang_mean_delay(cfg.arrival_rate, cfg.num_threads, exp_model->rate,
                                  cfg.coding.k);
    return std::numeric_limits<double>::quiet_NaN();
}

inline std::vector<ScenarioPoint> run_scenario(const Scenario& s,
                                               const RunOptions& opt = {}) {
    std::vector<ScenarioPoint> points;
    RunOptions run_opt = opt;
    run_opt.keep_delays = false;
    run_opt.keep_service = false;
    run_opt.output_dir.clear();
    for (double value : s.sweep_values) {
        for (const PolicySpec& policy : s.policies) {
            ScenarioPoint p;
            p.scenario = s.name;
            p.sweep = sweep_name(s.sweep);
            p.sweep_value = value;
            p.policy = policy;
            p.cfg = derive_config(s, value, policy);
            auto errors = validate_config(p.cfg);
            if (!errors.empty()) {
                std::string what = s.name + " at " + p.sweep + "=" +
                                   format_double(value) + ", " + policy_name(policy) +
                                   ": invalid config:";
                for (const auto& e : errors) what += " [" + e + "]";
                throw ConfigError(what);
            }
            try {
                p.oracle = scenario_oracle(s, p.cfg);
                p.run = run_replications(p.cfg, run_opt);
            } catch (const SimError& e) {
                throw SimError(s.name + " at " + p.sweep + "=" + format_double(value) +
                               ", " + policy_name(policy) + ": " + e.what());
            }
            points.push_back(std::move(p));
        }
    }
    return points;
}

// Fixed-redundancy sweep: mean delay, mean service time (first thread start
// to departure), and the queueing component (their difference) per m.
struct TradeoffScenario {
    std::string name;
    SimConfig base;                      // policy field ignored
    std::vector<std::uint32_t> m_values;  // within [k, n]
};

struct TradeoffPoint {
    std::string scenario;
    std::uint32_t m = 0;
    SimConfig cfg;
    RunResult run;
    double mean_service = 0.0;
    double queueing = 0.0;  // run.grand_mean - mean_service
};

inline std::vector<TradeoffPoint> run_tradeoff(const TradeoffScenario& s,
                                               const RunOptions& opt = {}) {
    std::vector<TradeoffPoint> points;
    RunOptions run_opt = opt;
    run_opt.keep_delays = false;
    run_opt.keep_service = false;
    run_opt.output_dir.clear();
    for (std::uint32_t m : s.m_values) {
        TradeoffPoint p;
        p.scenario = s.name;
        p.m = m;
        p.cfg = s.base;
        p.cfg.policy = {PolicyKind::FixedRedundancy, m};
        auto errors = validate_config(p.cfg);
        if (!errors.empty()) {
            std::string what = s.name + " at m=" + std::to_string(m) + ": invalid config:";
            for (const auto& e : errors) what += " [" + e + "]";
            throw ConfigError(what);
        }
        try {
            p.run = run_replications(p.cfg, run_opt);
        } catch (const SimError& e) {
            throw SimError(s.name + " at m=" + std::to_string(m) + ": " + e.what());
        }
        double service = 0.0;
        for (const auto& rep : p.run.reps) service += rep.mean_service;
        p.mean_service = service / static_cast<double>(p.run.reps.size());
        p.queueing = p.run.grand_mean - p.mean_service;
        points.push_back(std::move(p));
    }
    return points;
}

// Service-time CCDF with effectively unlimited bandwidth: a single request,
// r simultaneous chunk downloads, delay = k-th order statistic. Analytic
// values cross-checked against the engine.
struct CcdfScenario {
    std::string name;
    ServiceTimeModel model = Exponential{1.0};
    std::uint32_t k = 1;
    std::uint32_t threads = 16;  // >= max r
    std::vector<std::uint32_t> r_values;
    std::vector<double> t_grid;
    std::uint32_t replications = 100000;
    std::uint64_t master_seed = 1;
};

struct CcdfFamily {
    std::uint32_t r = 0;
    std::vector<double> analytic;   // per t grid point
    std::vector<double> simulated;  // per t grid point
    double sup_distance = 0.0;
};

inline std::vector<CcdfFamily> run_ccdf_unlimited(const CcdfScenario& s,
                                                  unsigned workers = 0) {
    for (std::uint32_t r : s.r_values) {
        if (r < s.k) throw ConfigError("ccdf scenario requires r >= k");
        if (r > s.threads) throw ConfigError("ccdf scenario requires L >= max r");
    }
    std::vector<CcdfFamily> families;
    const std::vector<double> single_arrival{0.0};
    for (std::uint32_t r : s.r_values) {
        SimConfig cfg;
        cfg.arrival_rate = 1.0;  // unused; arrivals are explicit
        cfg.num_threads = s.threads;
        cfg.coding = {s.threads + s.k - 1, s.k};
        cfg.policy = {PolicyKind::FixedRedundancy, r};
        cfg.service_model = s.model;
        cfg.num_arrivals = 1;
        cfg.master_seed = s.master_seed;
        cfg.replications = s.replications;

        std::vector<double> delays(s.replications);
        unsigned w = workers ? workers : std::thread::hardware_concurrency();
        if (w < 1) w = 1;
        std::atomic<std::uint32_t> next{0};
        auto work = [&]() {
            for (;;) {
                const std::uint32_t i = next.fetch_add(1);
                if (i >= s.replications) break;
                auto res = simulate_with_arrivals(cfg, i, single_arrival);
                delays[i] = res.records.records.front().delay_ms;
            }
        };
        if (w <= 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < w; ++t) pool.emplace_back(work);
            for (auto& t : pool) t.join();
        }

        CcdfFamily fam;
        fam.r = r;
        fam.analytic.reserve(s.t_grid.size());
        for (double t : s.t_grid)
            fam.analytic.push_back(order_statistic_ccdf(s.model, r, s.k, t));
        fam.simulated = ccdf(delays, s.t_grid);
        for (std::size_t i = 0; i < s.t_grid.size(); ++i)
            fam.sup_distance = std::max(
                fam.sup_distance, std::abs(fam.analytic[i] - fam.simulated[i]));
        families.push_back(std::move(fam));
    }
    return families;
}

// ---------------------------------------------------------------------------
// Result tables. Cells are JSON values so the CSV/JSON/table writers agree on
// formatting; null renders as an empty cell.

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::ordered_json>> rows;

    std::string to_csv() const {
        std::ostringstream out;
        for (std::size_t c = 0; c < columns.size(); ++c)
            out << (c ? "," : "") << columns[c];
        out << "\n";
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out << ",";
                out << cell_text(row[c]);
            }
            out << "\n";
        }
        return out.str();
    }

    std::string to_table() const {
        std::vector<std::size_t> width(columns.size());
        for (std::size_t c = 0; c < columns.size(); ++c) width[c] = columns[c].size();
        std::vector<std::vector<std::string>> cells;
        cells.reserve(rows.size());
        for (const auto& row : rows) {
            std::vector<std::string> line;
            for (std::size_t c = 0; c < row.size(); ++c) {
                line.push_back(cell_text(row[c]));
                width[c] = std::max(width[c], line.back().size());
            }
            cells.push_back(std::move(line));
        }
        std::ostringstream out;
        auto emit = [&](const std::vector<std::string>& line) {
            for (std::size_t c = 0; c < line.size(); ++c)
                out << (c ? "  " : "") << std::setw(static_cast<int>(width[c]))
                    << line[c];
            out << "\n";
        };
        emit(columns);
        for (const auto& line : cells) emit(line);
        return out.str();
    }

    nlohmann::ordered_json to_json() const {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& row : rows) {
            nlohmann::ordered_json obj;
            for (std::size_t c = 0; c < row.size() && c < columns.size(); ++c)
                obj[columns[c]] = row[c];
            arr.push_back(std::move(obj));
        }
        return arr;
    }

private:
    static std::string cell_text(const nlohmann::ordered_json& v) {
        if (v.is_null()) return "";
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    }
};

inline nlohmann::ordered_json number_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

inline ResultTable scenario_result_table(const std::vector<ScenarioPoint>& points) {
    ResultTable t;
    t.columns = {"scenario",     "sweep",        "value",       "policy",
                 "lambda",       "L",            "mu",          "k",
                 "n",            "m",            "replications", "num_arrivals",
                 "seed",         "fingerprint",  "mean_delay_ms", "ci95_ms",
                 "oracle_ms"};
    for (const auto& p : points) {
        const auto* exp_model = std::get_if<Exponential>(&p.cfg.service_model);
        t.rows.push_back(
            {p.scenario, p.sweep, p.sweep_value, policy_name(p.policy),
             p.cfg.arrival_rate, p.cfg.num_threads,
             exp_model ? nlohmann::ordered_json(exp_model->rate)
                       : nlohmann::ordered_json(nullptr),
             p.cfg.coding.k, p.cfg.coding.n,
             p.policy.kind == PolicyKind::FixedRedundancy
                 ? nlohmann::ordered_json(p.policy.redundancy)
                 : nlohmann::ordered_json(nullptr),
             p.cfg.replications, p.cfg.num_arrivals, p.cfg.master_seed,
             p.run.fingerprint, p.run.grand_mean, number_or_null(p.run.ci95),
             number_or_null(p.oracle)});
    }
    return t;
}

inline ResultTable tradeoff_result_table(const std::vector<TradeoffPoint>& points) {
    ResultTable t;
    t.columns = {"scenario",     "m",          "policy",        "lambda",
                 "L",            "k",          "n",             "replications",
                 "num_arrivals", "seed",       "fingerprint",   "mean_delay_ms",
                 "ci95_ms",      "mean_service_ms", "queueing_ms"};
    for (const auto& p : points) {
        t.rows.push_back({p.scenario, p.m, policy_name(p.cfg.policy),
                          p.cfg.arrival_rate, p.cfg.num_threads, p.cfg.coding.k,
                          p.cfg.coding.n, p.cfg.replications, p.cfg.num_arrivals,
                          p.cfg.master_seed, p.run.fingerprint, p.run.grand_mean,
                          number_or_null(p.run.ci95), p.mean_service, p.queueing});
    }
    return t;
}

inline ResultTable ccdf_result_table(const CcdfScenario& s,
                                     const std::vector<CcdfFamily>& families) {
    ResultTable t;
    t.columns = {"scenario", "r", "k", "t_ms", "analytic_ccdf", "simulated_ccdf"};
    for (const auto& fam : families)
        for (std::size_t i = 0; i < s.t_grid.size(); ++i)
            t.rows.push_back({s.name, fam.r, s.k, s.t_grid[i], fam.analytic[i],
                              fam.simulated[i]});
    return t;
}

// ---------------------------------------------------------------------------
// Presets mirroring the standard experiment setups: lambda = 50, L = 16,
// n = L+k-1, 62500 arrivals, mu derived from the swept load.

struct PresetOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> replications;
    std::optional<std::uint32_t> arrivals;
    std::optional<std::string> trace_path;  // service model for fig9/fig10
};

namespace detail {

inline SimConfig preset_base(const PresetOverrides& ov) {
    SimConfig cfg;
    cfg.arrival_rate = 50.0;
    cfg.num_threads = 16;
    cfg.num_arrivals = ov.arrivals.value_or(62500);
    cfg.master_seed = ov.seed.value_or(1);
    cfg.replications = ov.replications.value_or(50);
    cfg.warmup_discard = 0;
    cfg.strict_chunk_limit = true;
    // Paired policy comparisons run with common random numbers; marginal
    // per-policy statistics are unaffected.
    cfg.crn_mode = true;
    return cfg;
}

inline ServiceTimeModel trace_like_model(const PresetOverrides& ov) {
    if (ov.trace_path) {
        Trace trace = load_trace(*ov.trace_path);
        return Empirical{
            std::make_shared<const std::vector<double>>(std::move(trace.samples)),
            *ov.trace_path};
    }
    // Synthetic stand-in for measured chunk delays: 100 ms floor plus a
    // 400 ms-mean exponential tail.
    return ShiftedExponential{100.0, 0.0025};
}

}  // namespace detail

// k=1 load sweep, greedy vs round-robin vs sharing, M/M/1 oracle.
inline Scenario make_fig6_scenario(const PresetOverrides& ov = {}) {
    Scenario s;
    s.name = "fig6";
    s.base = detail::preset_base(ov);
    s.base.coding = {16, 1};
    s.sweep = SweepVar::Load;
    s.sweep_values = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    s.policies = {{PolicyKind::Greedy, 0},
                  {PolicyKind::RoundRobin, 0},
                  {PolicyKind::Sharing, 0}};
    s.mm1_oracle = true;
    return s;
}

// k=2 load sweep over the stable region (lambda*k < L*mu), greedy vs
// round-robin, Erlang-k M/G/1 oracle for greedy.
inline Scenario make_fig7_scenario(const PresetOverrides& ov = {}) {
    Scenario s;
    s.name = "fig7";
    s.base = detail::preset_base(ov);
    s.base.coding = {17, 2};
    s.sweep = SweepVar::Load;
    s.sweep_values = {0.1, 0.2, 0.3, 0.4};
    s.policies = {{PolicyKind::Greedy, 0}, {PolicyKind::RoundRobin, 0}};
    s.merlang_oracle = true;
    return s;
}

// Fixed rho = 0.1, k in {1,2,3,4}: the greedy vs round-robin gap grows with k.
inline Scenario make_fig8_scenario(const PresetOverrides& ov = {}) {
    Scenario s;
    s.name = "fig8";
    s.base = detail::preset_base(ov);
    const double rho = 0.1;
    s.base.service_model =
        Exponential{s.base.arrival_rate / (16.0 * rho)};  // mu from Eq. rho=lambda/(L*mu)
    s.base.coding = {16, 1};  // k, n derived per sweep point
    s.sweep = SweepVar::CodeDimension;
    s.sweep_values = {1, 2, 3, 4};
    s.policies = {{PolicyKind::Greedy, 0}, {PolicyKind::RoundRobin, 0}};
    s.merlang_oracle = true;
    return s;
}

// Redundancy tradeoff on a trace-like service model at low load: delay vs m
// is U-shaped while service time keeps improving.
inline TradeoffScenario make_fig9_scenario(const PresetOverrides& ov = {}) {
    TradeoffScenario s;
    s.name = "fig9";
    s.base = detail::preset_base(ov);
    s.base.service_model = detail::trace_like_model(ov);
    s.base.coding = {17, 2};
    // rho = lambda/(L*mu) = 0.05 with the synthetic model's mu = 0.0025. At
    // this load the service-time column stays monotone in m while the
    // queueing penalty still turns the delay curve back up before m = n.
    s.base.arrival_rate = 0.002;
    s.base.num_arrivals = ov.arrivals.value_or(10000);
    for (std::uint32_t m = 2; m <= 17; ++m) s.m_values.push_back(m);
    return s;
}

// Order-statistic service-time CCDF with unlimited bandwidth.
inline CcdfScenario make_fig10_scenario(const PresetOverrides& ov = {}) {
    CcdfScenario s;
    s.name = "fig10";
    s.model = detail::trace_like_model(ov);
    s.k = 2;
    s.threads = 16;
    s.r_values = {2, 3, 4, 8, 16};
    s.t_grid.reserve(200);
    for (int i = 0; i < 200; ++i) s.t_grid.push_back(12.0 * i);
    s.replications = ov.replications.value_or(100000);
    s.master_seed = ov.seed.value_or(1);
    return s;
}

}  // namespace fecsim
