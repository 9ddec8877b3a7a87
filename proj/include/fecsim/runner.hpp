#pragma once

// Replication coordinator: dispatches independent replications to a worker
// pool, reduces each to a summary (optionally pooling raw delays and service
// times), and merges by replication index so results do not depend on
// completion order. Also owns the per-replication CSV and run-summary JSON
// emitters.

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fecsim/config.hpp"
#include "fecsim/engine.hpp"
#include "fecsim/stats.hpp"

namespace fecsim {

struct RunOptions {
    unsigned workers = 0;       // 0 = hardware concurrency
    bool keep_delays = true;    // pool per-request delays across replications
    bool keep_service = false;  // pool per-request service times
    std::string output_dir;     // when set, write per-replication CSVs there
};

struct RepSummary {
    std::uint32_t replication = 0;
    std::size_t count = 0;
    double mean_delay = 0.0;
    double mean_service = 0.0;
    std::uint64_t attempts_started = 0;
    std::uint64_t attempts_terminated = 0;
    std::uint64_t wc_violation_count = 0;
    double wc_violation_time_ms = 0.0;
    double queue_mean = 0.0;
    double queue_growth = 0.0;
    std::uint32_t queue_max = 0;
    bool model_extension = false;
};

struct RunResult {
    SimConfig cfg;
    std::string fingerprint;
    std::vector<RepSummary> reps;       // by replication index
    std::vector<double> rep_means;      // convenience copy, same order
    std::vector<double> delays;         // pooled, replication order (optional)
    std::vector<double> service_times;  // pooled (optional)
    double grand_mean = 0.0;            // mean of per-replication means
    double ci95 = std::numeric_limits<double>::quiet_NaN();
    double mean_queue_growth = 0.0;
    std::uint64_t wc_violation_count_total = 0;
    double wc_violation_time_total_ms = 0.0;
    bool model_extension = false;
};

// Stable schema: request_id,arrival_ms,departure_ms,delay_ms,attempts_started,
// attempts_terminated.
inline void write_delay_csv(const DelayRecordSet& set, std::ostream& out) {
    out << "request_id,arrival_ms,departure_ms,delay_ms,attempts_started,"
           "attempts_terminated\n";
    for (const auto& r : set.records) {
        out << r.request_id << ',' << format_double(r.arrival_ms) << ','
            << format_double(r.departure_ms) << ',' << format_double(r.delay_ms)
            << ',' << r.attempts_started << ',' << r.attempts_terminated << '\n';
    }
}

inline RunResult run_replications(const SimConfig& cfg, const RunOptions& opt = {}) {
    auto errors = validate_config(cfg);
    if (!errors.empty()) {
        std::string what = "invalid config:";
        for (const auto& e : errors) what += " [" + e + "]";
        throw ConfigError(what);
    }

    const std::uint32_t reps = cfg.replications;
    const std::string fingerprint = config_fingerprint(cfg);

    struct Slot {
        RepSummary summary;
        std::vector<double> delays;
        std::vector<double> service;
    };
    std::vector<Slot> slots(reps);

    if (!opt.output_dir.empty())
        std::filesystem::create_directories(opt.output_dir);

    std::atomic<std::uint32_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto work = [&]() {
        for (;;) {
            const std::uint32_t i = next.fetch_add(1);
            if (i >= reps || failed.load()) break;
            try {
                ReplicationResult res = simulate(cfg, i);
                res.records.config_fingerprint = fingerprint;
                Slot& slot = slots[i];
                auto& s = slot.summary;
                s.replication = i;
                s.count = res.records.records.size();
                double delay_sum = 0.0, service_sum = 0.0;
                for (const auto& r : res.records.records) {
                    delay_sum += r.delay_ms;
                    service_sum += r.departure_ms - r.first_start_ms;
                }
                s.mean_delay = delay_sum / static_cast<double>(s.count);
                s.mean_service = service_sum / static_cast<double>(s.count);
                s.attempts_started = res.attempts_started_total;
                s.attempts_terminated = res.attempts_terminated_total;
                s.wc_violation_count = res.work_conservation.violation_count;
                s.wc_violation_time_ms = res.work_conservation.violation_time_ms;
                s.queue_mean = res.queue.mean_in_system;
                s.queue_growth = res.queue.growth();
                s.queue_max = res.queue.max_in_system;
                s.model_extension = res.model_extension;
                if (opt.keep_delays) {
                    slot.delays.reserve(s.count);
                    for (const auto& r : res.records.records)
                        slot.delays.push_back(r.delay_ms);
                }
                if (opt.keep_service) {
                    slot.service.reserve(s.count);
                    for (const auto& r : res.records.records)
                        slot.service.push_back(r.departure_ms - r.first_start_ms);
                }
                if (!opt.output_dir.empty()) {
                    std::ostringstream name;
                    name << "rep_" << std::setw(4) << std::setfill('0') << i << ".csv";
                    std::ofstream out(std::filesystem::path(opt.output_dir) /
                                      name.str());
                    write_delay_csv(res.records, out);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                break;
            }
        }
    };

    unsigned workers = opt.workers ? opt.workers : std::thread::hardware_concurrency();
    if (workers < 1) workers = 1;
    workers = std::min<unsigned>(workers, reps);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    RunResult result;
    result.cfg = cfg;
    result.fingerprint = fingerprint;
    result.reps.reserve(reps);
    for (Slot& slot : slots) {
        result.reps.push_back(slot.summary);
        result.rep_means.push_back(slot.summary.mean_delay);
        if (opt.keep_delays)
            result.delays.insert(result.delays.end(), slot.delays.begin(),
                                 slot.delays.end());
        if (opt.keep_service)
            result.service_times.insert(result.service_times.end(),
                                        slot.service.begin(), slot.service.end());
        result.mean_queue_growth += slot.summary.queue_growth;
        result.wc_violation_count_total += slot.summary.wc_violation_count;
        result.wc_violation_time_total_ms += slot.summary.wc_violation_time_ms;
        result.model_extension |= slot.summary.model_extension;
    }
    result.grand_mean = mean_of(result.rep_means);
    result.mean_queue_growth /= static_cast<double>(reps);
    if (reps >= 2) result.ci95 = replication_ci(result.rep_means).second;
    return result;
}

inline nlohmann::ordered_json run_summary_json(const RunResult& run) {
    nlohmann::ordered_json j;
    j["config"] = serialize_config(run.cfg);
    j["fingerprint"] = run.fingerprint;
    j["master_seed"] = run.cfg.master_seed;
    j["replications"] = run.reps.size();
    j["grand_mean_delay_ms"] = run.grand_mean;
    if (std::isfinite(run.ci95)) j["ci95_halfwidth_ms"] = run.ci95;
    j["work_conservation_violations"] = run.wc_violation_count_total;
    j["work_conservation_violation_time_ms"] = run.wc_violation_time_total_ms;
    j["mean_queue_growth"] = run.mean_queue_growth;
    if (run.model_extension) j["model_extension"] = true;
    if (!run.delays.empty()) j["summary"] = to_json(summarize(run.delays, run.rep_means));
    auto reps = nlohmann::ordered_json::array();
    for (const auto& r : run.reps) {
        reps.push_back({{"replication", r.replication},
                        {"count", r.count},
                        {"mean_delay_ms", r.mean_delay},
                        {"mean_service_ms", r.mean_service},
                        {"attempts_started", r.attempts_started},
                        {"attempts_terminated", r.attempts_terminated},
                        {"wc_violations", r.wc_violation_count},
                        {"wc_violation_time_ms", r.wc_violation_time_ms},
                        {"queue_mean", r.queue_mean},
                        {"queue_growth", r.queue_growth},
                        {"queue_max", r.queue_max}});
    }
    j["per_replication"] = reps;
    return j;
}

}  // namespace fecsim
