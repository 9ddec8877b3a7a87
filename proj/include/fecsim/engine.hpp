#pragma once

// Discrete-event loop: Poisson arrivals feed a FIFO of read requests, a
// policy maps idle threads to requests, every assignment samples one chunk
// download and schedules its completion, and the k-th completed chunk of a
// request departs it and terminates its in-flight siblings immediately.
//
// The pending event set is one completion slot per thread plus the arrival
// cursor; the next event is the minimum under the Event total order (time,
// then completions before arrivals, then lower thread id). Termination just
// clears a slot.
//
// One Simulation instance is single-threaded and fully deterministic given
// (master_seed, replication). Replications are embarrassingly parallel.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fecsim/core.hpp"
#include "fecsim/policies.hpp"
#include "fecsim/service_models.hpp"

namespace fecsim {

inline constexpr std::uint64_t kArrivalStreamLabel = hash_label("arrivals");
inline constexpr std::uint64_t kServiceStreamLabel = hash_label("service");

// Strictly increasing Poisson arrival instants (i.i.d. exponential gaps).
inline std::vector<double> arrival_times(double lambda, std::uint32_t count,
                                         RngStream& stream) {
    if (!(lambda > 0.0)) throw ConfigError("arrival rate must be > 0");
    std::vector<double> times(count);
    double t = 0.0;
    for (std::uint32_t i = 0; i < count; ++i) {
        t += -std::log1p(-stream.next_uniform()) / lambda;
        times[i] = t;
    }
    return times;
}

// Draws chunk durations. Plain mode consumes one shared per-replication
// stream; CRN mode keys every draw by (replication, request, attempt) so the
// same attempt sees the same uniform under any policy.
class ServiceSampler {
public:
    ServiceSampler(const ServiceTimeModel& model, std::uint64_t master_seed,
                   std::uint32_t replication, bool crn)
        : model_(model),
          master_seed_(master_seed),
          replication_(replication),
          crn_(crn),
          sequential_(master_seed, {replication, kServiceStreamLabel}) {}

    double sample(RequestId request, std::uint32_t attempt_index) {
        if (crn_) {
            RngStream s(master_seed_,
                        {replication_, kServiceStreamLabel, request, attempt_index});
            return fecsim::sample(model_, s);
        }
        return fecsim::sample(model_, sequential_);
    }

private:
    const ServiceTimeModel& model_;
    std::uint64_t master_seed_;
    std::uint32_t replication_;
    bool crn_;
    RngStream sequential_;
};

struct DelayRecord {
    RequestId request_id = 0;
    double arrival_ms = 0.0;
    double departure_ms = 0.0;
    double delay_ms = 0.0;        // departure - arrival
    double first_start_ms = 0.0;  // start of the first attempt
    std::uint32_t attempts_started = 0;
    std::uint32_t attempts_terminated = 0;
};

struct DelayRecordSet {
    std::vector<DelayRecord> records;  // request id order, warmup excluded
    std::string config_fingerprint;
    std::uint32_t replication = 0;
};

// Intervals during which at least one thread was idle while some undeparted
// request could still legally absorb a chunk download. Greedy and round-robin
// must never accumulate any; for sharing and fixed redundancy this is the
// defining non-work-conserving behavior and is logged, not an error.
struct WorkConservationLog {
    static constexpr std::size_t kMaxStoredIntervals = 4096;
    std::uint64_t violation_count = 0;
    double violation_time_ms = 0.0;
    std::vector<std::pair<double, double>> intervals;
    bool truncated = false;
};

// Time-average number of requests in system over the arrival horizon,
// with second-half window means for the divergence (queue slope) test.
struct QueueLengthStats {
    double horizon_ms = 0.0;  // last arrival instant
    double mean_in_system = 0.0;
    double mean_third_quarter = 0.0;   // over [T/2, 3T/4]
    double mean_fourth_quarter = 0.0;  // over [3T/4, T]
    std::uint32_t max_in_system = 0;

    // Relative growth between the last two quarters; diverging queues grow
    // linearly and score well above stable fluctuation.
    double growth() const {
        return (mean_fourth_quarter - mean_third_quarter) /
               std::max(mean_third_quarter, 1e-9);
    }
};

struct ReplicationResult {
    DelayRecordSet records;
    WorkConservationLog work_conservation;
    QueueLengthStats queue;
    bool model_extension = false;  // some request exceeded n (strict mode off)
    std::uint64_t attempts_started_total = 0;
    std::uint64_t attempts_terminated_total = 0;
    std::uint32_t replication = 0;
};

class Simulation {
public:
    Simulation(const SimConfig& cfg, Policy& policy, std::uint32_t replication)
        : cfg_(cfg),
          policy_(policy),
          replication_(replication),
          sampler_(cfg.service_model, cfg.master_seed, replication, cfg.crn_mode) {}

    ReplicationResult run() {
        RngStream arrivals_stream(cfg_.master_seed, {replication_, kArrivalStreamLabel});
        return run_with_arrivals(
            arrival_times(cfg_.arrival_rate, cfg_.num_arrivals, arrivals_stream));
    }

    // Runs against an explicit arrival schedule (non-decreasing times). Used
    // for worked examples and single-request service-time experiments.
    ReplicationResult run_with_arrivals(const std::vector<double>& arrivals) {
        init(arrivals);
        while (departed_ < requests_.size()) step();
        return finish();
    }

    // Exposed for tests that want to inspect state after a run.
    const std::vector<Request>& requests() const { return requests_; }
    const std::vector<RequestId>& waiting_queue() const { return queue_; }
    double clock() const { return clock_; }

private:
    struct ThreadState {
        bool busy = false;
        RequestId request = 0;
        std::uint32_t attempt = 0;
        double completion_ms = 0.0;  // valid while busy
    };

    void init(const std::vector<double>& arrivals) {
        if (arrivals.empty()) throw ConfigError("at least one arrival required");
        for (std::size_t i = 1; i < arrivals.size(); ++i)
            if (arrivals[i] < arrivals[i - 1])
                throw ConfigError("arrival times must be non-decreasing");

        arrivals_ = &arrivals;
        next_arrival_ = 0;
        requests_.clear();
        requests_.resize(arrivals.size());
        for (std::size_t i = 0; i < arrivals.size(); ++i) {
            requests_[i].id = static_cast<RequestId>(i);
            requests_[i].arrival_ms = arrivals[i];
        }
        threads_.assign(cfg_.num_threads, {});
        queue_.clear();
        clock_ = 0.0;
        departed_ = 0;
        absorbing_ = 0;
        result_ = {};
        result_.replication = replication_;
        result_.records.replication = replication_;
        result_.records.records.resize(arrivals.size());

        horizon_ = arrivals.back();
        checkpoints_ = {0.5 * horizon_, 0.75 * horizon_, horizon_};
        checkpoint_area_.assign(checkpoints_.size(), 0.0);
        next_checkpoint_ = 0;
        area_ = 0.0;
        last_event_ms_ = 0.0;
        violating_ = false;
        violation_start_ = 0.0;
    }

    // Minimum pending event under the Event total order: scan the thread
    // completion slots in ascending thread id, then the arrival cursor.
    // Completions outrank arrivals at equal times, so a departing request
    // frees its threads before a simultaneous arrival is queued.
    Event next_event() const {
        Event best;
        bool have = false;
        for (ThreadId t = 0; t < threads_.size(); ++t) {
            const ThreadState& ts = threads_[t];
            if (!ts.busy) continue;
            if (!have || ts.completion_ms < best.time_ms) {
                best = Event{ts.completion_ms, EventKind::ChunkComplete, t,
                             ts.request, ts.attempt, 0};
                have = true;
            }
        }
        if (next_arrival_ < arrivals_->size()) {
            const double at = (*arrivals_)[next_arrival_];
            if (!have || at < best.time_ms) {
                best = Event{at, EventKind::Arrival, 0,
                             static_cast<RequestId>(next_arrival_), 0, 0};
                have = true;
            }
        }
        if (!have) throw SimError("event set empty before all requests departed");
        return best;
    }

    void step() {
        const Event ev = next_event();
        advance_clock(ev.time_ms);
        if (ev.kind == EventKind::Arrival) {
            ++next_arrival_;
            on_arrival(ev.request_id);
        } else {
            on_chunk_complete(ev);
        }
        update_violation_state();
    }

    void on_arrival(RequestId id) {
        queue_.push_back(id);
        ++absorbing_;  // a fresh request can always absorb at least k chunks
        result_.queue.max_in_system =
            std::max(result_.queue.max_in_system,
                     static_cast<std::uint32_t>(queue_.size()));
        invoke_policy();
    }

    void on_chunk_complete(const Event& ev) {
        Request& req = requests_[ev.request_id];
        ChunkAttempt& attempt = req.attempts[ev.attempt_index];
        attempt.outcome = AttemptOutcome::Completed;
        attempt.end_ms = clock_;
        threads_[ev.thread_id].busy = false;
        ++req.chunks_done;
        if (req.chunks_done == cfg_.coding.k) depart(req);
        invoke_policy();
    }

    void depart(Request& req) {
        req.departure_ms = clock_;
        for (ChunkAttempt& a : req.attempts) {
            if (a.outcome == AttemptOutcome::InFlight) {
                a.outcome = AttemptOutcome::Terminated;
                a.end_ms = clock_;  // termination time = departure time
                threads_[a.thread_id].busy = false;
            }
        }
        queue_.erase(std::find(queue_.begin(), queue_.end(), req.id));
        if (req.attempts.size() < hard_cap()) --absorbing_;
        ++departed_;

        DelayRecord rec;
        rec.request_id = req.id;
        rec.arrival_ms = req.arrival_ms;
        rec.departure_ms = clock_;
        rec.delay_ms = clock_ - req.arrival_ms;
        rec.first_start_ms = req.attempts.front().start_ms;
        rec.attempts_started = static_cast<std::uint32_t>(req.attempts.size());
        rec.attempts_terminated =
            static_cast<std::uint32_t>(req.attempts.size()) - cfg_.coding.k;
        result_.attempts_terminated_total += rec.attempts_terminated;
        result_.records.records[req.id] = rec;
    }

    void invoke_policy() {
        if (queue_.empty()) return;
        idle_.clear();
        for (ThreadId t = 0; t < threads_.size(); ++t)
            if (!threads_[t].busy) idle_.push_back(t);
        if (idle_.empty()) return;

        decision_.clear();
        PolicyContext ctx{requests_, queue_, cfg_.coding, cfg_.strict_chunk_limit};
        policy_.assign(ctx, idle_, decision_);
        for (auto [thread, request] : decision_.assignments)
            start_attempt(thread, request);
    }

    void start_attempt(ThreadId thread, RequestId id) {
        if (thread >= threads_.size() || threads_[thread].busy)
            throw PolicyViolation("policy assigned a busy or unknown thread");
        Request& req = requests_[id];
        if (req.departure_ms.has_value())
            throw PolicyViolation("policy assigned a departed request");
        if (cfg_.strict_chunk_limit && req.attempts.size() >= cfg_.coding.n)
            throw PolicyViolation(
                "policy assigned more than n distinct chunks to request " +
                std::to_string(id));

        auto attempt_index = static_cast<std::uint32_t>(req.attempts.size());
        if (req.attempts.empty())
            req.attempts.reserve(std::min<std::uint64_t>(
                hard_cap(), cfg_.num_threads + cfg_.coding.k));
        const double duration = sampler_.sample(id, attempt_index);
        req.attempts.push_back(
            {thread, clock_, duration, 0.0, AttemptOutcome::InFlight});
        threads_[thread] = {true, id, attempt_index, clock_ + duration};
        ++result_.attempts_started_total;
        if (req.attempts.size() == hard_cap()) --absorbing_;
        if (!cfg_.strict_chunk_limit && req.attempts.size() > cfg_.coding.n)
            result_.model_extension = true;
    }

    std::uint64_t hard_cap() const {
        return cfg_.strict_chunk_limit ? cfg_.coding.n
                                       : std::numeric_limits<std::uint64_t>::max();
    }

    void advance_clock(double to) {
        const double n = static_cast<double>(queue_.size());
        while (next_checkpoint_ < checkpoints_.size() &&
               checkpoints_[next_checkpoint_] <= to) {
            checkpoint_area_[next_checkpoint_] =
                area_ + n * (checkpoints_[next_checkpoint_] - last_event_ms_);
            ++next_checkpoint_;
        }
        area_ += n * (to - last_event_ms_);
        last_event_ms_ = to;
        clock_ = to;
    }

    void update_violation_state() {
        bool idle_thread = false;
        for (const ThreadState& t : threads_)
            if (!t.busy) {
                idle_thread = true;
                break;
            }
        const bool now = idle_thread && absorbing_ > 0;
        if (now && !violating_) {
            violating_ = true;
            violation_start_ = clock_;
        } else if (!now && violating_) {
            violating_ = false;
            close_violation_interval();
        }
    }

    void close_violation_interval() {
        if (clock_ <= violation_start_) return;  // zero measure
        auto& log = result_.work_conservation;
        ++log.violation_count;
        log.violation_time_ms += clock_ - violation_start_;
        if (log.intervals.size() < WorkConservationLog::kMaxStoredIntervals)
            log.intervals.emplace_back(violation_start_, clock_);
        else
            log.truncated = true;
    }

    ReplicationResult finish() {
        if (violating_) {
            violating_ = false;
            close_violation_interval();
        }
        auto& q = result_.queue;
        q.horizon_ms = horizon_;
        if (horizon_ > 0.0) {
            q.mean_in_system = checkpoint_area_[2] / horizon_;
            const double quarter = 0.25 * horizon_;
            q.mean_third_quarter =
                (checkpoint_area_[1] - checkpoint_area_[0]) / quarter;
            q.mean_fourth_quarter =
                (checkpoint_area_[2] - checkpoint_area_[1]) / quarter;
        }
        if (cfg_.warmup_discard > 0) {
            auto& recs = result_.records.records;
            const auto drop = std::min<std::size_t>(cfg_.warmup_discard, recs.size());
            recs.erase(recs.begin(), recs.begin() + drop);
        }
        return std::move(result_);
    }

    const SimConfig& cfg_;
    Policy& policy_;
    std::uint32_t replication_;
    ServiceSampler sampler_;

    double clock_ = 0.0;
    const std::vector<double>* arrivals_ = nullptr;
    std::size_t next_arrival_ = 0;
    std::vector<Request> requests_;
    std::vector<ThreadState> threads_;
    std::vector<RequestId> queue_;  // undeparted requests, arrival order
    std::vector<ThreadId> idle_;
    AssignmentDecision decision_;
    std::size_t departed_ = 0;
    std::uint64_t absorbing_ = 0;  // undeparted requests below the n cap

    double horizon_ = 0.0;
    std::vector<double> checkpoints_;
    std::vector<double> checkpoint_area_;
    std::size_t next_checkpoint_ = 0;
    double area_ = 0.0;
    double last_event_ms_ = 0.0;
    bool violating_ = false;
    double violation_start_ = 0.0;

    ReplicationResult result_;
};

// Runs one replication of a validated config. Deterministic given
// (cfg.master_seed, replication).
inline ReplicationResult simulate(const SimConfig& cfg, std::uint32_t replication) {
    auto errors = validate_config(cfg);
    if (!errors.empty()) {
        std::string what = "invalid config:";
        for (const auto& e : errors) what += " [" + e + "]";
        throw ConfigError(what);
    }
    auto policy = make_policy(cfg.policy);
    Simulation sim(cfg, *policy, replication);
    return sim.run();
}

inline ReplicationResult simulate_with_arrivals(const SimConfig& cfg,
                                                std::uint32_t replication,
                                                const std::vector<double>& arrivals) {
    auto policy = make_policy(cfg.policy);
    Simulation sim(cfg, *policy, replication);
    return sim.run_with_arrivals(arrivals);
}

}  // namespace fecsim
