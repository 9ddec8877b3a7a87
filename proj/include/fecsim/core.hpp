#pragma once

// Shared domain types: coding parameters, the experiment configuration,
// request/attempt bookkeeping and the simulation event with its total order.
// Times are real-valued milliseconds throughout; rates are 1/ms.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fecsim/errors.hpp"
#include "fecsim/service_models.hpp"

namespace fecsim {

using ThreadId = std::uint32_t;
using RequestId = std::uint32_t;

// FEC code (n,k): each file is stored as n coded chunks, any k reconstruct it.
struct CodingParams {
    std::uint32_t n = 1;
    std::uint32_t k = 1;
};

enum class PolicyKind : std::uint8_t { Greedy, Sharing, RoundRobin, FixedRedundancy };

struct PolicySpec {
    PolicyKind kind = PolicyKind::Greedy;
    std::uint32_t redundancy = 0;  // m, FixedRedundancy only
};

inline std::string policy_name(const PolicySpec& p) {
    switch (p.kind) {
        case PolicyKind::Greedy: return "greedy";
        case PolicyKind::Sharing: return "sharing";
        case PolicyKind::RoundRobin: return "round_robin";
        case PolicyKind::FixedRedundancy:
            return "fixed_redundancy(m=" + std::to_string(p.redundancy) + ")";
    }
    return "?";
}

struct SimConfig {
    double arrival_rate = 1.0;        // lambda, requests per ms
    std::uint32_t num_threads = 1;    // L
    CodingParams coding;
    PolicySpec policy;
    ServiceTimeModel service_model = Exponential{1.0};
    std::uint32_t num_arrivals = 1;   // N_T
    std::uint64_t master_seed = 1;
    std::uint32_t replications = 50;
    std::uint32_t warmup_discard = 0;  // leading requests excluded from statistics
    bool strict_chunk_limit = true;    // enforce n >= L+k-1 and the n-attempt cap
    bool crn_mode = false;             // per-(request,attempt) keyed service draws
};

// Returns every violated invariant with a field path; empty means ok.
inline std::vector<std::string> validate_config(const SimConfig& cfg) {
    std::vector<std::string> errors;
    if (!(cfg.arrival_rate > 0.0) || !std::isfinite(cfg.arrival_rate))
        errors.push_back("arrival_rate: must be finite and > 0");
    if (cfg.num_threads < 1) errors.push_back("num_threads: must be >= 1");
    if (cfg.coding.k < 1) errors.push_back("coding.k: k >= 1 violated");
    if (cfg.coding.n < 1) errors.push_back("coding.n: n >= 1 violated");
    if (cfg.coding.k > cfg.coding.n) errors.push_back("coding: k <= n violated");
    if (cfg.strict_chunk_limit &&
        cfg.coding.n < cfg.num_threads + cfg.coding.k - 1)
        errors.push_back("coding.n: n < L+k-1 with strict_chunk_limit on");
    if (cfg.num_arrivals < 1) errors.push_back("num_arrivals: must be >= 1");
    if (cfg.warmup_discard >= cfg.num_arrivals)
        errors.push_back("warmup_discard: must be < num_arrivals");
    if (cfg.replications < 1) errors.push_back("replications: must be >= 1");
    if (cfg.policy.kind == PolicyKind::FixedRedundancy) {
        if (cfg.policy.redundancy < cfg.coding.k)
            errors.push_back("policy.m: must be >= coding.k");
        if (cfg.strict_chunk_limit && cfg.policy.redundancy > cfg.coding.n)
            errors.push_back("policy.m: must be <= coding.n in strict mode");
    }
    for (auto& e : validate_model(cfg.service_model)) errors.push_back(e);
    return errors;
}

enum class AttemptOutcome : std::uint8_t { InFlight, Completed, Terminated };

// One chunk download attempt on one thread.
struct ChunkAttempt {
    ThreadId thread_id = 0;
    double start_ms = 0.0;
    double duration_ms = 0.0;  // sampled X; completion would be start+duration
    double end_ms = 0.0;       // actual completion or termination time
    AttemptOutcome outcome = AttemptOutcome::InFlight;
};

struct Request {
    RequestId id = 0;
    double arrival_ms = 0.0;
    std::vector<ChunkAttempt> attempts;     // ordered by start time
    std::uint32_t chunks_done = 0;          // completed attempts so far
    std::optional<double> departure_ms;     // set when chunks_done reaches k
};

// ChunkComplete ranks before Arrival so a departure frees threads before a
// simultaneous arrival is queued.
enum class EventKind : std::uint8_t { ChunkComplete = 0, Arrival = 1 };

struct Event {
    double time_ms = 0.0;
    EventKind kind = EventKind::Arrival;
    ThreadId thread_id = 0;          // ChunkComplete only
    RequestId request_id = 0;
    std::uint32_t attempt_index = 0; // ChunkComplete only
    std::uint64_t seq = 0;           // creation order, final tie-break
};

// Strict total order: time, then kind rank, then (for completions) lower
// thread id, then creation sequence. Ties at equal time happen under
// deterministic and two-point service models and must break identically on
// every run.
inline bool event_before(const Event& a, const Event& b) {
    if (a.time_ms != b.time_ms) return a.time_ms < b.time_ms;
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.kind == EventKind::ChunkComplete && a.thread_id != b.thread_id)
        return a.thread_id < b.thread_id;
    return a.seq < b.seq;
}

}  // namespace fecsim
