#pragma once

// Thread-allocation policies. The engine invokes the active policy whenever
// threads become idle (arrival, chunk completion, departure) and applies the
// returned assignments. A policy never touches engine state directly; it only
// reads the queue view and reports (thread -> request) pairs. Threads it does
// not mention stay idle.

#include <cstdint>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "fecsim/core.hpp"

namespace fecsim {

// FIFO view of the undeparted requests plus the coding contract.
struct PolicyContext {
    const std::vector<Request>& requests;
    const std::vector<RequestId>& queue;  // arrival order, undeparted only
    CodingParams coding;
    bool strict_chunk_limit = true;
};

struct AssignmentDecision {
    std::vector<std::pair<ThreadId, RequestId>> assignments;
    void clear() { assignments.clear(); }
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual PolicySpec spec() const = 0;
    virtual void assign(const PolicyContext& ctx, const std::vector<ThreadId>& idle,
                        AssignmentDecision& out) = 0;
};

namespace detail {

inline std::uint64_t attempts_started(const PolicyContext& ctx, RequestId id) {
    return ctx.requests[id].attempts.size();
}

inline std::uint64_t hard_cap(const PolicyContext& ctx) {
    return ctx.strict_chunk_limit ? ctx.coding.n
                                  : std::numeric_limits<std::uint64_t>::max();
}

// FIFO fill: walk the queue in arrival order, giving each request threads
// until it reaches `cap` lifetime attempts, then move to the next request.
inline void fifo_fill(const PolicyContext& ctx, const std::vector<ThreadId>& idle,
                      std::uint64_t cap, AssignmentDecision& out) {
    std::size_t next_thread = 0;
    for (RequestId id : ctx.queue) {
        if (next_thread >= idle.size()) break;
        std::uint64_t started = attempts_started(ctx, id);
        while (started < cap && next_thread < idle.size()) {
            out.assignments.emplace_back(idle[next_thread++], id);
            ++started;
        }
    }
}

}  // namespace detail

// All threads to the head-of-line request until it departs or holds n
// distinct chunks; surplus spills to the next request rather than idling.
class GreedyPolicy final : public Policy {
public:
    PolicySpec spec() const override { return {PolicyKind::Greedy, 0}; }
    void assign(const PolicyContext& ctx, const std::vector<ThreadId>& idle,
                AssignmentDecision& out) override {
        detail::fifo_fill(ctx, idle, detail::hard_cap(ctx), out);
    }
};

// Exactly k threads per request over its lifetime, FIFO. Surplus threads stay
// idle even while requests are in service; this is the non-work-conserving
// extreme.
class SharingPolicy final : public Policy {
public:
    PolicySpec spec() const override { return {PolicyKind::Sharing, 0}; }
    void assign(const PolicyContext& ctx, const std::vector<ThreadId>& idle,
                AssignmentDecision& out) override {
        detail::fifo_fill(ctx, idle, ctx.coding.k, out);
    }
};

// Idle threads are dealt one at a time, cycling over the undeparted requests.
// The cursor persists across invocations so the rotation is genuine cycling
// and not a head-of-line restart.
class RoundRobinPolicy final : public Policy {
public:
    PolicySpec spec() const override { return {PolicyKind::RoundRobin, 0}; }
    void assign(const PolicyContext& ctx, const std::vector<ThreadId>& idle,
                AssignmentDecision& out) override {
        const std::uint64_t cap = detail::hard_cap(ctx);
        eligible_.clear();
        for (RequestId id : ctx.queue) {
            std::uint64_t started = detail::attempts_started(ctx, id);
            if (started < cap) eligible_.push_back({id, started});
        }
        if (eligible_.empty()) return;

        // Queue ids ascend in arrival order, so the resume point is the first
        // eligible id at or past the cursor (wrapping to the front).
        std::size_t pos = 0;
        while (pos < eligible_.size() && eligible_[pos].id < cursor_) ++pos;
        if (pos == eligible_.size()) pos = 0;

        for (std::size_t t = 0; t < idle.size(); ++t) {
            std::size_t scanned = 0;
            while (scanned < eligible_.size() && eligible_[pos].started >= cap) {
                pos = (pos + 1) % eligible_.size();
                ++scanned;
            }
            if (scanned == eligible_.size()) break;  // everyone capped
            out.assignments.emplace_back(idle[t], eligible_[pos].id);
            ++eligible_[pos].started;
            pos = (pos + 1) % eligible_.size();
            cursor_ = eligible_[pos].id;
        }
    }

private:
    struct Slot {
        RequestId id;
        std::uint64_t started;
    };
    std::vector<Slot> eligible_;
    RequestId cursor_ = 0;
};

// Exactly m chunk requests per file, FIFO; m = k reproduces sharing and
// m = n approaches greedy. Deliberately allowed to idle threads while the
// system is busy.
class FixedRedundancyPolicy final : public Policy {
public:
    explicit FixedRedundancyPolicy(std::uint32_t m) : m_(m) {}
    PolicySpec spec() const override { return {PolicyKind::FixedRedundancy, m_}; }
    void assign(const PolicyContext& ctx, const std::vector<ThreadId>& idle,
                AssignmentDecision& out) override {
        detail::fifo_fill(ctx, idle, m_, out);
    }

private:
    std::uint32_t m_;
};

inline std::unique_ptr<Policy> make_policy(const PolicySpec& spec) {
    switch (spec.kind) {
        case PolicyKind::Greedy: return std::make_unique<GreedyPolicy>();
        case PolicyKind::Sharing: return std::make_unique<SharingPolicy>();
        case PolicyKind::RoundRobin: return std::make_unique<RoundRobinPolicy>();
        case PolicyKind::FixedRedundancy:
            return std::make_unique<FixedRedundancyPolicy>(spec.redundancy);
    }
    throw ConfigError("unknown policy kind");
}

}  // namespace fecsim
