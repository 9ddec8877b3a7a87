#pragma once

// Shared fixtures for fabricating policy snapshots and small configs.

#include <vector>

#include "fecsim/core.hpp"
#include "fecsim/policies.hpp"

namespace fecsim::test {

// A queue of requests with given attempts-started counts, ids 0..n-1.
struct FakeQueue {
    std::vector<Request> requests;
    std::vector<RequestId> queue;

    explicit FakeQueue(const std::vector<std::uint32_t>& attempts_started) {
        requests.resize(attempts_started.size());
        for (std::size_t i = 0; i < attempts_started.size(); ++i) {
            requests[i].id = static_cast<RequestId>(i);
            for (std::uint32_t a = 0; a < attempts_started[i]; ++a)
                requests[i].attempts.push_back(
                    {0, 0.0, 1.0, 0.0, AttemptOutcome::InFlight});
            queue.push_back(static_cast<RequestId>(i));
        }
    }

    PolicyContext context(CodingParams coding, bool strict = true) const {
        return {requests, queue, coding, strict};
    }
};

inline std::vector<ThreadId> idle_threads(std::uint32_t count) {
    std::vector<ThreadId> out(count);
    for (std::uint32_t i = 0; i < count; ++i) out[i] = i;
    return out;
}

}  // namespace fecsim::test
