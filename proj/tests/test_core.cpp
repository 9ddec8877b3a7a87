#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "fecsim/core.hpp"
#include "fecsim/rng.hpp"

using namespace fecsim;

namespace {

SimConfig paper_defaults() {
    SimConfig cfg;
    cfg.arrival_rate = 50.0;
    cfg.num_threads = 16;
    cfg.coding = {17, 2};
    cfg.policy = {PolicyKind::Greedy, 0};
    cfg.service_model = Exponential{6.25};
    cfg.num_arrivals = 62500;
    return cfg;
}

}  // namespace

TEST_CASE("validate_config accepts n = L + k - 1 in strict mode") {
    SimConfig cfg = paper_defaults();  // n = 17 = 16 + 2 - 1
    CHECK(validate_config(cfg).empty());
}

TEST_CASE("validate_config rejects n below L + k - 1 in strict mode") {
    SimConfig cfg = paper_defaults();
    cfg.coding.n = 16;
    auto errors = validate_config(cfg);
    REQUIRE_FALSE(errors.empty());
    CHECK(errors.front().find("n < L+k-1") != std::string::npos);

    cfg.strict_chunk_limit = false;
    CHECK(validate_config(cfg).empty());
}

TEST_CASE("validate_config rejects degenerate coding parameters") {
    SimConfig cfg = paper_defaults();
    cfg.coding = {4, 0};
    auto errors = validate_config(cfg);
    REQUIRE_FALSE(errors.empty());
    CHECK(errors.front().find("k >= 1") != std::string::npos);

    cfg.coding = {2, 3};
    errors = validate_config(cfg);
    REQUIRE_FALSE(errors.empty());
    bool found = false;
    for (const auto& e : errors) found |= e.find("k <= n") != std::string::npos;
    CHECK(found);
}

TEST_CASE("validate_config reports every violated field") {
    SimConfig cfg = paper_defaults();
    cfg.arrival_rate = -1.0;
    cfg.warmup_discard = cfg.num_arrivals;
    cfg.policy = {PolicyKind::FixedRedundancy, 1};  // m < k
    auto errors = validate_config(cfg);
    CHECK(errors.size() >= 3);
}

TEST_CASE("event ordering is a strict total order with the documented ranks") {
    // Completions precede arrivals at equal times; among simultaneous
    // completions the lower thread id wins; seq breaks any remaining tie.
    Event cc0{5.0, EventKind::ChunkComplete, 0, 1, 0, 10};
    Event cc1{5.0, EventKind::ChunkComplete, 3, 2, 0, 2};
    Event arr{5.0, EventKind::Arrival, 0, 7, 0, 1};
    Event later{5.5, EventKind::Arrival, 0, 8, 0, 0};

    CHECK(event_before(cc0, cc1));       // lower thread id first
    CHECK(event_before(cc1, arr));       // completion before arrival
    CHECK(event_before(arr, later));     // time dominates
    CHECK_FALSE(event_before(arr, cc1));
    CHECK_FALSE(event_before(cc0, cc0));  // irreflexive

    // Exactly one of (a<b, b<a) for distinct events; reproducible sort.
    RngStream rng(99, {1});
    std::vector<Event> events;
    for (std::uint64_t i = 0; i < 200; ++i) {
        Event e;
        e.time_ms = static_cast<double>(static_cast<int>(rng.next_uniform() * 4.0));
        e.kind = rng.next_uniform() < 0.5 ? EventKind::ChunkComplete
                                          : EventKind::Arrival;
        e.thread_id = static_cast<ThreadId>(rng.next_uniform() * 3.0);
        e.request_id = static_cast<RequestId>(i);
        e.seq = i;
        events.push_back(e);
    }
    for (std::size_t i = 0; i < events.size(); i += 7)
        for (std::size_t j = 0; j < events.size(); j += 11)
            if (i != j)
                CHECK(event_before(events[i], events[j]) !=
                      event_before(events[j], events[i]));

    auto sorted1 = events;
    auto sorted2 = events;
    std::sort(sorted1.begin(), sorted1.end(), event_before);
    std::sort(sorted2.begin(), sorted2.end(), event_before);
    for (std::size_t i = 0; i < sorted1.size(); ++i)
        CHECK(sorted1[i].seq == sorted2[i].seq);
}
