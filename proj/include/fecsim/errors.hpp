#pragma once

#include <stdexcept>
#include <string>

namespace fecsim {

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A policy handed the engine an illegal assignment (busy thread, departed
// request, or more than n distinct chunks in strict mode).
struct PolicyViolation : SimError {
    using SimError::SimError;
};

// Requested a steady-state quantity outside the stability region.
struct Unstable : SimError {
    using SimError::SimError;
};

struct ConfigError : SimError {
    using SimError::SimError;
};

struct EmptySet : SimError {
    using SimError::SimError;
};

struct DegenerateVariance : SimError {
    using SimError::SimError;
};

struct TooFewReplications : SimError {
    using SimError::SimError;
};

struct ParseError : SimError {
    ParseError(const std::string& what, std::size_t row_number)
        : SimError(what + " (row " + std::to_string(row_number) + ")"), row(row_number) {}
    explicit ParseError(const std::string& what) : SimError(what), row(0) {}
    std::size_t row;
};

struct EmptyTrace : SimError {
    using SimError::SimError;
};

struct DegenerateTrace : SimError {
    using SimError::SimError;
};

struct MalformedAssignment : SimError {
    using SimError::SimError;
};

}  // namespace fecsim
