#pragma once

// Chunk download-time distributions. A ServiceTimeModel describes the random
// duration of one chunk download attempt; sampling goes through RngStream so
// that draws are reproducible and can be keyed per attempt for
// common-random-number runs.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "fecsim/errors.hpp"
#include "fecsim/rng.hpp"

namespace fecsim {

struct Exponential {
    double rate;  // 1/ms
};

struct Deterministic {
    double value;  // ms
};

struct TwoPoint {
    double p0;  // probability of value0
    double value0;
    double value1;
};

struct ShiftedExponential {
    double shift;  // ms, constant floor
    double rate;   // 1/ms, rate of the exponential excess
};

// Resamples uniformly (with replacement) from a measured delay trace. The
// sample vector is shared so copies of a config stay cheap; `source` keeps
// the trace path for config round-trips.
struct Empirical {
    std::shared_ptr<const std::vector<double>> samples;
    std::string source;
};

using ServiceTimeModel =
    std::variant<Exponential, Deterministic, TwoPoint, ShiftedExponential, Empirical>;

inline std::vector<std::string> validate_model(const ServiceTimeModel& model) {
    std::vector<std::string> errors;
    auto finite = [](double x) { return std::isfinite(x); };
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                if (!finite(m.rate) || m.rate <= 0.0)
                    errors.push_back("service_model.rate: must be finite and > 0");
            } else if constexpr (std::is_same_v<T, Deterministic>) {
                if (!finite(m.value) || m.value < 0.0)
                    errors.push_back("service_model.value: must be finite and >= 0");
            } else if constexpr (std::is_same_v<T, TwoPoint>) {
                if (!finite(m.p0) || m.p0 < 0.0 || m.p0 > 1.0)
                    errors.push_back("service_model.p0: must be in [0,1]");
                if (!finite(m.value0) || m.value0 < 0.0 || !finite(m.value1) || m.value1 < 0.0)
                    errors.push_back("service_model.values: must be finite and >= 0");
            } else if constexpr (std::is_same_v<T, ShiftedExponential>) {
                if (!finite(m.shift) || m.shift < 0.0)
                    errors.push_back("service_model.shift: must be finite and >= 0");
                if (!finite(m.rate) || m.rate <= 0.0)
                    errors.push_back("service_model.rate: must be finite and > 0");
            } else if constexpr (std::is_same_v<T, Empirical>) {
                if (!m.samples || m.samples->empty()) {
                    errors.push_back("service_model.samples: must have >= 1 entries");
                } else {
                    for (double s : *m.samples) {
                        if (!finite(s) || s < 0.0) {
                            errors.push_back("service_model.samples: entries must be finite and >= 0");
                            break;
                        }
                    }
                }
            }
        },
        model);
    return errors;
}

// One i.i.d. draw. Every call consumes exactly one uniform, regardless of
// variant, so stream positions line up across models. Exponential variants
// use the inverse transform, which keeps draws monotone in the underlying
// uniform (the property CRN coupling relies on).
inline double sample(const ServiceTimeModel& model, RngStream& stream) {
    const double u = stream.next_uniform();
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return -std::log1p(-u) / m.rate;
            } else if constexpr (std::is_same_v<T, Deterministic>) {
                return m.value;
            } else if constexpr (std::is_same_v<T, TwoPoint>) {
                return u < m.p0 ? m.value0 : m.value1;
            } else if constexpr (std::is_same_v<T, ShiftedExponential>) {
                return m.shift - std::log1p(-u) / m.rate;
            } else {
                const auto& s = *m.samples;
                auto idx = static_cast<std::size_t>(u * static_cast<double>(s.size()));
                if (idx >= s.size()) idx = s.size() - 1;
                return s[idx];
            }
        },
        model);
}

// Exact distribution mean, used for load arithmetic.
inline double mean(const ServiceTimeModel& model) {
    return std::visit(
        [](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return 1.0 / m.rate;
            } else if constexpr (std::is_same_v<T, Deterministic>) {
                return m.value;
            } else if constexpr (std::is_same_v<T, TwoPoint>) {
                return m.p0 * m.value0 + (1.0 - m.p0) * m.value1;
            } else if constexpr (std::is_same_v<T, ShiftedExponential>) {
                return m.shift + 1.0 / m.rate;
            } else {
                const auto& s = *m.samples;
                return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
            }
        },
        model);
}

// Right-continuous CDF, P(X <= t). Empirical uses the step ECDF; for order
// statistic formulas this must agree with the CCDF convention in stats.
inline double cdf(const ServiceTimeModel& model, double t) {
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return t < 0.0 ? 0.0 : -std::expm1(-m.rate * t);
            } else if constexpr (std::is_same_v<T, Deterministic>) {
                return t >= m.value ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, TwoPoint>) {
                double f = 0.0;
                if (t >= m.value0) f += m.p0;
                if (t >= m.value1) f += 1.0 - m.p0;
                return f;
            } else if constexpr (std::is_same_v<T, ShiftedExponential>) {
                return t < m.shift ? 0.0 : -std::expm1(-m.rate * (t - m.shift));
            } else {
                const auto& s = *m.samples;
                // Count of samples <= t over a sorted copy would be wasteful
                // per call; traces are modest, so sort-once callers should
                // prefer stats::ccdf. Here we count directly.
                std::size_t c = 0;
                for (double x : s)
                    if (x <= t) ++c;
                return static_cast<double>(c) / static_cast<double>(s.size());
            }
        },
        model);
}

inline std::string describe(const ServiceTimeModel& model) {
    std::ostringstream os;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                os << "exponential(mu=" << m.rate << ")";
            } else if constexpr (std::is_same_v<T, Deterministic>) {
                os << "deterministic(d=" << m.value << ")";
            } else if constexpr (std::is_same_v<T, TwoPoint>) {
                os << "two_point(p0=" << m.p0 << ",v0=" << m.value0 << ",v1=" << m.value1 << ")";
            } else if constexpr (std::is_same_v<T, ShiftedExponential>) {
                os << "shifted_exponential(delta=" << m.shift << ",mu=" << m.rate << ")";
            } else {
                os << "empirical(n=" << m.samples->size() << ")";
            }
        },
        model);
    return os.str();
}

}  // namespace fecsim
