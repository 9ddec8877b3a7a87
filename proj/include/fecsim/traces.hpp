#pragma once

// Chunk-delay trace ingestion and the constant-plus-exponential fit. Format:
// one non-negative decimal per line, optional single header line, UTF-8,
// LF or CRLF.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fecsim/errors.hpp"
#include "fecsim/stats.hpp"
#include "fecsim/textio.hpp"

namespace fecsim {

struct Trace {
    std::vector<double> samples;  // ms, all finite and >= 0
    std::string source;
};

inline Trace parse_trace(std::istream& in, const std::string& source) {
    Trace trace;
    trace.source = source;
    std::string line;
    std::size_t row = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++row;
        auto token = trim(line);
        if (token.empty()) continue;
        double value;
        if (!try_parse_double(token, value)) {
            if (first_content_line) {  // a single header line is allowed
                first_content_line = false;
                continue;
            }
            throw ParseError(source + ": not a number: '" + std::string(token) + "'", row);
        }
        first_content_line = false;
        if (!std::isfinite(value))
            throw ParseError(source + ": sample must be finite", row);
        if (value < 0.0)
            throw ParseError(source + ": sample must be >= 0", row);
        trace.samples.push_back(value);
    }
    if (trace.samples.empty()) throw EmptyTrace(source + ": no samples");
    return trace;
}

inline Trace load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trace file: " + path);
    return parse_trace(in, path);
}

inline void save_trace(const Trace& trace, std::ostream& out) {
    out << "delay_ms\n";
    for (double s : trace.samples) out << format_double(s) << "\n";
}

inline void save_trace(const Trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open trace file for writing: " + path);
    save_trace(trace, out);
}

// Fits delay = shift + Exp(rate): shift from the sample minimum (the MLE),
// rate from the mean excess. Slightly biased high in rate at small samples.
inline std::pair<double, double> fit_shifted_exponential(const Trace& trace) {
    if (trace.samples.size() < 2)
        throw DegenerateTrace("fit needs at least 2 samples");
    double min = trace.samples.front();
    double sum = 0.0;
    for (double s : trace.samples) {
        min = std::min(min, s);
        sum += s;
    }
    const double mean = sum / static_cast<double>(trace.samples.size());
    if (mean <= min)
        throw DegenerateTrace("all samples equal; no exponential component");
    return {min, 1.0 / (mean - min)};
}

// The statistics panel reported for measured chunk delays: mean, upper
// percentiles, short-lag autocorrelations, the fitted shifted exponential,
// and a CCDF for export.
struct TraceReport {
    std::string source;
    std::size_t count = 0;
    double mean = 0.0;
    double p80 = 0.0;
    double p95 = 0.0;
    double p999 = 0.0;
    std::vector<double> autocorrelations;  // lags 1..10; empty if degenerate
    bool fit_ok = false;
    double fitted_shift = 0.0;
    double fitted_rate = 0.0;
    std::string fit_error;
    std::vector<std::pair<double, double>> ccdf;
};

inline TraceReport trace_report(const Trace& trace, std::size_t ccdf_points = 100) {
    if (trace.samples.empty()) throw EmptyTrace("trace_report of empty trace");
    TraceReport rep;
    rep.source = trace.source;
    rep.count = trace.samples.size();
    rep.mean = mean_of(trace.samples);
    rep.p80 = percentile(trace.samples, 80.0);
    rep.p95 = percentile(trace.samples, 95.0);
    rep.p999 = percentile(trace.samples, 99.9);
    try {
        for (std::size_t lag = 1; lag <= 10; ++lag)
            rep.autocorrelations.push_back(autocorrelation(trace.samples, lag));
    } catch (const SimError&) {
        rep.autocorrelations.clear();  // constant or too-short series
    }
    try {
        auto [shift, rate] = fit_shifted_exponential(trace);
        rep.fit_ok = true;
        rep.fitted_shift = shift;
        rep.fitted_rate = rate;
    } catch (const DegenerateTrace& e) {
        rep.fit_ok = false;
        rep.fit_error = e.what();
    }
    const double hi = std::max(rep.p999 * 1.25, 1e-12);
    std::vector<double> grid(ccdf_points);
    for (std::size_t i = 0; i < ccdf_points; ++i)
        grid[i] = hi * static_cast<double>(i) / static_cast<double>(ccdf_points - 1);
    auto probs = ccdf(trace.samples, grid);
    for (std::size_t i = 0; i < ccdf_points; ++i)
        rep.ccdf.emplace_back(grid[i], probs[i]);
    return rep;
}

inline nlohmann::ordered_json to_json(const TraceReport& r) {
    nlohmann::ordered_json j;
    j["source"] = r.source;
    j["count"] = r.count;
    j["mean_ms"] = r.mean;
    j["p80_ms"] = r.p80;
    j["p95_ms"] = r.p95;
    j["p99.9_ms"] = r.p999;
    j["autocorrelations"] = r.autocorrelations;
    j["fit_ok"] = r.fit_ok;
    if (r.fit_ok) {
        j["fitted_shift_ms"] = r.fitted_shift;
        j["fitted_rate_per_ms"] = r.fitted_rate;
    } else {
        j["fit_error"] = r.fit_error;
    }
    auto arr = nlohmann::ordered_json::array();
    for (auto [t, p] : r.ccdf) arr.push_back({{"t_ms", t}, {"p_gt", p}});
    j["ccdf"] = arr;
    return j;
}

inline void write_ccdf_csv(const std::vector<std::pair<double, double>>& ccdf,
                           std::ostream& out) {
    out << "t_ms,p_gt\n";
    for (auto [t, p] : ccdf)
        out << format_double(t) << "," << format_double(p) << "\n";
}

}  // namespace fecsim
