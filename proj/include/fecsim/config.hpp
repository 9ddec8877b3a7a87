#pragma once

// Flat key-value config files and the mini-grammars for policy and service
// model descriptors. Field names are stable; serialize/parse round-trips
// bit-exactly, and the config fingerprint hashes the canonical serialization.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "fecsim/core.hpp"
#include "fecsim/textio.hpp"
#include "fecsim/traces.hpp"

namespace fecsim {

namespace detail {

// Splits "name(a=1,b=2)" into name and an argument map; bare "name" is fine.
inline std::string split_call(std::string_view text,
                              std::map<std::string, std::string>& args) {
    text = trim(text);
    auto open = text.find('(');
    if (open == std::string_view::npos) return std::string(text);
    if (text.back() != ')')
        throw ParseError("expected closing ')' in '" + std::string(text) + "'");
    std::string name(trim(text.substr(0, open)));
    std::string_view body = text.substr(open + 1, text.size() - open - 2);
    while (!body.empty()) {
        auto comma = body.find(',');
        std::string_view item =
            comma == std::string_view::npos ? body : body.substr(0, comma);
        body = comma == std::string_view::npos ? std::string_view{}
                                               : body.substr(comma + 1);
        item = trim(item);
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string_view::npos)
            throw ParseError("expected key=value in '" + std::string(item) + "'");
        args[std::string(trim(item.substr(0, eq)))] =
            std::string(trim(item.substr(eq + 1)));
    }
    return name;
}

inline std::string require_arg(const std::map<std::string, std::string>& args,
                               const std::string& key, const std::string& ctx) {
    auto it = args.find(key);
    if (it == args.end()) throw ParseError(ctx + ": missing argument '" + key + "'");
    return it->second;
}

}  // namespace detail

// greedy | sharing | round_robin | fixed_redundancy(m=INT)
inline PolicySpec parse_policy(std::string_view text) {
    std::map<std::string, std::string> args;
    std::string name = detail::split_call(text, args);
    PolicySpec spec;
    if (name == "greedy") {
        spec.kind = PolicyKind::Greedy;
    } else if (name == "sharing") {
        spec.kind = PolicyKind::Sharing;
    } else if (name == "round_robin") {
        spec.kind = PolicyKind::RoundRobin;
    } else if (name == "fixed_redundancy") {
        spec.kind = PolicyKind::FixedRedundancy;
        spec.redundancy = static_cast<std::uint32_t>(
            parse_u64(detail::require_arg(args, "m", "fixed_redundancy"), "policy.m"));
    } else {
        throw ParseError("unknown policy '" + name + "'");
    }
    return spec;
}

// exponential(mu=R) | deterministic(d=R) | two_point(p0=R,v0=R,v1=R) |
// shifted_exponential(delta=R,mu=R) | empirical(path=FILE)
inline ServiceTimeModel parse_service_model(std::string_view text) {
    std::map<std::string, std::string> args;
    std::string name = detail::split_call(text, args);
    if (name == "exponential")
        return Exponential{parse_double(detail::require_arg(args, "mu", name), "mu")};
    if (name == "deterministic")
        return Deterministic{parse_double(detail::require_arg(args, "d", name), "d")};
    if (name == "two_point")
        return TwoPoint{parse_double(detail::require_arg(args, "p0", name), "p0"),
                        parse_double(detail::require_arg(args, "v0", name), "v0"),
                        parse_double(detail::require_arg(args, "v1", name), "v1")};
    if (name == "shifted_exponential")
        return ShiftedExponential{
            parse_double(detail::require_arg(args, "delta", name), "delta"),
            parse_double(detail::require_arg(args, "mu", name), "mu")};
    if (name == "empirical") {
        std::string path = detail::require_arg(args, "path", name);
        Trace trace = load_trace(path);
        return Empirical{
            std::make_shared<const std::vector<double>>(std::move(trace.samples)),
            path};
    }
    throw ParseError("unknown service model '" + name + "'");
}

inline std::string format_policy(const PolicySpec& spec) { return policy_name(spec); }

inline std::string format_service_model(const ServiceTimeModel& model) {
    return std::visit(
        [](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Exponential>)
                return "exponential(mu=" + format_double(m.rate) + ")";
            else if constexpr (std::is_same_v<T, Deterministic>)
                return "deterministic(d=" + format_double(m.value) + ")";
            else if constexpr (std::is_same_v<T, TwoPoint>)
                return "two_point(p0=" + format_double(m.p0) +
                       ",v0=" + format_double(m.value0) +
                       ",v1=" + format_double(m.value1) + ")";
            else if constexpr (std::is_same_v<T, ShiftedExponential>)
                return "shifted_exponential(delta=" + format_double(m.shift) +
                       ",mu=" + format_double(m.rate) + ")";
            else
                return "empirical(path=" + m.source + ")";
        },
        model);
}

inline std::string serialize_config(const SimConfig& cfg) {
    std::ostringstream out;
    out << "arrival_rate = " << format_double(cfg.arrival_rate) << "\n"
        << "num_threads = " << cfg.num_threads << "\n"
        << "coding.n = " << cfg.coding.n << "\n"
        << "coding.k = " << cfg.coding.k << "\n"
        << "policy = " << format_policy(cfg.policy) << "\n"
        << "service_model = " << format_service_model(cfg.service_model) << "\n"
        << "num_arrivals = " << cfg.num_arrivals << "\n"
        << "master_seed = " << cfg.master_seed << "\n"
        << "replications = " << cfg.replications << "\n"
        << "warmup_discard = " << cfg.warmup_discard << "\n"
        << "strict_chunk_limit = " << (cfg.strict_chunk_limit ? "true" : "false") << "\n"
        << "crn_mode = " << (cfg.crn_mode ? "true" : "false") << "\n";
    return out.str();
}

inline SimConfig parse_config(std::istream& in, const std::string& source = "<config>") {
    SimConfig cfg;
    bool seen_arrival = false, seen_threads = false, seen_n = false, seen_k = false,
         seen_policy = false, seen_model = false, seen_arrivals = false;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        auto content = trim(line);
        if (content.empty() || content.front() == '#') continue;
        auto eq = content.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(source + ": expected key = value", row);
        std::string key(trim(content.substr(0, eq)));
        std::string value(trim(content.substr(eq + 1)));
        try {
            if (key == "arrival_rate") {
                cfg.arrival_rate = parse_double(value, key);
                seen_arrival = true;
            } else if (key == "num_threads") {
                cfg.num_threads = static_cast<std::uint32_t>(parse_u64(value, key));
                seen_threads = true;
            } else if (key == "coding.n") {
                cfg.coding.n = static_cast<std::uint32_t>(parse_u64(value, key));
                seen_n = true;
            } else if (key == "coding.k") {
                cfg.coding.k = static_cast<std::uint32_t>(parse_u64(value, key));
                seen_k = true;
            } else if (key == "policy") {
                cfg.policy = parse_policy(value);
                seen_policy = true;
            } else if (key == "service_model") {
                cfg.service_model = parse_service_model(value);
                seen_model = true;
            } else if (key == "num_arrivals") {
                cfg.num_arrivals = static_cast<std::uint32_t>(parse_u64(value, key));
                seen_arrivals = true;
            } else if (key == "master_seed") {
                cfg.master_seed = parse_u64(value, key);
            } else if (key == "replications") {
                cfg.replications = static_cast<std::uint32_t>(parse_u64(value, key));
            } else if (key == "warmup_discard") {
                cfg.warmup_discard = static_cast<std::uint32_t>(parse_u64(value, key));
            } else if (key == "strict_chunk_limit") {
                cfg.strict_chunk_limit = parse_bool(value, key);
            } else if (key == "crn_mode") {
                cfg.crn_mode = parse_bool(value, key);
            } else {
                throw ParseError(source + ": unknown key '" + key + "'", row);
            }
        } catch (const ParseError& e) {
            if (e.row != 0) throw;
            throw ParseError(std::string(e.what()), row);
        }
    }
    if (!(seen_arrival && seen_threads && seen_n && seen_k && seen_policy &&
          seen_model && seen_arrivals))
        throw ParseError(source +
                         ": missing required keys (arrival_rate, num_threads, "
                         "coding.n, coding.k, policy, service_model, num_arrivals)");
    return cfg;
}

inline SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    return parse_config(in, path);
}

// FNV-1a over the canonical serialization, as a 16-hex-digit tag carried on
// every result row.
inline std::string config_fingerprint(const SimConfig& cfg) {
    const std::string text = serialize_config(cfg);
    std::uint64_t h = hash_label(text);
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = hex[h & 0xF];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

}  // namespace fecsim
