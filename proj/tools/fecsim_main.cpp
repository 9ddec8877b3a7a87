// Experiment runner: config-file runs, figure-style presets, trace reports,
// and the oracle/property verification suite.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fecsim/fecsim.hpp"

namespace {

enum class Format { Table, Csv, Json };

Format parse_format(const std::string& name) {
    if (name == "table") return Format::Table;
    if (name == "csv") return Format::Csv;
    if (name == "json") return Format::Json;
    throw fecsim::ConfigError("unknown format: " + name);
}

void emit_table(const fecsim::ResultTable& table, Format format, std::ostream& out) {
    switch (format) {
        case Format::Table: out << table.to_table(); break;
        case Format::Csv: out << table.to_csv(); break;
        case Format::Json: out << table.to_json().dump(2) << "\n"; break;
    }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw fecsim::ConfigError("cannot write " + path.string());
    out << content;
}

int cmd_run(const std::string& config_path, std::uint64_t seed_override,
            std::uint32_t reps_override, unsigned workers, const std::string& out_dir,
            Format format) {
    fecsim::SimConfig cfg = fecsim::load_config(config_path);
    if (seed_override) cfg.master_seed = seed_override;
    if (reps_override) cfg.replications = reps_override;

    fecsim::RunOptions opt;
    opt.workers = workers;
    opt.output_dir = out_dir;
    auto run = fecsim::run_replications(cfg, opt);
    auto summary = fecsim::run_summary_json(run);

    if (format == Format::Json) {
        std::cout << summary.dump(2) << "\n";
    } else {
        fecsim::ResultTable t;
        t.columns = {"fingerprint", "seed",    "replications", "num_arrivals",
                     "mean_delay_ms", "ci95_ms", "wc_violations", "queue_growth"};
        t.rows.push_back({run.fingerprint, cfg.master_seed,
                          static_cast<std::uint64_t>(run.reps.size()),
                          cfg.num_arrivals, run.grand_mean,
                          fecsim::number_or_null(run.ci95),
                          run.wc_violation_count_total, run.mean_queue_growth});
        emit_table(t, format, std::cout);
    }
    if (!out_dir.empty()) {
        write_file(std::filesystem::path(out_dir) / "summary.json",
                   summary.dump(2) + "\n");
        std::cerr << "wrote per-replication CSVs and summary.json to " << out_dir
                  << "\n";
    }
    return 0;
}

int cmd_preset(const std::string& name, const fecsim::PresetOverrides& overrides,
               unsigned workers, const std::string& out_dir, Format format) {
    fecsim::RunOptions opt;
    opt.workers = workers;
    fecsim::ResultTable table;
    if (name == "fig6" || name == "fig7" || name == "fig8") {
        fecsim::Scenario s = name == "fig6" ? fecsim::make_fig6_scenario(overrides)
                             : name == "fig7" ? fecsim::make_fig7_scenario(overrides)
                                              : fecsim::make_fig8_scenario(overrides);
        table = fecsim::scenario_result_table(fecsim::run_scenario(s, opt));
    } else if (name == "fig9") {
        auto s = fecsim::make_fig9_scenario(overrides);
        table = fecsim::tradeoff_result_table(fecsim::run_tradeoff(s, opt));
    } else if (name == "fig10") {
        auto s = fecsim::make_fig10_scenario(overrides);
        table = fecsim::ccdf_result_table(s, fecsim::run_ccdf_unlimited(s, workers));
    } else {
        throw fecsim::ConfigError("unknown preset: " + name +
                                  " (expected fig6|fig7|fig8|fig9|fig10)");
    }
    emit_table(table, format, std::cout);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_file(std::filesystem::path(out_dir) / (name + ".csv"), table.to_csv());
        write_file(std::filesystem::path(out_dir) / (name + ".json"),
                   table.to_json().dump(2) + "\n");
    }
    return 0;
}

int cmd_trace_report(const std::string& trace_path, const std::string& out_dir,
                     Format format) {
    fecsim::Trace trace = fecsim::load_trace(trace_path);
    auto report = fecsim::trace_report(trace);
    auto json = fecsim::to_json(report);
    if (format == Format::Json) {
        std::cout << json.dump(2) << "\n";
    } else {
        std::cout << "trace:   " << report.source << " (" << report.count
                  << " samples)\n"
                  << "mean:    " << fecsim::format_double(report.mean) << " ms\n"
                  << "p80:     " << fecsim::format_double(report.p80) << " ms\n"
                  << "p95:     " << fecsim::format_double(report.p95) << " ms\n"
                  << "p99.9:   " << fecsim::format_double(report.p999) << " ms\n";
        if (report.fit_ok)
            std::cout << "fit:     shift " << fecsim::format_double(report.fitted_shift)
                      << " ms + Exp(rate " << fecsim::format_double(report.fitted_rate)
                      << " /ms)\n";
        else
            std::cout << "fit:     failed (" << report.fit_error << ")\n";
        std::cout << "autocorr (lags 1..10):";
        for (double a : report.autocorrelations)
            std::cout << " " << fecsim::format_double(a);
        std::cout << "\n";
    }
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_file(std::filesystem::path(out_dir) / "trace_report.json",
                   json.dump(2) + "\n");
        std::ostringstream ccdf;
        fecsim::write_ccdf_csv(report.ccdf, ccdf);
        write_file(std::filesystem::path(out_dir) / "trace_ccdf.csv", ccdf.str());
    }
    return 0;
}

int cmd_verify(bool all, bool full, std::uint64_t seed, unsigned workers) {
    fecsim::VerifyOptions opt;
    opt.full_tier = full;
    if (seed) opt.seed = seed;
    opt.workers = workers;
    auto results = all ? fecsim::verify_all(opt) : fecsim::verify_quick(opt);
    bool ok = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail
                  << "\n";
        ok &= r.pass;
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FEC-coded storage download latency simulator"};
    app.require_subcommand(1);

    std::string format_name = "table";
    std::string out_dir;
    std::uint64_t seed = 0;
    std::uint32_t replications = 0;
    std::uint32_t arrivals = 0;
    unsigned workers = 0;

    auto add_common = [&](CLI::App* cmd, bool with_arrivals) {
        cmd->add_option("--seed", seed, "master seed override");
        cmd->add_option("--replications", replications, "replication count override");
        if (with_arrivals)
            cmd->add_option("--arrivals", arrivals, "arrivals per replication override");
        cmd->add_option("--workers", workers,
                        "worker threads (default: available parallelism)");
        cmd->add_option("--out", out_dir, "directory for CSV/JSON outputs");
        cmd->add_option("--format", format_name, "table|csv|json")
            ->check(CLI::IsMember({"table", "csv", "json"}));
    };

    std::string config_path;
    auto* run = app.add_subcommand("run", "run an experiment from a config file");
    run->add_option("config", config_path, "config file path")->required();
    add_common(run, false);

    std::string preset_name;
    std::string trace_path;
    auto* preset = app.add_subcommand("preset", "run a figure-style scenario preset");
    preset->add_option("name", preset_name, "fig6|fig7|fig8|fig9|fig10")->required();
    preset->add_option("--trace", trace_path,
                       "back fig9/fig10 with an empirical trace file");
    add_common(preset, true);

    std::string report_path;
    auto* trace = app.add_subcommand("trace-report", "statistics panel for a trace");
    trace->add_option("trace", report_path, "trace file path")->required();
    trace->add_option("--out", out_dir, "directory for report outputs");
    trace->add_option("--format", format_name, "table|json")
        ->check(CLI::IsMember({"table", "json"}));

    bool verify_all_flag = false;
    bool verify_full = false;
    auto* verify = app.add_subcommand("verify", "run the oracle/property suite");
    verify->add_flag("--all", verify_all_flag,
                     "include the full sweep checks (slower)");
    verify->add_flag("--full-tier", verify_full,
                     "use 50x62500 sweeps instead of the smoke tier");
    verify->add_option("--seed", seed, "master seed override");
    verify->add_option("--workers", workers, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        const Format format = parse_format(format_name);
        if (run->parsed())
            return cmd_run(config_path, seed, replications, workers, out_dir, format);
        if (preset->parsed()) {
            fecsim::PresetOverrides ov;
            if (seed) ov.seed = seed;
            if (replications) ov.replications = replications;
            if (arrivals) ov.arrivals = arrivals;
            if (!trace_path.empty()) ov.trace_path = trace_path;
            return cmd_preset(preset_name, ov, workers, out_dir, format);
        }
        if (trace->parsed()) return cmd_trace_report(report_path, out_dir, format);
        if (verify->parsed())
            return cmd_verify(verify_all_flag, verify_full, seed, workers);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
