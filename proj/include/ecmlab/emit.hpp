#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecmlab/config.hpp"
#include "ecmlab/harness.hpp"
#include "ecmlab/path.hpp"
#include "ecmlab/version.hpp"

namespace ecmlab {

// 17 significant digits: re-ingesting the text reproduces the double exactly.
inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string format_opt(const std::optional<double>& v) {
    return v ? format_full(*v) : std::string();
}

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace detail {
inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}
}  // namespace detail

// One row per cell x strategy; fixed column order (see README).
inline void write_cells_csv(const SweepResult& result, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << "family,axis,axis_value,variant,strategy,sims,failures,defaults,included,"
           "prob_default_pct,logw_q25,logw_median,logw_q75,uptime_q25,uptime_median,"
           "uptime_q75,lambda_q25,lambda_median,lambda_q75\n";
    for (const auto& cell : result.cells) {
        for (const auto& s : cell.strategies) {
            out << family_name(result.family) << ',' << cell.axis << ','
                << format_full(cell.axis_value) << ',' << cell.variant << ',' << s.label << ','
                << s.counts.total << ',' << s.counts.failures << ',' << s.counts.defaults << ','
                << s.counts.included << ',' << format_full(s.prob_default_pct) << ','
                << format_full(s.terminal_log_wealth.q25) << ','
                << format_full(s.terminal_log_wealth.median) << ','
                << format_full(s.terminal_log_wealth.q75) << ','
                << format_full(s.uptime_pct.q25) << ',' << format_full(s.uptime_pct.median)
                << ',' << format_full(s.uptime_pct.q75) << ','
                << format_full(s.mean_lambda.q25) << ',' << format_full(s.mean_lambda.median)
                << ',' << format_full(s.mean_lambda.q75) << '\n';
        }
    }
}

// Nine metric rows by strategy columns, one file per histogram cell.
inline void write_metrics_table_csv(const SweepCell& cell, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << "metric";
    for (const auto& s : cell.strategies) out << ',' << s.label;
    out << '\n';
    const auto row = [&](const char* name, auto getter) {
        out << name;
        for (const auto& s : cell.strategies) {
            out << ',';
            if (s.report) out << getter(*s.report);
        }
        out << '\n';
    };
    row("prob_outperf_pct", [](const MetricsReport& r) { return format_full(r.prob_outperf_pct); });
    row("avg_odds", [](const MetricsReport& r) { return format_opt(r.avg_odds); });
    row("mean_outperf", [](const MetricsReport& r) { return format_opt(r.mean_outperf); });
    row("prob_default_pct", [](const MetricsReport& r) { return format_full(r.prob_default_pct); });
    row("uptime_pct", [](const MetricsReport& r) { return format_opt(r.uptime_pct); });
    row("sharpe_ann", [](const MetricsReport& r) { return format_opt(r.sharpe_ann); });
    row("calmar_mon", [](const MetricsReport& r) { return format_opt(r.calmar_mon); });
    row("sdrsr_ann", [](const MetricsReport& r) { return format_opt(r.sdrsr_ann); });
    row("cagr_pct_per_year", [](const MetricsReport& r) { return format_opt(r.cagr_pct); });
}

// Long-format histogram bins plus a marker row per strategy.
inline void write_histograms_csv(const SweepResult& result, const std::filesystem::path& bins_path,
                                 const std::filesystem::path& markers_path) {
    auto bins = detail::open_out(bins_path);
    bins << "axis_value,strategy,bin_lo,bin_hi,count\n";
    auto markers = detail::open_out(markers_path);
    markers << "axis_value,strategy,mean,median,neg_mean,pos_mean,excluded_defaults\n";
    for (const auto& cell : result.cells) {
        for (const auto& s : cell.strategies) {
            if (!s.outperf_hist) continue;
            const auto& h = *s.outperf_hist;
            for (std::size_t b = 0; b < h.counts.size(); ++b)
                bins << format_full(cell.axis_value) << ',' << s.label << ','
                     << format_full(h.edges[b]) << ',' << format_full(h.edges[b + 1]) << ','
                     << h.counts[b] << '\n';
            markers << format_full(cell.axis_value) << ',' << s.label << ','
                    << format_full(h.mean) << ',' << format_full(h.median_value) << ','
                    << format_opt(h.neg_mean) << ',' << format_opt(h.pos_mean) << ','
                    << h.excluded_defaults << '\n';
        }
    }
}

// Raw trajectories, one row per (simulation, step).
inline void write_paths_csv(const std::vector<PricePath>& paths,
                            const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << "sim,t,price,normal_price,mispricing_ratio,branch,kappa\n";
    for (const auto& p : paths) {
        for (std::size_t t = 0; t < p.steps.size(); ++t) {
            const auto& s = p.steps[t];
            out << p.seed.sim_index << ',' << t << ',' << format_full(s.price) << ','
                << format_full(s.normal_price) << ',' << format_full(s.mispricing_ratio) << ','
                << (s.branch == Branch::jump ? "jump" : "no_jump") << ','
                << (s.kappa ? format_full(*s.kappa) : std::string()) << '\n';
        }
    }
}

struct RunManifest {
    std::string command;
    RunConfig config;
    double wall_time_s = 0.0;
    std::vector<std::string> outputs;
    std::size_t generation_failures = 0;
};

inline void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["version"] = kVersion;
    doc["command"] = m.command;
    doc["master_seed"] = m.config.run.master_seed;
    doc["sims"] = m.config.run.sims;
    doc["config"] = to_json(m.config);
    doc["config_hash"] = std::to_string(fnv1a64(to_json(m.config).dump()));
    doc["wall_time_s"] = m.wall_time_s;
    doc["outputs"] = m.outputs;
    doc["generation_failures"] = m.generation_failures;
    auto out = detail::open_out(path);
    out << doc.dump(2) << '\n';
}

// Writes every artifact of a sweep into out_dir; returns file names written.
inline std::vector<std::string> emit(const SweepResult& result, const RunConfig& cfg,
                                     const std::string& command, double wall_time_s) {
    const std::filesystem::path dir(cfg.run.out_dir);
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;

    write_cells_csv(result, dir / "cells.csv");
    written.push_back("cells.csv");

    if (result.family == Family::histogram) {
        for (const auto& cell : result.cells) {
            const std::string name =
                "metrics_T" + std::to_string(static_cast<long>(cell.axis_value)) + ".csv";
            write_metrics_table_csv(cell, dir / name);
            written.push_back(name);
        }
        write_histograms_csv(result, dir / "histogram_bins.csv", dir / "histogram_markers.csv");
        written.push_back("histogram_bins.csv");
        written.push_back("histogram_markers.csv");
    }

    RunManifest manifest;
    manifest.command = command;
    manifest.config = cfg;
    manifest.wall_time_s = wall_time_s;
    manifest.outputs = written;
    for (const auto& cell : result.cells)
        if (!cell.strategies.empty())
            manifest.generation_failures += cell.strategies.front().counts.failures;
    write_manifest(manifest, dir / "manifest.json");
    written.push_back("manifest.json");
    return written;
}

}  // namespace ecmlab
