#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "powmesh/metrics.hpp"
#include "powmesh/netmodel.hpp"
#include "powmesh/parallel.hpp"
#include "powmesh/security.hpp"
#include "powmesh/simcore.hpp"

namespace powmesh {

enum class PresetName {
    Eval1_BlockGrid,
    Eval2_Locations,
    Eval3A_FixedDifficulty,
    Eval3B_FixedInterval,
    Security_Table7,
};

inline std::string to_string(PresetName p) {
    switch (p) {
        case PresetName::Eval1_BlockGrid: return "eval1-block-grid";
        case PresetName::Eval2_Locations: return "eval2-locations";
        case PresetName::Eval3A_FixedDifficulty: return "eval3a-fixed-difficulty";
        case PresetName::Eval3B_FixedInterval: return "eval3b-fixed-interval";
        default: return "security-table7";
    }
}

inline std::optional<PresetName> preset_from_string(const std::string& name) {
    const std::string l = lower(name);
    if (l == "eval1-block-grid" || l == "eval1") return PresetName::Eval1_BlockGrid;
    if (l == "eval2-locations" || l == "eval2") return PresetName::Eval2_Locations;
    if (l == "eval3a-fixed-difficulty" || l == "eval3a") return PresetName::Eval3A_FixedDifficulty;
    if (l == "eval3b-fixed-interval" || l == "eval3b") return PresetName::Eval3B_FixedInterval;
    if (l == "security-table7" || l == "table7" || l == "security") return PresetName::Security_Table7;
    return std::nullopt;
}

struct SweepCell {
    std::vector<std::string> labels;  // values for the leading CSV columns
    std::string setup;
    int n_devices = 250;
    double miner_ratio = kDefaultMinerRatio;
    double block_size = 500e3;
    MiningRegime regime;
    double difficulty = 1.0;  // work bookkeeping for the security schema
};

struct SweepSpec {
    enum class Schema { Stats, SecurityWork };
    std::string name;
    std::vector<std::string> label_names;
    std::vector<SweepCell> cells;
    Schema schema = Schema::Stats;
};

inline SweepSpec build_preset(PresetName preset) {
    SweepSpec spec;
    spec.name = to_string(preset);
    const std::vector<double> grid_intervals = {600, 300, 60, 30, 10, 5};

    switch (preset) {
        case PresetName::Eval1_BlockGrid: {
            spec.label_names = {"BlockSizeB", "IntervalS"};
            const std::vector<double> sizes = {10e6, 5e6, 1e6, 500e3, 100e3, 50e3, 10e3};
            for (const double size : sizes)
                for (const double interval : grid_intervals) {
                    SweepCell cell;
                    cell.labels = {fmt_fixed(size, 0), fmt_fixed(interval, 0)};
                    cell.setup = "netherlands";
                    cell.block_size = size;
                    cell.regime = MiningRegime::fixed_interval(interval);
                    spec.cells.push_back(std::move(cell));
                }
            break;
        }
        case PresetName::Eval2_Locations: {
            spec.label_names = {"IntervalS", "Setup"};
            for (const double interval : grid_intervals)
                for (const std::string setup : {"netherlands", "europe", "world"}) {
                    SweepCell cell;
                    cell.labels = {fmt_fixed(interval, 0), setup};
                    cell.setup = setup;
                    cell.block_size = 500e3;
                    cell.regime = MiningRegime::fixed_interval(interval);
                    spec.cells.push_back(std::move(cell));
                }
            break;
        }
        case PresetName::Eval3A_FixedDifficulty:
        case PresetName::Eval3B_FixedInterval: {
            const bool fixed_difficulty = preset == PresetName::Eval3A_FixedDifficulty;
            spec.label_names = fixed_difficulty
                                   ? std::vector<std::string>{"Miners", "Devices", "IntervalS"}
                                   : std::vector<std::string>{"Miners", "Devices", "PoWDifficulty"};
            const int devices[7] = {83, 166, 250, 500, 750, 1000, 1250};
            const int miners[7] = {6, 12, 18, 36, 54, 72, 90};
            for (int i = 0; i < 7; ++i) {
                SweepCell cell;
                cell.setup = "netherlands";
                cell.n_devices = devices[i];
                cell.miner_ratio = kDefaultMinerRatio;
                cell.block_size = 500e3;
                if (fixed_difficulty) {
                    cell.regime = MiningRegime::fixed_difficulty(1.0, 6, 180.0);
                    const double interval = 180.0 * 6 / miners[i];
                    cell.labels = {std::to_string(miners[i]), std::to_string(devices[i]),
                                   fmt_fixed(interval, 0)};
                } else {
                    cell.regime = MiningRegime::fixed_interval(60.0);
                    cell.difficulty = static_cast<double>(miners[i]) / 6.0;
                    cell.labels = {std::to_string(miners[i]), std::to_string(devices[i]),
                                   fmt_g(cell.difficulty)};
                }
                spec.cells.push_back(std::move(cell));
            }
            break;
        }
        case PresetName::Security_Table7: {
            spec.schema = SweepSpec::Schema::SecurityWork;
            spec.label_names = {"BlockSize", "Scenario", "PoWDifficulty", "IntervalS"};
            for (const auto& sc : table7_scenarios()) {
                SweepCell cell;
                const char* size_label = sc.block_size == 100e3   ? "100KB"
                                         : sc.block_size == 500e3 ? "500KB"
                                                                  : "1MB";
                cell.labels = {size_label, sc.label, fmt_g(sc.difficulty),
                               fmt_fixed(sc.interval_s, 0)};
                cell.setup = sc.setup;
                cell.n_devices = sc.n_devices;
                cell.miner_ratio = static_cast<double>(sc.n_miners) / sc.n_devices;
                cell.block_size = sc.block_size;
                cell.regime = MiningRegime::fixed_interval(sc.interval_s);
                cell.difficulty = sc.difficulty;
                spec.cells.push_back(std::move(cell));
            }
            break;
        }
    }
    return spec;
}

struct SweepOutcome {
    SweepSpec spec;
    std::vector<std::uint64_t> seeds;
    std::vector<std::vector<RunStats>> runs;  // [cell][seed]
    std::vector<RunStats> means;
};

/// Executes every (cell, seed) simulation on the worker pool. A fresh network
/// is generated per seed, mirroring independent experimental runs.
inline SweepOutcome run_sweep(const SweepSpec& spec, const std::vector<std::uint64_t>& seeds,
                              double duration_s = 6000.0, double avg_tx_size = 250.0,
                              int jobs = 0, const DegreeProfile& degrees = {},
                              const GenOptions& gen = {}) {
    if (seeds.empty()) throw ValidationError("seed list must be nonempty");
    std::map<std::string, LatencyMatrix> matrices;
    for (const auto& cell : spec.cells)
        if (!matrices.count(cell.setup)) matrices.emplace(cell.setup, builtin_setup(cell.setup));

    SweepOutcome out;
    out.spec = spec;
    out.seeds = seeds;
    out.runs.assign(spec.cells.size(), std::vector<RunStats>(seeds.size()));

    const auto bw = BandwidthDistribution::defaults();
    parallel_for(spec.cells.size() * seeds.size(), jobs, [&](size_t flat) {
        const size_t ci = flat / seeds.size();
        const size_t si = flat % seeds.size();
        const auto& cell = spec.cells[ci];
        const auto network = generate_network(cell.n_devices, cell.miner_ratio,
                                              matrices.at(cell.setup), bw, degrees,
                                              seeds[si], gen);
        SimConfig config;
        config.block_size = cell.block_size;
        config.regime = cell.regime;
        config.duration_s = duration_s;
        config.avg_tx_size = avg_tx_size;
        config.seed = seeds[si];
        const auto trace = run(network, config);
        out.runs[ci][si] = compute_stats(trace, network, config);
    });
    for (const auto& cell_runs : out.runs) out.means.push_back(mean_stats(cell_runs));
    return out;
}

// ---------------------------------------------------------------------------
// CSV emission

inline std::string csv_join(const std::vector<std::string>& cols) {
    std::string out;
    for (size_t i = 0; i < cols.size(); ++i) {
        if (i) out += ',';
        out += cols[i];
    }
    out += '\n';
    return out;
}

inline std::vector<std::string> sweep_value_columns(const SweepSpec& spec, const SweepCell& cell,
                                                    const RunStats& stats) {
    if (spec.schema == SweepSpec::Schema::SecurityWork)
        return {fmt_fixed(stats.genuine_blocks, 2), fmt_fixed(stats.stale_rate * 100, 2),
                fmt_fixed(total_work(stats.genuine_blocks, cell.difficulty), 2)};
    return stat_field_values(stats);
}

inline std::string sweep_csv_header(const SweepSpec& spec) {
    std::vector<std::string> cols = spec.label_names;
    if (spec.schema == SweepSpec::Schema::SecurityWork) {
        cols.insert(cols.end(), {"GenuineBlocks", "StaleRate", "TotalPoW"});
    } else {
        for (const auto* name : stat_field_names()) cols.push_back(name);
    }
    cols.push_back("Seeds");
    return csv_join(cols);
}

/// Seed-mean CSV, rows in the preset's table order.
inline std::string sweep_csv_mean(const SweepOutcome& outcome) {
    std::string out = sweep_csv_header(outcome.spec);
    const std::string seeds = describe_seeds(outcome.seeds);
    for (size_t c = 0; c < outcome.spec.cells.size(); ++c) {
        auto cols = outcome.spec.cells[c].labels;
        for (auto& v : sweep_value_columns(outcome.spec, outcome.spec.cells[c], outcome.means[c]))
            cols.push_back(std::move(v));
        cols.push_back(seeds);
        out += csv_join(cols);
    }
    return out;
}

/// Single-seed sidecar CSV.
inline std::string sweep_csv_seed(const SweepOutcome& outcome, size_t seed_index) {
    std::string out = sweep_csv_header(outcome.spec);
    for (size_t c = 0; c < outcome.spec.cells.size(); ++c) {
        auto cols = outcome.spec.cells[c].labels;
        for (auto& v : sweep_value_columns(outcome.spec, outcome.spec.cells[c],
                                           outcome.runs[c][seed_index]))
            cols.push_back(std::move(v));
        cols.push_back(std::to_string(outcome.seeds[seed_index]));
        out += csv_join(cols);
    }
    return out;
}

/// Minimal static SVG rendering of one numeric CSV column per row index.
/// Plotting is cosmetic; CSV bytes and exit codes never depend on it.
inline std::string csv_polyline_svg(const std::vector<double>& values, const std::string& title) {
    const int w = 640, h = 360, pad = 40;
    double lo = 0, hi = 1;
    for (const double v : values) hi = std::max(hi, v);
    std::string svg = "<svg xmlns='http://www.w3.org/2000/svg' width='" + std::to_string(w) +
                      "' height='" + std::to_string(h) + "'>\n";
    svg += "<rect width='100%' height='100%' fill='white'/>\n";
    svg += "<text x='" + std::to_string(pad) + "' y='20' font-size='14'>" + title + "</text>\n";
    if (values.size() > 1) {
        svg += "<polyline fill='none' stroke='black' stroke-width='1.5' points='";
        for (size_t i = 0; i < values.size(); ++i) {
            const double x = pad + (w - 2.0 * pad) * static_cast<double>(i) / (values.size() - 1);
            const double y = h - pad - (h - 2.0 * pad) * (values[i] - lo) / (hi - lo);
            svg += fmt_fixed(x, 1) + "," + fmt_fixed(y, 1) + " ";
        }
        svg += "'/>\n";
    }
    svg += "<line x1='" + std::to_string(pad) + "' y1='" + std::to_string(h - pad) + "' x2='" +
           std::to_string(w - pad) + "' y2='" + std::to_string(h - pad) + "' stroke='gray'/>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace powmesh
