#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "powmesh/errors.hpp"
#include "powmesh/simcore.hpp"
#include "powmesh/textio.hpp"

namespace powmesh {

/// Per-run observables. Fields are doubles so the same struct carries both
/// single runs (integral counts) and seed means.
struct RunStats {
    double total_blocks = 0;
    double stale_blocks = 0;
    double genuine_blocks = 0;
    double stale_rate = 0;       // fraction in [0, 1]
    double prop_delay_90 = 0;    // seconds
    double avg_traffic = 0;      // kilobits per second per device
    double throughput = 0;       // transactions per second
    double blocks_in_forks = 0;
};

inline RunStats mean_stats(const std::vector<RunStats>& runs) {
    RunStats m;
    if (runs.empty()) return m;
    for (const auto& r : runs) {
        m.total_blocks += r.total_blocks;
        m.stale_blocks += r.stale_blocks;
        m.genuine_blocks += r.genuine_blocks;
        m.stale_rate += r.stale_rate;
        m.prop_delay_90 += r.prop_delay_90;
        m.avg_traffic += r.avg_traffic;
        m.throughput += r.throughput;
        m.blocks_in_forks += r.blocks_in_forks;
    }
    const double k = static_cast<double>(runs.size());
    m.total_blocks /= k;
    m.stale_blocks /= k;
    m.genuine_blocks /= k;
    m.stale_rate /= k;
    m.prop_delay_90 /= k;
    m.avg_traffic /= k;
    m.throughput /= k;
    m.blocks_in_forks /= k;
    return m;
}

/// Reduces a finalized trace to the observable vector.
///
/// prop_delay_90 is the mean over genuine blocks of the time until 90% of
/// devices hold the block; a block that never reaches the threshold before
/// the trace closes contributes its right-censored floor (close - mined_at),
/// so congested settings report the blow-up instead of surviving early blocks
/// only. Traffic counts block transfer bytes, once as sent and once as
/// received.
inline RunStats compute_stats(const EventTrace& trace, const Network& network,
                              const SimConfig& config) {
    if (trace.blocks.empty() || trace.canonical_chain.empty())
        throw IncompleteTraceError("trace is not finalized");
    const int n = trace.device_count;
    if (n <= 0) throw IncompleteTraceError("trace has no devices");

    const auto summary = finalize_chain(trace);
    RunStats s;
    s.total_blocks = static_cast<double>(trace.mined_count());
    s.stale_blocks = static_cast<double>(summary.stale.size());
    s.genuine_blocks = s.total_blocks - s.stale_blocks;
    s.stale_rate = s.total_blocks > 0 ? s.stale_blocks / s.total_blocks : 0.0;

    std::map<std::int64_t, const Block*> block_by_id;
    for (const auto& b : trace.blocks) block_by_id[b.id] = &b;
    std::map<std::int64_t, std::vector<double>> delays;
    double close = trace.duration_s;
    for (const auto& r : trace.receptions) {
        delays[r.block].push_back(r.time - block_by_id.at(r.block)->mined_at);
        close = std::max(close, r.time);
    }

    const size_t need = static_cast<size_t>(std::ceil(0.9 * n));
    double delay_sum = 0;
    size_t delay_count = 0;
    for (const auto id : trace.canonical_chain) {
        if (id == kGenesisId) continue;
        auto it = delays.find(id);
        if (it != delays.end() && it->second.size() >= need) {
            std::nth_element(it->second.begin(), it->second.begin() + (need - 1), it->second.end());
            delay_sum += it->second[need - 1];
        } else {
            delay_sum += close - block_by_id.at(id)->mined_at;
        }
        ++delay_count;
    }
    s.prop_delay_90 = delay_count ? delay_sum / static_cast<double>(delay_count) : 0.0;

    double bytes = 0;
    for (const auto& t : trace.transfers) bytes += t.bytes;
    s.avg_traffic = bytes * 2.0 * 8.0 / (static_cast<double>(n) * config.duration_s) / 1000.0;

    s.throughput = s.genuine_blocks * (config.block_size / config.avg_tx_size) / config.duration_s;

    std::map<std::int64_t, int> child_count;
    for (const auto& b : trace.blocks)
        if (b.id != kGenesisId) ++child_count[b.parent];
    double in_forks = 0;
    for (const auto& b : trace.blocks)
        if (b.id != kGenesisId && child_count[b.parent] >= 2) ++in_forks;
    s.blocks_in_forks = in_forks;
    return s;
}

/// Fraction of devices that, averaged over genuine blocks, held each block
/// within one generation interval of its creation (the operational reading of
/// "functioning peer"). 1.0 when the trace carries no genuine block.
inline double functioning_fraction(const EventTrace& trace, double interval_s) {
    if (trace.blocks.empty() || trace.canonical_chain.empty())
        throw IncompleteTraceError("trace is not finalized");
    const int n = trace.device_count;
    std::map<std::int64_t, const Block*> block_by_id;
    for (const auto& b : trace.blocks) block_by_id[b.id] = &b;
    std::map<std::int64_t, int> on_time;
    for (const auto& r : trace.receptions)
        if (r.time - block_by_id.at(r.block)->mined_at <= interval_s) ++on_time[r.block];
    double sum = 0;
    size_t count = 0;
    for (const auto id : trace.canonical_chain) {
        if (id == kGenesisId) continue;
        sum += static_cast<double>(on_time[id]) / n;
        ++count;
    }
    return count ? sum / static_cast<double>(count) : 1.0;
}

// ---------------------------------------------------------------------------
// Integration-metric bounds

struct MetricBounds {
    double max_stale_rate = 0.02;
    double max_avg_traffic_kbps = 250.0;
    double decentralization_ratio_max = 1.0;
    double min_functioning_fraction = 0.90;

    void validate() const {
        if (max_stale_rate <= 0 || max_avg_traffic_kbps <= 0 || decentralization_ratio_max <= 0 ||
            min_functioning_fraction <= 0)
            throw ValidationError("metric bounds must be positive");
    }
};

inline MetricBounds parse_metric_bounds(const std::string& text, const std::string& origin) {
    MetricBounds b;
    for (const auto& line : content_lines(text)) {
        const auto toks = split_ws(line);
        if (toks.size() != 2) throw ParseError(origin + ": expected '<name> <value>' lines");
        const double v = parse_double(toks[1], toks[0]);
        if (toks[0] == "max_stale_rate")
            b.max_stale_rate = v;
        else if (toks[0] == "max_avg_traffic_kbps")
            b.max_avg_traffic_kbps = v;
        else if (toks[0] == "decentralization_ratio_max")
            b.decentralization_ratio_max = v;
        else if (toks[0] == "min_functioning_fraction")
            b.min_functioning_fraction = v;
        else
            throw ParseError(origin + ": unknown bound '" + toks[0] + "'");
    }
    b.validate();
    return b;
}

struct MetricEntry {
    std::string dimension;
    double measured = 0;
    std::optional<double> bound;  // empty for reported-only dimensions
    bool pass = true;
};

struct MetricReport {
    std::vector<MetricEntry> entries;
    bool overall_pass = true;

    const MetricEntry* find(const std::string& dimension) const {
        for (const auto& e : entries)
            if (e.dimension == dimension) return &e;
        return nullptr;
    }
};

/// Judges a run against the five integration dimensions. Scalability and
/// Security are reported; Decentralization (90% propagation / interval),
/// Efficiency (stale rate) and NetworkBandwidth (average traffic) are bounded
/// inclusively, and their conjunction is the overall verdict.
inline MetricReport check_bounds(const RunStats& stats, double interval_s,
                                 const MetricBounds& bounds) {
    if (interval_s <= 0) throw ValidationError("interval must be positive");
    bounds.validate();
    MetricReport report;
    report.entries.push_back({"Scalability", stats.throughput, std::nullopt, true});
    report.entries.push_back({"Security", stats.genuine_blocks, std::nullopt, true});

    const double ratio = stats.prop_delay_90 / interval_s;
    const bool dec = ratio <= bounds.decentralization_ratio_max;
    report.entries.push_back({"Decentralization", ratio, bounds.decentralization_ratio_max, dec});

    const bool eff = stats.stale_rate <= bounds.max_stale_rate;
    report.entries.push_back({"Efficiency", stats.stale_rate, bounds.max_stale_rate, eff});

    const bool net = stats.avg_traffic <= bounds.max_avg_traffic_kbps;
    report.entries.push_back({"NetworkBandwidth", stats.avg_traffic, bounds.max_avg_traffic_kbps, net});

    report.overall_pass = dec && eff && net;
    return report;
}

// ---------------------------------------------------------------------------
// Serialization. Field names follow the published table columns; StaleRate is
// emitted as a percentage.

inline const std::array<const char*, 7>& stat_field_names() {
    static const std::array<const char*, 7> names = {
        "TotalBlocks", "StaleBlocks", "GenuineBlocks", "StaleRate",
        "PropDelay90s", "AvgTrafficKbps", "ThroughputTxs"};
    return names;
}

inline std::vector<std::string> stat_field_values(const RunStats& s) {
    return {fmt_fixed(s.total_blocks, 2),    fmt_fixed(s.stale_blocks, 2),
            fmt_fixed(s.genuine_blocks, 2),  fmt_fixed(s.stale_rate * 100.0, 2),
            fmt_fixed(s.prop_delay_90, 2),   fmt_fixed(s.avg_traffic, 2),
            fmt_fixed(s.throughput, 2)};
}

inline std::string stats_record(const RunStats& s) {
    const auto& names = stat_field_names();
    const auto values = stat_field_values(s);
    std::string out;
    for (size_t i = 0; i < names.size(); ++i) out += std::string(names[i]) + " " + values[i] + "\n";
    return out;
}

inline std::string report_record(const MetricReport& report) {
    std::string out;
    for (const auto& e : report.entries) {
        out += e.dimension + " measured=" + fmt_fixed(e.measured, 4);
        if (e.bound) out += " bound=" + fmt_fixed(*e.bound, 4);
        out += e.bound ? (e.pass ? " pass" : " fail") : " reported";
        out += "\n";
    }
    out += std::string("Overall ") + (report.overall_pass ? "pass" : "fail") + "\n";
    return out;
}

}  // namespace powmesh
