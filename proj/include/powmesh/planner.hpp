#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "powmesh/errors.hpp"
#include "powmesh/metrics.hpp"
#include "powmesh/netmodel.hpp"
#include "powmesh/parallel.hpp"
#include "powmesh/simcore.hpp"

namespace powmesh {

// ---------------------------------------------------------------------------
// Inventory

struct Inventory {
    std::vector<DeviceSpec> devices;
    LatencyMatrix latency;

    void validate() const {
        if (devices.empty()) throw ValidationError("inventory has no devices");
        for (const auto& d : devices) {
            if (!latency.city_index(d.city))
                throw ValidationError("device " + std::to_string(d.id) + " city '" + d.city +
                                      "' missing from latency matrix");
            if (d.arch_role == ArchRole::Outsider)
                throw ValidationError("device " + std::to_string(d.id) +
                                      " is an outsider and cannot join a sub-blockchain");
        }
    }
};

inline std::string serialize_inventory(const Inventory& inv, const std::string& latency_ref) {
    std::string out = "powmesh-inventory v1\n";
    out += "latency " + latency_ref + "\n";
    out += "devices " + std::to_string(inv.devices.size()) + "\n";
    for (const auto& d : inv.devices)
        out += std::to_string(d.id) + "\t" + to_string(d.role) + "\t" + to_string(d.arch_role) +
               "\t" + d.city + "\t" + fmt_fixed(d.download_bw, 3) + "\t" +
               fmt_fixed(d.upload_bw, 3) + "\t" + fmt_fixed(d.mining_power, 6) + "\n";
    return out;
}

/// Inventory files name their latency source: "builtin:<setup>" or a path
/// (resolved relative to the caller's working directory).
inline Inventory parse_inventory(const std::string& text, const std::string& origin) {
    const auto lines = content_lines(text);
    size_t pos = 0;
    auto next_line = [&]() -> const std::string& {
        if (pos >= lines.size()) throw ParseError(origin + ": truncated inventory file");
        return lines[pos++];
    };
    if (next_line().rfind("powmesh-inventory", 0) != 0)
        throw ParseError(origin + ": missing powmesh-inventory header");
    Inventory inv;
    {
        const auto toks = split_ws(next_line());
        if (toks.size() != 2 || toks[0] != "latency")
            throw ParseError(origin + ": expected 'latency <builtin:name|path>'");
        if (toks[1].rfind("builtin:", 0) == 0)
            inv.latency = builtin_setup(toks[1].substr(8));
        else
            inv.latency = load_latency_matrix(toks[1]);
    }
    const auto head = split_ws(next_line());
    if (head.size() != 2 || head[0] != "devices")
        throw ParseError(origin + ": expected 'devices <n>'");
    const auto n = parse_int(head[1], "device count");
    if (n <= 0) throw ValidationError(origin + ": inventory lists no devices");
    for (std::int64_t i = 0; i < n; ++i) {
        const auto cols = split(next_line(), '\t');
        if (cols.size() != 7)
            throw ParseError(origin + ": device line needs 7 tab-separated fields");
        DeviceSpec d;
        d.id = parse_int(cols[0], "device id");
        d.role = role_from_string(cols[1]);
        d.arch_role = arch_role_from_string(cols[2]);
        d.city = cols[3];
        d.download_bw = parse_double(cols[4], "download_bw");
        d.upload_bw = parse_double(cols[5], "upload_bw");
        d.mining_power = parse_double(cols[6], "mining_power");
        inv.devices.push_back(std::move(d));
    }
    inv.validate();
    return inv;
}

inline Inventory load_inventory(const std::string& path) {
    return parse_inventory(read_file(path), path);
}

// ---------------------------------------------------------------------------
// Geographic partitioning

/// Splits the inventory into geographically coherent clusters of at most
/// size_cap devices: seeded farthest-first k-medoids on the latency matrix,
/// capacity-respecting reassignment, then miner/regular swaps so every
/// cluster keeps a workable miner fraction.
inline std::vector<std::vector<std::int64_t>> partition(const Inventory& inv, int size_cap = 250,
                                                        std::uint64_t seed = 1) {
    inv.validate();
    if (size_cap < 2) throw ValidationError("size_cap must be at least 2");
    const size_t n = inv.devices.size();
    const size_t k = (n + size_cap - 1) / size_cap;

    size_t total_miners = 0;
    for (const auto& d : inv.devices) total_miners += d.role == Role::Miner;
    if (total_miners < k)
        throw InfeasiblePartitionError("need at least " + std::to_string(k) +
                                       " miners for " + std::to_string(k) +
                                       " clusters, inventory has " + std::to_string(total_miners));

    std::vector<size_t> city_of(n);
    for (size_t i = 0; i < n; ++i) city_of[i] = *inv.latency.city_index(inv.devices[i].city);
    auto dist = [&](size_t a, size_t b) { return inv.latency.at(city_of[a], city_of[b]); };

    // Farthest-first medoid seeding.
    Rng rng = rng_stream(seed, "partition");
    std::vector<size_t> medoids{static_cast<size_t>(rng.below(n))};
    while (medoids.size() < k) {
        size_t best = 0;
        double best_d = -1;
        for (size_t i = 0; i < n; ++i) {
            double nearest = std::numeric_limits<double>::infinity();
            for (const size_t m : medoids) nearest = std::min(nearest, dist(i, m));
            if (nearest > best_d) {
                best_d = nearest;
                best = i;
            }
        }
        medoids.push_back(best);
    }

    std::vector<int> assignment(n, 0);
    for (int iter = 0; iter < 30; ++iter) {
        for (size_t i = 0; i < n; ++i) {
            int best_c = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (size_t c = 0; c < k; ++c) {
                const double d = dist(i, medoids[c]);
                if (d < best_d) {
                    best_d = d;
                    best_c = static_cast<int>(c);
                }
            }
            assignment[i] = best_c;
        }
        bool changed = false;
        for (size_t c = 0; c < k; ++c) {
            std::vector<size_t> members;
            for (size_t i = 0; i < n; ++i)
                if (assignment[i] == static_cast<int>(c)) members.push_back(i);
            if (members.empty()) continue;
            size_t best_m = members[0];
            double best_cost = std::numeric_limits<double>::infinity();
            for (const size_t cand : members) {
                double cost = 0;
                for (const size_t other : members) cost += dist(cand, other);
                if (cost < best_cost) {
                    best_cost = cost;
                    best_m = cand;
                }
            }
            if (medoids[c] != best_m) {
                medoids[c] = best_m;
                changed = true;
            }
        }
        if (!changed) break;
    }

    // Capacity repair: overfull clusters shed their farthest members to the
    // nearest cluster with room.
    std::vector<std::vector<size_t>> clusters(k);
    for (size_t i = 0; i < n; ++i) clusters[assignment[i]].push_back(i);
    for (;;) {
        size_t over = k;
        for (size_t c = 0; c < k; ++c)
            if (clusters[c].size() > static_cast<size_t>(size_cap)) {
                over = c;
                break;
            }
        if (over == k) break;
        size_t worst = clusters[over][0];
        double worst_d = -1;
        for (const size_t i : clusters[over]) {
            const double d = dist(i, medoids[over]);
            if (d > worst_d) {
                worst_d = d;
                worst = i;
            }
        }
        size_t target = k;
        double target_d = std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < k; ++c) {
            if (c == over || clusters[c].size() >= static_cast<size_t>(size_cap)) continue;
            const double d = dist(worst, medoids[c]);
            if (d < target_d) {
                target_d = d;
                target = c;
            }
        }
        if (target == k) break;  // no room anywhere; caps sum below n cannot happen
        auto& src = clusters[over];
        src.erase(std::find(src.begin(), src.end(), worst));
        clusters[target].push_back(worst);
    }

    // Miner-fraction repair: swap a miner for a regular between clusters until
    // each cluster sits inside [5%, 9%] (at least one miner regardless).
    auto miner_count = [&](const std::vector<size_t>& cluster) {
        size_t m = 0;
        for (const size_t i : cluster) m += inv.devices[i].role == Role::Miner;
        return m;
    };
    auto lo_bound = [&](size_t size) {
        return std::max<size_t>(1, static_cast<size_t>(std::ceil(0.05 * size)));
    };
    auto hi_bound = [&](size_t size) {
        return std::max(lo_bound(size), static_cast<size_t>(std::floor(0.09 * size)));
    };
    auto pick = [&](const std::vector<size_t>& cluster, Role role) -> std::optional<size_t> {
        std::optional<size_t> best;
        for (const size_t i : cluster)
            if (inv.devices[i].role == role && (!best || inv.devices[i].id < inv.devices[*best].id))
                best = i;
        return best;
    };
    for (size_t guard = 0; guard < 4 * n; ++guard) {
        size_t needy = k, donor = k;
        for (size_t c = 0; c < k; ++c)
            if (miner_count(clusters[c]) < lo_bound(clusters[c].size())) {
                needy = c;
                break;
            }
        if (needy == k) {
            for (size_t c = 0; c < k; ++c)
                if (miner_count(clusters[c]) > hi_bound(clusters[c].size())) {
                    donor = c;
                    break;
                }
            if (donor == k) break;
            // Overfull donor: hand a miner to the cluster furthest below its cap.
            size_t best = k;
            double spare = -1;
            for (size_t c = 0; c < k; ++c) {
                if (c == donor) continue;
                const double room = static_cast<double>(hi_bound(clusters[c].size())) -
                                    static_cast<double>(miner_count(clusters[c]));
                if (room > spare) {
                    spare = room;
                    best = c;
                }
            }
            if (best == k || spare <= 0) break;
            needy = best;
        } else {
            double surplus = 0;
            for (size_t c = 0; c < k; ++c) {
                if (c == needy) continue;
                const double extra = static_cast<double>(miner_count(clusters[c])) -
                                     static_cast<double>(lo_bound(clusters[c].size()));
                if (extra > surplus) {
                    surplus = extra;
                    donor = c;
                }
            }
            if (donor == k) break;  // nothing to give; leave best effort
        }
        const auto miner = pick(clusters[donor], Role::Miner);
        const auto regular = pick(clusters[needy], Role::Regular);
        if (!miner || !regular) break;
        auto& d = clusters[donor];
        auto& m = clusters[needy];
        d.erase(std::find(d.begin(), d.end(), *miner));
        m.erase(std::find(m.begin(), m.end(), *regular));
        d.push_back(*regular);
        m.push_back(*miner);
    }

    std::vector<std::vector<std::int64_t>> out(k);
    for (size_t c = 0; c < k; ++c) {
        if (miner_count(clusters[c]) == 0)
            throw InfeasiblePartitionError("cluster " + std::to_string(c) + " ended with no miner");
        for (const size_t i : clusters[c]) out[c].push_back(inv.devices[i].id);
        std::sort(out[c].begin(), out[c].end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Parameter search

struct SubchainPlan {
    std::vector<std::int64_t> member_ids;
    double block_size = 0;
    double interval_s = 0;
    RunStats predicted;
    MetricReport report;
};

struct CandidateCell {
    double block_size = 0;
    double interval_s = 0;
    RunStats mean;
    MetricReport report;
    double violation = 0;  // 0 when all bounded dimensions pass
};

struct PlanSearchResult {
    bool feasible = false;
    SubchainPlan plan;
    std::vector<CandidateCell> grid;
    std::string diagnostic;
};

inline double bound_violation(const MetricReport& report) {
    double v = 0;
    for (const auto& e : report.entries)
        if (e.bound && e.measured > *e.bound) v += e.measured / *e.bound - 1.0;
    return v;
}

/// Simulates every candidate (block size, interval) pair averaged over seeds
/// and picks the passing pair with the highest mean throughput (ties: shorter
/// interval, then smaller block). When nothing passes, the least-violating
/// pair is returned with feasible=false and the full grid for audit.
inline PlanSearchResult search_parameters(const Network& cluster,
                                          const std::vector<double>& candidate_sizes,
                                          const std::vector<double>& candidate_intervals,
                                          const std::vector<std::uint64_t>& seeds,
                                          const MetricBounds& bounds, double duration_s = 6000.0,
                                          double avg_tx_size = 250.0, int jobs = 0) {
    if (candidate_sizes.empty() || candidate_intervals.empty())
        throw ValidationError("candidate lists must be nonempty");
    if (seeds.empty()) throw ValidationError("seed list must be nonempty");
    for (const double s : candidate_sizes)
        if (s > 1e6)
            throw ValidationError("candidate block size " + fmt_fixed(s, 0) +
                                  " exceeds the 1 MB sub-blockchain guideline");
    validate_network(cluster);
    if (cluster.miner_count() == 0) throw NoMinersError();

    struct Cell {
        double size, interval;
    };
    std::vector<Cell> cells;
    for (const double size : candidate_sizes)
        for (const double interval : candidate_intervals) cells.push_back({size, interval});

    std::vector<RunStats> per_run(cells.size() * seeds.size());
    parallel_for(per_run.size(), jobs, [&](size_t flat) {
        const size_t cell = flat / seeds.size();
        const size_t si = flat % seeds.size();
        SimConfig config;
        config.block_size = cells[cell].size;
        config.regime = MiningRegime::fixed_interval(cells[cell].interval);
        config.duration_s = duration_s;
        config.avg_tx_size = avg_tx_size;
        config.seed = seeds[si];
        const auto trace = run(cluster, config);
        per_run[flat] = compute_stats(trace, cluster, config);
    });

    PlanSearchResult result;
    for (size_t c = 0; c < cells.size(); ++c) {
        std::vector<RunStats> runs(per_run.begin() + c * seeds.size(),
                                   per_run.begin() + (c + 1) * seeds.size());
        CandidateCell cell;
        cell.block_size = cells[c].size;
        cell.interval_s = cells[c].interval;
        cell.mean = mean_stats(runs);
        cell.report = check_bounds(cell.mean, cells[c].interval, bounds);
        cell.violation = bound_violation(cell.report);
        result.grid.push_back(std::move(cell));
    }

    const CandidateCell* best = nullptr;
    for (const auto& cell : result.grid) {
        if (!cell.report.overall_pass) continue;
        if (!best || cell.mean.throughput > best->mean.throughput ||
            (cell.mean.throughput == best->mean.throughput &&
             (cell.interval_s < best->interval_s ||
              (cell.interval_s == best->interval_s && cell.block_size < best->block_size))))
            best = &cell;
    }
    result.feasible = best != nullptr;
    if (!best) {
        for (const auto& cell : result.grid) {
            if (!best || cell.violation < best->violation ||
                (cell.violation == best->violation &&
                 (cell.mean.throughput > best->mean.throughput ||
                  (cell.mean.throughput == best->mean.throughput &&
                   (cell.interval_s < best->interval_s ||
                    (cell.interval_s == best->interval_s && cell.block_size < best->block_size))))))
                best = &cell;
        }
        result.diagnostic = "no candidate pair satisfies the metric bounds; least-violating pair " +
                            fmt_fixed(best->block_size, 0) + " B / " +
                            fmt_fixed(best->interval_s, 0) + " s violates by " +
                            fmt_fixed(best->violation, 4);
    }
    for (const auto& d : cluster.devices) result.plan.member_ids.push_back(d.id);
    result.plan.block_size = best->block_size;
    result.plan.interval_s = best->interval_s;
    result.plan.predicted = best->mean;
    result.plan.report = best->report;
    return result;
}

/// Builds the per-cluster sub-network for a partition cell: the member
/// devices keep their inventory bandwidth, topology is wired fresh.
inline Network cluster_network(const Inventory& inv, const std::vector<std::int64_t>& member_ids,
                               const DegreeProfile& degrees, std::uint64_t seed,
                               const GenOptions& opts = {}) {
    std::map<std::int64_t, const DeviceSpec*> by_id;
    for (const auto& d : inv.devices) by_id[d.id] = &d;
    std::vector<DeviceSpec> members;
    for (const auto id : member_ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end())
            throw ValidationError("cluster member " + std::to_string(id) + " not in inventory");
        members.push_back(*it->second);
    }
    return wire_topology(std::move(members), inv.latency, degrees, seed, opts);
}

inline std::string plan_document(const std::vector<std::vector<std::int64_t>>& clusters,
                                 const std::vector<PlanSearchResult>& results) {
    std::string out = "powmesh-plan v1\n";
    out += "clusters " + std::to_string(clusters.size()) + "\n";
    for (size_t c = 0; c < clusters.size(); ++c) {
        const auto& r = results[c];
        out += "cluster " + std::to_string(c) + " size " + std::to_string(clusters[c].size()) +
               " feasible " + (r.feasible ? "true" : "false") + " block_size " +
               fmt_fixed(r.plan.block_size, 0) + " interval_s " + fmt_fixed(r.plan.interval_s, 2) +
               " throughput " + fmt_fixed(r.plan.predicted.throughput, 2) + "\n";
        out += "members";
        for (const auto id : clusters[c]) out += " " + std::to_string(id);
        out += "\n";
        out += "predicted ";
        {
            const auto values = stat_field_values(r.plan.predicted);
            const auto& names = stat_field_names();
            for (size_t i = 0; i < names.size(); ++i)
                out += std::string(i ? " " : "") + names[i] + "=" + values[i];
        }
        out += "\n";
        if (!r.diagnostic.empty()) out += "diagnostic " + r.diagnostic + "\n";
        out += "grid BlockSizeB IntervalS Pass Violation StaleRatePct PropDelay90s AvgTrafficKbps "
               "ThroughputTxs\n";
        for (const auto& cell : r.grid) {
            out += "cell " + fmt_fixed(cell.block_size, 0) + " " + fmt_fixed(cell.interval_s, 2) +
                   " " + (cell.report.overall_pass ? "pass" : "fail") + " " +
                   fmt_fixed(cell.violation, 4) + " " + fmt_fixed(cell.mean.stale_rate * 100, 2) +
                   " " + fmt_fixed(cell.mean.prop_delay_90, 2) + " " +
                   fmt_fixed(cell.mean.avg_traffic, 2) + " " + fmt_fixed(cell.mean.throughput, 2) +
                   "\n";
        }
    }
    return out;
}

}  // namespace powmesh
