// Acceptance suite: reproduces the published evaluation anchors and trends at
// their stated tolerances, one verdict line per criterion. Exits nonzero if
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "powmesh/metrics.hpp"
#include "powmesh/netmodel.hpp"
#include "powmesh/parallel.hpp"
#include "powmesh/planner.hpp"
#include "powmesh/presets.hpp"
#include "powmesh/security.hpp"
#include "powmesh/simcore.hpp"

using namespace powmesh;

namespace {

int g_failures = 0;

void verdict(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s — %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

struct CellRun {
    RunStats stats;
    SimConfig config;
};

/// Seed-mean stats for one (setup, devices, size, interval) cell with a fresh
/// network per seed, runs kept for per-run identity checks.
std::pair<RunStats, std::vector<CellRun>> run_cell(const std::string& setup, int devices,
                                                   double block_size, double interval_s,
                                                   const std::vector<std::uint64_t>& seeds) {
    const auto matrix = builtin_setup(setup);
    const auto bw = BandwidthDistribution::defaults();
    std::vector<CellRun> runs(seeds.size());
    parallel_for(seeds.size(), 0, [&](size_t i) {
        const auto net = generate_network(devices, kDefaultMinerRatio, matrix, bw, DegreeProfile{},
                                          seeds[i]);
        SimConfig config;
        config.block_size = block_size;
        config.regime = MiningRegime::fixed_interval(interval_s);
        config.duration_s = 6000.0;
        config.seed = seeds[i];
        runs[i].config = config;
        runs[i].stats = compute_stats(run(net, config), net, config);
    });
    std::vector<RunStats> stats;
    for (const auto& r : runs) stats.push_back(r.stats);
    return {mean_stats(stats), runs};
}

std::vector<CellRun> g_anchor_runs;

void criterion_1_anchor() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto [mean, runs] = run_cell("netherlands", 250, 500e3, 60.0, {1, 2, 3, 4, 5});
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    g_anchor_runs = runs;

    const bool stale_ok = mean.stale_rate >= 0.005 && mean.stale_rate <= 0.04;
    const bool genuine_ok = mean.genuine_blocks >= 75 && mean.genuine_blocks <= 105;
    const bool tput_ok = mean.throughput >= 25 && mean.throughput <= 36;
    const bool prop_ok = mean.prop_delay_90 >= 6 && mean.prop_delay_90 <= 40;
    const bool time_ok = elapsed < 120.0;
    char detail[256];
    std::snprintf(detail, sizeof(detail),
                  "stale %.2f%% in [0.5,4], genuine %.1f in [75,105], throughput %.2f in [25,36], "
                  "prop90 %.1f s in [6,40], runtime %.1f s < 120",
                  mean.stale_rate * 100, mean.genuine_blocks, mean.throughput, mean.prop_delay_90,
                  elapsed);
    verdict(1, "Table 2 anchor row (NL 250/18, 500 KB, 60 s, 5 seeds)",
            stale_ok && genuine_ok && tput_ok && prop_ok && time_ok, detail);
}

void criterion_2_throughput_formula() {
    bool ok = std::abs(90.5 * (500e3 / 250.0) / 6000.0 - 30.17) < 0.005 &&
              std::abs(830.0 * (100e3 / 250.0) / 6000.0 - 55.3) < 0.05 &&
              std::abs(10.4 * (10e6 / 250.0) / 6000.0 - 69.3) < 0.05;
    size_t checked = 0;
    for (const auto& r : g_anchor_runs) {
        ok = ok && r.stats.throughput == r.stats.genuine_blocks *
                                             (r.config.block_size / r.config.avg_tx_size) /
                                             r.config.duration_s;
        ++checked;
    }
    // One more size for good measure.
    const auto [mean, runs] = run_cell("netherlands", 250, 100e3, 30.0, {1, 2});
    (void)mean;
    for (const auto& r : runs) {
        ok = ok && r.stats.throughput == r.stats.genuine_blocks *
                                             (r.config.block_size / r.config.avg_tx_size) /
                                             r.config.duration_s;
        ++checked;
    }
    verdict(2, "throughput formula exactness (3 published cells + per-run identity)", ok,
            std::to_string(checked) + " runs bit-exact, printed cells within rounding");
}

void criterion_3_location_ordering() {
    const std::vector<double> intervals = {300, 60, 30};
    const std::vector<std::string> setups = {"netherlands", "europe", "world"};
    const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    // means[interval][setup]
    std::vector<std::vector<RunStats>> means(intervals.size(),
                                             std::vector<RunStats>(setups.size()));
    parallel_for(intervals.size() * setups.size(), 0, [&](size_t flat) {
        const size_t ii = flat / setups.size();
        const size_t si = flat % setups.size();
        means[ii][si] = run_cell(setups[si], 250, 500e3, intervals[ii], seeds).first;
    });

    // 12 seed-mean comparisons: {NL<=EU, EU<=World} x {delay, stale} x 3
    // intervals; the 4-of-5 allowance maps to at most 2 misses.
    int held = 0, total = 0;
    const double eps = 1e-9;
    std::string misses;
    for (size_t ii = 0; ii < intervals.size(); ++ii) {
        const auto check = [&](double a, double b, const std::string& what) {
            ++total;
            if (a <= b + eps) {
                ++held;
            } else {
                misses += " " + what + "@" + fmt_fixed(intervals[ii], 0) + "s";
            }
        };
        check(means[ii][0].prop_delay_90, means[ii][1].prop_delay_90, "delay NL<=EU");
        check(means[ii][1].prop_delay_90, means[ii][2].prop_delay_90, "delay EU<=World");
        check(means[ii][0].stale_rate, means[ii][1].stale_rate, "stale NL<=EU");
        check(means[ii][1].stale_rate, means[ii][2].stale_rate, "stale EU<=World");
    }
    const bool ok = held * 5 >= total * 4;  // >= 4 of 5
    verdict(3, "location ordering (Table 3 trend, NL <= EU <= World)", ok,
            std::to_string(held) + "/" + std::to_string(total) + " seed-mean comparisons hold" +
                (misses.empty() ? "" : "; misses:" + misses));
}

void criterion_4_monotonicity() {
    const std::vector<double> sizes = {100e3, 500e3, 1e6};
    const std::vector<double> intervals = {600, 60, 10, 5};  // shrinking
    const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::vector<std::vector<double>> stale(sizes.size(), std::vector<double>(intervals.size()));
    parallel_for(sizes.size() * intervals.size(), 0, [&](size_t flat) {
        const size_t si = flat / intervals.size();
        const size_t ii = flat % intervals.size();
        stale[si][ii] =
            run_cell("netherlands", 250, sizes[si], intervals[ii], seeds).first.stale_rate;
    });
    bool ok = true;
    std::string detail;
    for (size_t si = 0; si < sizes.size(); ++si) {
        detail += (si ? " | " : "") + fmt_fixed(sizes[si] / 1e3, 0) + "KB:";
        for (size_t ii = 0; ii < intervals.size(); ++ii) {
            detail += " " + fmt_fixed(stale[si][ii] * 100, 2) + "%";
            if (ii > 0 && stale[si][ii] + 1e-12 < stale[si][ii - 1]) ok = false;
        }
    }
    verdict(4, "stale rate non-decreasing as the interval shrinks (Table 2 trend)", ok, detail);
}

void criterion_5_interval_ladder() {
    const int devices[7] = {83, 166, 250, 500, 750, 1000, 1250};
    const int miners[7] = {6, 12, 18, 36, 54, 72, 90};
    const double expected[7] = {180, 90, 60, 30, 20, 15, 12};
    const auto nl = builtin_setup(SetupName::Netherlands);
    const auto bw = BandwidthDistribution::defaults();
    bool ok = true;
    std::string detail = "intervals";
    for (int i = 0; i < 7; ++i) {
        const auto net = generate_network(devices[i], kDefaultMinerRatio, nl, bw, DegreeProfile{}, 1);
        if (static_cast<int>(net.miner_count()) != miners[i]) ok = false;
        SimConfig config;
        config.regime = MiningRegime::fixed_difficulty(1.0, 6, 180.0);
        const double interval = effective_interval(config, net);
        if (interval != expected[i]) ok = false;  // zero tolerance
        detail += " " + fmt_fixed(interval, 0);
    }
    verdict(5, "fixed-difficulty interval ladder {180,90,60,30,20,15,12} s, exact", ok, detail);
}

void criterion_6_security_ordering() {
    const auto all = table7_scenarios();
    std::vector<Scenario> picked;
    for (const auto& sc : all)
        if (sc.block_size == 100e3 && (sc.label == "I" || sc.label == "IV" || sc.label == "VI"))
            picked.push_back(sc);
    ScenarioRunOptions opts;  // strict bounds validation, as the contract requires
    const auto results = run_scenarios(picked, {1, 2, 3, 4, 5}, opts);
    const double work_1 = results[0].total_work;
    const double work_4 = results[1].total_work;
    const double work_6 = results[2].total_work;
    const bool ok = work_1 > work_4 && work_1 >= 0.8 * work_6;
    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "work I=%.1fa IV=%.1fa VI=%.1fa; I > IV and I >= 0.8*VI (%.1f)", work_1, work_4,
                  work_6, 0.8 * work_6);
    verdict(6, "security ordering (Table 7 trend, 100 KB tier)", ok, detail);
}

bool property_single_miner() {
    const auto nl = builtin_setup(SetupName::Netherlands);
    const auto bw = BandwidthDistribution::defaults();
    std::vector<char> ok(20, 0);
    parallel_for(20, 0, [&](size_t i) {
        const auto net = generate_network(12, 0.084, nl, bw, DegreeProfile{}, i + 1);
        SimConfig config;
        config.block_size = 100e3;
        config.regime = MiningRegime::fixed_interval(30.0);
        config.duration_s = 3000.0;
        config.seed = i + 1;
        ok[i] = net.miner_count() == 1 && finalize_chain(run(net, config)).stale.empty();
    });
    for (const char c : ok)
        if (!c) return false;
    return true;
}

bool property_poisson() {
    const auto nl = builtin_setup(SetupName::Netherlands);
    const auto bw = BandwidthDistribution::defaults();
    for (const double interval : {60.0, 10.0}) {
        const double lambda = 6000.0 / interval;
        std::vector<double> counts(20, 0);
        parallel_for(20, 0, [&](size_t i) {
            const auto net = generate_network(12, 0.25, nl, bw, DegreeProfile{}, 100 + i);
            SimConfig config;
            config.block_size = 10e3;
            config.regime = MiningRegime::fixed_interval(interval);
            config.duration_s = 6000.0;
            config.seed = 100 + i;
            counts[i] = static_cast<double>(run(net, config).mined_count());
        });
        double mean = 0;
        for (const double c : counts) mean += c;
        mean /= counts.size();
        if (std::abs(mean - lambda) > 3.0 * std::sqrt(lambda)) return false;
    }
    return true;
}

bool property_finalize_oracle() {
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        Rng rng(4000 + trial);
        EventTrace trace;
        trace.device_count = 1;
        trace.blocks.push_back(Block{});
        const bool tie_times = trial % 2 == 0;
        for (int i = 1; i <= 20; ++i) {
            const auto parent = static_cast<std::int64_t>(rng.below(trace.blocks.size()));
            Block b;
            b.id = i;
            b.miner = 0;
            b.parent = parent;
            b.height = trace.blocks[static_cast<size_t>(parent)].height + 1;
            b.mined_at = tie_times ? static_cast<double>(b.height)
                                   : trace.blocks[static_cast<size_t>(parent)].mined_at + 0.5 +
                                         rng.u01();
            trace.blocks.push_back(b);
        }
        std::vector<std::vector<std::int64_t>> children(trace.blocks.size());
        std::set<std::int64_t> has_child;
        for (const auto& b : trace.blocks)
            if (b.id != kGenesisId) {
                children[static_cast<size_t>(b.parent)].push_back(b.id);
                has_child.insert(b.parent);
            }
        std::vector<std::int64_t> best_path, path{kGenesisId};
        const std::function<void(std::int64_t)> dfs = [&](std::int64_t node) {
            if (!has_child.count(node)) {
                if (best_path.empty() || path.size() > best_path.size()) {
                    best_path = path;
                } else if (path.size() == best_path.size()) {
                    const auto& cand = trace.blocks[static_cast<size_t>(path.back())];
                    const auto& best = trace.blocks[static_cast<size_t>(best_path.back())];
                    if (cand.mined_at < best.mined_at ||
                        (cand.mined_at == best.mined_at && cand.id < best.id))
                        best_path = path;
                }
                return;
            }
            for (const auto child : children[static_cast<size_t>(node)]) {
                path.push_back(child);
                dfs(child);
                path.pop_back();
            }
        };
        dfs(kGenesisId);
        if (finalize_chain(trace).canonical != best_path) return false;
    }
    return true;
}

bool property_transfer_oracle() {
    Rng rng(77);
    for (int i = 0; i < 1000; ++i) {
        const double size = rng.uniform(1e3, 1e7);
        const double latency = rng.uniform(0, 400);
        const double up = rng.uniform(0.02e6, 20e6);
        const double down = rng.uniform(0.1e6, 100e6);
        const int k = static_cast<int>(rng.uniform_int(1, 16));
        const double expected = latency / 1000.0 + size * 8.0 / std::min(up / k, down);
        const double got = transfer_time(size, latency, up, down, k);
        if (std::abs(got - expected) > 1e-12 * std::max(1.0, expected)) return false;
    }
    return true;
}

bool property_trace_determinism() {
    const auto nl = builtin_setup(SetupName::Netherlands);
    const auto net = generate_network(80, kDefaultMinerRatio, nl, BandwidthDistribution::defaults(),
                                      DegreeProfile{}, 5);
    SimConfig config;
    config.block_size = 500e3;
    config.regime = MiningRegime::fixed_interval(30.0);
    config.duration_s = 2000.0;
    config.seed = 5;
    return serialize_trace(run(net, config), config) == serialize_trace(run(net, config), config);
}

void criterion_7_properties() {
    const bool single = property_single_miner();
    const bool poisson = property_poisson();
    const bool finalize = property_finalize_oracle();
    const bool transfer = property_transfer_oracle();
    const bool determinism = property_trace_determinism();
    std::string detail = std::string("single-miner ") + (single ? "ok" : "FAIL") + ", poisson " +
                         (poisson ? "ok" : "FAIL") + ", finalize-oracle " +
                         (finalize ? "ok" : "FAIL") + ", transfer-oracle " +
                         (transfer ? "ok" : "FAIL") + ", determinism " +
                         (determinism ? "ok" : "FAIL");
    verdict(7, "property suite", single && poisson && finalize && transfer && determinism, detail);
}

void criterion_8_planner() {
    const std::vector<double> sizes = {100e3, 500e3, 1e6};
    const std::vector<double> intervals = {600, 300, 60, 30, 10, 5};
    const auto nl = builtin_setup(SetupName::Netherlands);

    const auto network = generate_network(250, kDefaultMinerRatio, nl,
                                          BandwidthDistribution::defaults(), DegreeProfile{}, 1);
    const auto feasible =
        search_parameters(network, sizes, intervals, {1, 2, 3, 4, 5}, MetricBounds{});
    const bool pos_ok = feasible.feasible && feasible.plan.report.overall_pass &&
                        feasible.plan.predicted.throughput >= 25.0;

    // Uniform 0.1 Mbps population (no fast tier, hence no relay overlay).
    // Twenty seeds: the borderline 100 KB / 10 m cell produces only ~10
    // blocks per run, so the stale-rate estimate needs the extra runs.
    GenOptions starved_opts;
    starved_opts.miner_tier = false;
    const auto starved_net =
        generate_network(250, kDefaultMinerRatio, nl, BandwidthDistribution::constant(0.1, 0.1),
                         DegreeProfile{}, 1, starved_opts);
    std::vector<std::uint64_t> starved_seeds;
    for (std::uint64_t s = 1; s <= 20; ++s) starved_seeds.push_back(s);
    const auto starved = search_parameters(starved_net, sizes, intervals, starved_seeds,
                                           MetricBounds{});
    const bool neg_ok = !starved.feasible && starved.grid.size() == sizes.size() * intervals.size() &&
                        !starved.diagnostic.empty();

    char detail[256];
    std::snprintf(detail, sizeof(detail),
                  "feasible plan %s/%.0fs throughput %.2f (>=25, pass=%s); starved: NoFeasiblePair=%s "
                  "with %zu-cell grid",
                  fmt_fixed(feasible.plan.block_size / 1e3, 0).c_str(), feasible.plan.interval_s,
                  feasible.plan.predicted.throughput,
                  feasible.plan.report.overall_pass ? "yes" : "no", !starved.feasible ? "yes" : "no",
                  starved.grid.size());
    verdict(8, "planner feasibility and the bandwidth-starved diagnostic", pos_ok && neg_ok, detail);
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_1_anchor();
    criterion_2_throughput_formula();
    criterion_3_location_ordering();
    criterion_4_monotonicity();
    criterion_5_interval_ladder();
    criterion_6_security_ordering();
    criterion_7_properties();
    criterion_8_planner();
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d/8 criteria passed in %.1f s\n", 8 - g_failures, elapsed);
    return g_failures == 0 ? 0 : 1;
}
