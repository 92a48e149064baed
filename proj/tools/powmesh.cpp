// powmesh: PoW sub-blockchain simulator for IoT-class device networks.
//
// Subcommands: simulate (one configuration over a seed list), preset (the
// published evaluation sweeps), plan (partition + parameter search), gen-net
// (network file generation), scenarios (total-work security comparison).

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "powmesh/metrics.hpp"
#include "powmesh/netmodel.hpp"
#include "powmesh/parallel.hpp"
#include "powmesh/planner.hpp"
#include "powmesh/presets.hpp"
#include "powmesh/security.hpp"
#include "powmesh/simcore.hpp"
#include "powmesh/textio.hpp"

namespace {

using namespace powmesh;

struct SimulateArgs {
    std::string network_file;
    std::string setup = "netherlands";
    int devices = 250;
    double miner_ratio = kDefaultMinerRatio;
    std::string block_size = "500KB";
    std::string interval = "60s";
    double difficulty = 0;  // >0 selects the fixed-difficulty regime
    int ref_miners = 6;
    std::string ref_interval = "3m";
    std::string duration = "100m";
    double tx_size = 250;
    std::string seeds = "1..5";
    std::string out;
    std::string trace_path;
    std::string bounds_file;
    std::string bw_file;
    int jobs = 0;
    bool plot = false;
};

MetricBounds load_bounds(const std::string& path) {
    if (path.empty()) return MetricBounds{};
    return parse_metric_bounds(read_file(path), path);
}

BandwidthDistribution load_bw(const std::string& path) {
    if (path.empty()) return BandwidthDistribution::defaults();
    return load_bandwidth_distribution(path);
}

std::string stats_csv(const std::vector<std::uint64_t>& seeds, const std::vector<RunStats>& runs,
                      const RunStats& mean) {
    std::vector<std::string> header;
    for (const auto* name : stat_field_names()) header.push_back(name);
    header.push_back("Seeds");
    std::string out = csv_join(header);
    for (size_t i = 0; i < runs.size(); ++i) {
        auto cols = stat_field_values(runs[i]);
        cols.push_back(std::to_string(seeds[i]));
        out += csv_join(cols);
    }
    if (runs.size() > 1) {
        auto cols = stat_field_values(mean);
        cols.push_back(describe_seeds(seeds));
        out += csv_join(cols);
    }
    return out;
}

void maybe_plot(bool enabled, const std::string& csv_path, const std::vector<double>& series,
                const std::string& title) {
    if (!enabled || csv_path.empty()) return;
    try {
        write_file(csv_path + ".svg", csv_polyline_svg(series, title));
    } catch (const std::exception&) {
        // Plot emission is cosmetic; never fail a run over it.
    }
}

int cmd_simulate(const SimulateArgs& args) {
    const auto seeds = parse_seed_range(args.seeds);
    const double block_size = parse_size_bytes(args.block_size);
    const double duration = parse_duration_s(args.duration);
    const auto bounds = load_bounds(args.bounds_file);

    SimConfig config;
    config.block_size = block_size;
    config.duration_s = duration;
    config.avg_tx_size = args.tx_size;
    if (args.difficulty > 0)
        config.regime = MiningRegime::fixed_difficulty(args.difficulty, args.ref_miners,
                                                       parse_duration_s(args.ref_interval));
    else
        config.regime = MiningRegime::fixed_interval(parse_duration_s(args.interval));

    std::optional<Network> fixed_network;
    std::optional<LatencyMatrix> matrix;
    std::optional<BandwidthDistribution> bw;
    if (!args.network_file.empty()) {
        fixed_network = load_network(args.network_file);
    } else {
        matrix = builtin_setup(args.setup);
        bw = load_bw(args.bw_file);
    }

    std::vector<RunStats> runs(seeds.size());
    std::vector<double> intervals(seeds.size());
    std::string first_trace;
    std::mutex trace_mutex;
    parallel_for(seeds.size(), args.jobs, [&](size_t i) {
        const Network network =
            fixed_network ? *fixed_network
                          : generate_network(args.devices, args.miner_ratio, *matrix, *bw,
                                             DegreeProfile{}, seeds[i]);
        SimConfig c = config;
        c.seed = seeds[i];
        const auto trace = run(network, c);
        runs[i] = compute_stats(trace, network, c);
        intervals[i] = effective_interval(c, network);
        if (i == 0 && !args.trace_path.empty()) {
            std::lock_guard<std::mutex> lock(trace_mutex);
            first_trace = serialize_trace(trace, c);
        }
    });

    const RunStats mean = mean_stats(runs);
    const auto report = check_bounds(mean, intervals[0], bounds);
    std::cout << "EffectiveIntervalS " << fmt_fixed(intervals[0], 2) << "\n"
              << stats_record(mean) << report_record(report);

    if (!args.out.empty()) {
        const auto csv = stats_csv(seeds, runs, mean);
        write_file(args.out, csv);
        std::vector<double> tput;
        for (const auto& r : runs) tput.push_back(r.throughput);
        maybe_plot(args.plot, args.out, tput, "ThroughputTxs per seed");
    }
    if (!args.trace_path.empty()) write_file(args.trace_path, first_trace);
    return 0;
}

int cmd_preset(const std::string& name, const std::string& seeds_text, const std::string& out_dir,
               const std::string& duration_text, double tx_size, int jobs, bool plot) {
    const auto preset = preset_from_string(name);
    if (!preset) throw ValidationError("unknown preset '" + name + "'");
    const auto seeds = parse_seed_range(seeds_text);
    const double duration = parse_duration_s(duration_text);
    std::filesystem::create_directories(out_dir);

    const auto spec = build_preset(*preset);
    const auto outcome = run_sweep(spec, seeds, duration, tx_size, jobs);

    const std::string base = out_dir + "/" + spec.name;
    write_file(base + ".csv", sweep_csv_mean(outcome));
    for (size_t si = 0; si < seeds.size(); ++si)
        write_file(base + "_seed" + std::to_string(seeds[si]) + ".csv",
                   sweep_csv_seed(outcome, si));
    std::vector<double> tput;
    for (size_t c = 0; c < spec.cells.size(); ++c)
        tput.push_back(spec.schema == SweepSpec::Schema::SecurityWork
                           ? total_work(outcome.means[c].genuine_blocks, spec.cells[c].difficulty)
                           : outcome.means[c].throughput);
    maybe_plot(plot, base + ".csv", tput,
               spec.schema == SweepSpec::Schema::SecurityWork ? "TotalPoW per row"
                                                              : "ThroughputTxs per row");
    std::cout << "wrote " << base << ".csv (" << spec.cells.size() << " rows, seeds "
              << describe_seeds(seeds) << ")\n";
    return 0;
}

int cmd_plan(const std::string& inventory_file, int size_cap, const std::string& sizes_text,
             const std::string& intervals_text, const std::string& seeds_text,
             const std::string& duration_text, const std::string& bounds_file,
             const std::string& out_file, std::uint64_t seed, int jobs) {
    const auto inv = load_inventory(inventory_file);
    const auto bounds = load_bounds(bounds_file);
    const auto seeds = parse_seed_range(seeds_text);
    const double duration = parse_duration_s(duration_text);
    std::vector<double> sizes, intervals;
    for (const auto& tok : split(sizes_text, ',')) sizes.push_back(parse_size_bytes(tok));
    for (const auto& tok : split(intervals_text, ',')) intervals.push_back(parse_duration_s(tok));

    const auto clusters = partition(inv, size_cap, seed);
    std::vector<PlanSearchResult> results;
    bool all_feasible = true;
    for (size_t c = 0; c < clusters.size(); ++c) {
        const auto network = cluster_network(inv, clusters[c], DegreeProfile{}, seed + c);
        auto result = search_parameters(network, sizes, intervals, seeds, bounds, duration, 250.0,
                                        jobs);
        if (!result.feasible) {
            all_feasible = false;
            std::cerr << "powmesh: cluster " << c << ": " << result.diagnostic << "\n";
        }
        results.push_back(std::move(result));
    }
    const auto doc = plan_document(clusters, results);
    if (out_file.empty())
        std::cout << doc;
    else
        write_file(out_file, doc);
    return all_feasible ? 0 : 3;
}

int cmd_gen_net(const std::string& setup, int devices, double miner_ratio, std::uint64_t seed,
                const std::string& bw_file, const std::string& out_file) {
    const auto matrix = builtin_setup(setup);
    const auto bw = load_bw(bw_file);
    const auto net = generate_network(devices, miner_ratio, matrix, bw, DegreeProfile{}, seed);
    write_file(out_file, serialize_network(net));
    std::cout << "wrote " << out_file << " (" << net.devices.size() << " devices, "
              << net.miner_count() << " miners, " << net.links.size() << " links)\n";
    return 0;
}

int cmd_scenarios(const std::string& suite_file, bool use_table7, const std::string& seeds_text,
                  const std::string& duration_text, const std::string& bounds_file,
                  const std::string& out_file, bool allow_violation, int jobs) {
    std::vector<Scenario> scenarios;
    if (use_table7)
        scenarios = table7_scenarios();
    else if (!suite_file.empty())
        scenarios = parse_scenarios(read_file(suite_file), suite_file);
    else
        throw ValidationError("scenarios needs --file or --table7");

    ScenarioRunOptions opts;
    opts.bounds = load_bounds(bounds_file);
    opts.allow_bounds_violation = allow_violation;
    opts.duration_s = parse_duration_s(duration_text);
    opts.jobs = jobs;
    const auto seeds = parse_seed_range(seeds_text);
    const auto results = run_scenarios(scenarios, seeds, opts);

    std::string csv = csv_join(
        {"BlockSize", "Scenario", "PoWDifficulty", "IntervalS", "GenuineBlocks", "StaleRate",
         "TotalPoW", "Seeds"});
    for (size_t i = 0; i < results.size(); ++i) {
        csv += csv_join({fmt_fixed(scenarios[i].block_size, 0), scenarios[i].label,
                         fmt_g(scenarios[i].difficulty), fmt_fixed(scenarios[i].interval_s, 0),
                         fmt_fixed(results[i].genuine_blocks, 2),
                         fmt_fixed(results[i].stale_rate * 100, 2),
                         fmt_fixed(results[i].total_work, 2), describe_seeds(seeds)});
    }
    if (out_file.empty())
        std::cout << csv;
    else
        write_file(out_file, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PoW sub-blockchain simulator for IoT device networks"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "run one configuration over a seed list");
    simulate->add_option("--network", sim.network_file,
                         "network file (fixed topology; otherwise generated per seed)");
    simulate->add_option("--setup", sim.setup, "builtin location setup (netherlands|europe|world)");
    simulate->add_option("--devices", sim.devices, "device count");
    simulate->add_option("--miner-ratio", sim.miner_ratio, "miner fraction");
    simulate->add_option("--block-size", sim.block_size, "block size, e.g. 500KB (decimal units)");
    simulate->add_option("--interval", sim.interval, "target block interval, e.g. 60s or 10m");
    simulate->add_option("--difficulty", sim.difficulty,
                         "fixed-difficulty regime: difficulty in alpha units");
    simulate->add_option("--ref-miners", sim.ref_miners, "fixed-difficulty reference miner count");
    simulate->add_option("--ref-interval", sim.ref_interval,
                         "fixed-difficulty reference interval");
    simulate->add_option("--duration", sim.duration, "simulated time (default 100m)");
    simulate->add_option("--tx-size", sim.tx_size, "average transaction size in bytes");
    simulate->add_option("--seeds", sim.seeds, "seed list, e.g. 1..5 or 3 or 1,4,9");
    simulate->add_option("--out", sim.out, "CSV output path");
    simulate->add_option("--trace", sim.trace_path, "event trace output path (first seed)");
    simulate->add_option("--bounds-file", sim.bounds_file, "metric bounds override file");
    simulate->add_option("--bw-file", sim.bw_file, "bandwidth distribution file");
    simulate->add_option("--jobs", sim.jobs, "worker pool size (0 = logical CPUs)");
    simulate->add_flag("--plot", sim.plot, "emit a static SVG next to the CSV");

    std::string preset_name, preset_seeds = "1..5", preset_out = ".", preset_duration = "100m";
    double preset_tx = 250;
    int preset_jobs = 0;
    bool preset_plot = false;
    auto* preset = app.add_subcommand("preset", "run a published evaluation sweep");
    preset->add_option("name", preset_name,
                       "eval1-block-grid | eval2-locations | eval3a-fixed-difficulty | "
                       "eval3b-fixed-interval | security-table7")
        ->required();
    preset->add_option("--seeds", preset_seeds, "seed list");
    preset->add_option("--out", preset_out, "output directory");
    preset->add_option("--duration", preset_duration, "simulated time per run");
    preset->add_option("--tx-size", preset_tx, "average transaction size in bytes");
    preset->add_option("--jobs", preset_jobs, "worker pool size");
    preset->add_flag("--plot", preset_plot, "emit a static SVG per CSV");

    std::string plan_inventory, plan_sizes = "100KB,500KB,1MB",
                plan_intervals = "10m,5m,1m,30s,10s,5s", plan_seeds = "1..5",
                plan_duration = "100m", plan_bounds, plan_out;
    int plan_cap = 250, plan_jobs = 0;
    std::uint64_t plan_seed = 1;
    auto* plan = app.add_subcommand("plan", "partition an inventory and search parameters");
    plan->add_option("--inventory", plan_inventory, "inventory file")->required();
    plan->add_option("--size-cap", plan_cap, "max devices per sub-blockchain");
    plan->add_option("--sizes", plan_sizes, "candidate block sizes (comma separated)");
    plan->add_option("--intervals", plan_intervals, "candidate intervals (comma separated)");
    plan->add_option("--seeds", plan_seeds, "seed list per candidate");
    plan->add_option("--duration", plan_duration, "simulated time per run");
    plan->add_option("--bounds-file", plan_bounds, "metric bounds override file");
    plan->add_option("--out", plan_out, "plan document path (stdout when omitted)");
    plan->add_option("--seed", plan_seed, "partition/topology seed");
    plan->add_option("--jobs", plan_jobs, "worker pool size");

    std::string gen_setup = "netherlands", gen_bw, gen_out;
    int gen_devices = 250;
    double gen_ratio = kDefaultMinerRatio;
    std::uint64_t gen_seed = 1;
    auto* gen = app.add_subcommand("gen-net", "generate and save a network file");
    gen->add_option("--setup", gen_setup, "builtin location setup");
    gen->add_option("--devices", gen_devices, "device count");
    gen->add_option("--miner-ratio", gen_ratio, "miner fraction");
    gen->add_option("--seed", gen_seed, "generation seed");
    gen->add_option("--bw-file", gen_bw, "bandwidth distribution file");
    gen->add_option("--out", gen_out, "output path")->required();

    std::string sc_file, sc_seeds = "1..5", sc_duration = "100m", sc_bounds, sc_out;
    bool sc_table7 = false, sc_allow = false;
    int sc_jobs = 0;
    auto* scen = app.add_subcommand("scenarios", "total-work security comparison");
    scen->add_option("--file", sc_file, "scenario suite file");
    scen->add_flag("--table7", sc_table7, "use the published six-scenario suite");
    scen->add_option("--seeds", sc_seeds, "seed list");
    scen->add_option("--duration", sc_duration, "simulated time per run");
    scen->add_option("--bounds-file", sc_bounds, "metric bounds override file");
    scen->add_option("--out", sc_out, "CSV output path (stdout when omitted)");
    scen->add_flag("--allow-bounds-violation", sc_allow,
                   "run scenarios whose configuration fails the metric bounds");
    scen->add_option("--jobs", sc_jobs, "worker pool size");

    try {
        app.parse(argc, argv);
        if (*simulate) return cmd_simulate(sim);
        if (*preset)
            return cmd_preset(preset_name, preset_seeds, preset_out, preset_duration, preset_tx,
                              preset_jobs, preset_plot);
        if (*plan)
            return cmd_plan(plan_inventory, plan_cap, plan_sizes, plan_intervals, plan_seeds,
                            plan_duration, plan_bounds, plan_out, plan_seed, plan_jobs);
        if (*gen)
            return cmd_gen_net(gen_setup, gen_devices, gen_ratio, gen_seed, gen_bw, gen_out);
        if (*scen)
            return cmd_scenarios(sc_file, sc_table7, sc_seeds, sc_duration, sc_bounds, sc_out,
                                 sc_allow, sc_jobs);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "powmesh: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "powmesh: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
