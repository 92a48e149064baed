#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "powmesh/errors.hpp"
#include "powmesh/rng.hpp"
#include "powmesh/textio.hpp"

namespace powmesh {

enum class Role { Miner, Regular };
enum class ArchRole { FullPeer, LightPeer, Outsider };

inline std::string to_string(Role r) { return r == Role::Miner ? "miner" : "regular"; }
inline std::string to_string(ArchRole r) {
    switch (r) {
        case ArchRole::FullPeer: return "full";
        case ArchRole::LightPeer: return "light";
        default: return "outsider";
    }
}

inline Role role_from_string(const std::string& s) {
    if (s == "miner") return Role::Miner;
    if (s == "regular") return Role::Regular;
    throw ParseError("unknown role '" + s + "'");
}

inline ArchRole arch_role_from_string(const std::string& s) {
    if (s == "full") return ArchRole::FullPeer;
    if (s == "light") return ArchRole::LightPeer;
    if (s == "outsider") return ArchRole::Outsider;
    throw ParseError("unknown arch role '" + s + "'");
}

/// One simulated device. Bandwidth is in bits per second; mining power is a
/// dimensionless weight (zero for regular devices).
struct DeviceSpec {
    std::int64_t id = 0;
    Role role = Role::Regular;
    ArchRole arch_role = ArchRole::LightPeer;
    std::string city;
    double download_bw = 0;  // bps
    double upload_bw = 0;    // bps
    double mining_power = 0;
};

// ---------------------------------------------------------------------------
// Latency matrices

struct LatencyMatrix {
    std::vector<std::string> cities;
    std::vector<double> latency_ms;  // row-major, cities.size() squared
    std::string name;

    size_t size() const { return cities.size(); }

    double at(size_t i, size_t j) const { return latency_ms[i * size() + j]; }

    std::optional<size_t> city_index(const std::string& city) const {
        for (size_t i = 0; i < cities.size(); ++i)
            if (cities[i] == city) return i;
        return std::nullopt;
    }

    double between(const std::string& a, const std::string& b) const {
        const auto ia = city_index(a), ib = city_index(b);
        if (!ia) throw ValidationError("city '" + a + "' not present in latency matrix");
        if (!ib) throw ValidationError("city '" + b + "' not present in latency matrix");
        return at(*ia, *ib);
    }

    /// Mean of the off-diagonal entries.
    double mean_pairwise() const {
        const size_t n = size();
        if (n < 2) return 0;
        double sum = 0;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                if (i != j) sum += at(i, j);
        return sum / static_cast<double>(n * (n - 1));
    }

    void validate() const {
        const size_t n = cities.size();
        if (latency_ms.size() != n * n)
            throw ValidationError("latency matrix is not square: " + std::to_string(n) +
                                  " cities, " + std::to_string(latency_ms.size()) + " entries");
        for (size_t i = 0; i < n; ++i) {
            if (at(i, i) != 0.0)
                throw ValidationError("nonzero diagonal at (" + cities[i] + "," + cities[i] + ")");
            for (size_t j = 0; j < n; ++j) {
                if (at(i, j) < 0)
                    throw ValidationError("negative latency at (" + cities[i] + "," + cities[j] + ")");
                if (std::abs(at(i, j) - at(j, i)) > 1e-9)
                    throw ValidationError("asymmetric latency at (" + cities[i] + "," + cities[j] +
                                          "): " + fmt_g(at(i, j)) + " vs " + fmt_g(at(j, i)));
            }
        }
    }
};

inline LatencyMatrix parse_latency_matrix(const std::string& text, const std::string& origin) {
    const auto lines = content_lines(text);
    if (lines.empty()) throw ParseError("empty latency matrix: " + origin);
    const std::string& head = lines[0];
    if (head.rfind("cities:", 0) != 0)
        throw ParseError(origin + ": first line must be 'cities: A, B, ...'");
    LatencyMatrix m;
    m.name = origin;
    for (auto& city : split(head.substr(7), ','))
        if (!city.empty()) m.cities.push_back(city);
    const size_t n = m.cities.size();
    if (n == 0) throw ParseError(origin + ": no cities listed");
    if (lines.size() != 1 + n)
        throw ParseError(origin + ": expected " + std::to_string(n) + " matrix rows, got " +
                         std::to_string(lines.size() - 1));
    for (size_t i = 0; i < n; ++i) {
        const auto toks = split_ws(lines[1 + i]);
        if (toks.size() != n)
            throw ParseError(origin + ": row " + std::to_string(i) + " has " +
                             std::to_string(toks.size()) + " entries, expected " + std::to_string(n));
        for (const auto& tok : toks) m.latency_ms.push_back(parse_double(tok, origin + " entry"));
    }
    m.validate();
    return m;
}

inline LatencyMatrix load_latency_matrix(const std::string& path) {
    return parse_latency_matrix(read_file(path), path);
}

inline std::string serialize_latency_matrix(const LatencyMatrix& m) {
    std::string out = "cities: ";
    for (size_t i = 0; i < m.cities.size(); ++i) {
        if (i) out += ", ";
        out += m.cities[i];
    }
    out += '\n';
    for (size_t i = 0; i < m.size(); ++i) {
        for (size_t j = 0; j < m.size(); ++j) {
            if (j) out += ' ';
            out += fmt_fixed(m.at(i, j), 3);
        }
        out += '\n';
    }
    return out;
}

enum class SetupName { Netherlands, Europe, World };

inline std::string to_string(SetupName s) {
    switch (s) {
        case SetupName::Netherlands: return "netherlands";
        case SetupName::Europe: return "europe";
        default: return "world";
    }
}

inline std::optional<SetupName> setup_from_string(const std::string& s) {
    const std::string l = lower(s);
    if (l == "netherlands" || l == "nl") return SetupName::Netherlands;
    if (l == "europe" || l == "eu") return SetupName::Europe;
    if (l == "world") return SetupName::World;
    return std::nullopt;
}

inline std::string data_dir() {
    if (const char* env = std::getenv("POWMESH_DATA_DIR")) return env;
#ifdef POWMESH_DEFAULT_DATA_DIR
    return POWMESH_DEFAULT_DATA_DIR;
#else
    return "data";
#endif
}

/// Loads one of the shipped location setups. The matrices are data files so
/// deployments can substitute their own measurements (POWMESH_DATA_DIR).
inline LatencyMatrix builtin_setup(SetupName name) {
    const std::string base = data_dir();
    const std::string fname = to_string(name) + ".txt";
    for (const std::string& candidate : {base + "/latency/" + fname, base + "/" + fname}) {
        std::ifstream probe(candidate);
        if (probe) {
            auto m = load_latency_matrix(candidate);
            m.name = to_string(name);
            return m;
        }
    }
    throw ParseError("builtin latency matrix '" + fname + "' not found under " + base);
}

inline LatencyMatrix builtin_setup(const std::string& name) {
    const auto setup = setup_from_string(name);
    if (!setup) throw ValidationError("unknown location setup '" + name + "'");
    return builtin_setup(*setup);
}

// ---------------------------------------------------------------------------
// Bandwidth distributions

/// One direction of the empirical bandwidth model: either an explicit sample
/// list or a log-uniform distribution over a sub-range of [min, max] chosen
/// so the analytic mean equals `mean`. All rates in bits per second.
struct BandwidthDirection {
    double min_bps = 0, max_bps = 0, mean_bps = 0;
    double lo_eff = 0, hi_eff = 0;  // solved log-uniform support
    std::vector<double> samples;

    static BandwidthDirection parametric(double min_mbps, double max_mbps, double mean_mbps) {
        BandwidthDirection d;
        d.min_bps = min_mbps * 1e6;
        d.max_bps = max_mbps * 1e6;
        d.mean_bps = mean_mbps * 1e6;
        if (d.min_bps <= 0 || d.max_bps < d.min_bps)
            throw ValidationError("bandwidth range must satisfy 0 < min <= max");
        if (d.mean_bps < d.min_bps || d.mean_bps > d.max_bps)
            throw ValidationError("bandwidth mean must lie within [min, max]");
        d.solve_range();
        return d;
    }

    static BandwidthDirection from_samples(std::vector<double> samples_bps) {
        if (samples_bps.empty()) throw ValidationError("empty bandwidth sample list");
        BandwidthDirection d;
        d.samples = std::move(samples_bps);
        double lo = d.samples[0], hi = d.samples[0], sum = 0;
        for (double v : d.samples) {
            if (v <= 0) throw ValidationError("bandwidth samples must be positive");
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        d.min_bps = lo;
        d.max_bps = hi;
        d.mean_bps = sum / static_cast<double>(d.samples.size());
        return d;
    }

    double sample(Rng& rng) const {
        if (!samples.empty()) return samples[rng.below(samples.size())];
        if (lo_eff == hi_eff) return lo_eff;
        return lo_eff * std::exp(rng.u01() * std::log(hi_eff / lo_eff));
    }

private:
    static double loguni_mean(double a, double b) {
        return (b - a) / std::log(b / a);
    }

    // The full-range log-uniform mean rarely matches the reported average, so
    // the support is narrowed from one end until it does (bisection).
    void solve_range() {
        lo_eff = min_bps;
        hi_eff = max_bps;
        if (min_bps == max_bps) return;
        const double full = loguni_mean(min_bps, max_bps);
        if (std::abs(full - mean_bps) < 1e-9 * mean_bps) return;
        if (mean_bps < full) {
            double lo = min_bps * (1 + 1e-12), hi = max_bps;
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo + hi);
                (loguni_mean(min_bps, mid) < mean_bps ? lo : hi) = mid;
            }
            hi_eff = 0.5 * (lo + hi);
        } else {
            double lo = min_bps, hi = max_bps * (1 - 1e-12);
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo + hi);
                (loguni_mean(mid, max_bps) < mean_bps ? lo : hi) = mid;
            }
            lo_eff = 0.5 * (lo + hi);
        }
    }
};

struct BandwidthDistribution {
    BandwidthDirection down;
    BandwidthDirection up;

    /// Raspberry-Pi-class population: download 0.1..100 Mbps averaging 5,
    /// upload 0.02..20 Mbps averaging 1.
    static BandwidthDistribution defaults() {
        BandwidthDistribution d;
        d.down = BandwidthDirection::parametric(0.1, 100.0, 5.0);
        d.up = BandwidthDirection::parametric(0.02, 20.0, 1.0);
        return d;
    }

    static BandwidthDistribution constant(double down_mbps, double up_mbps) {
        BandwidthDistribution d;
        d.down = BandwidthDirection::parametric(down_mbps, down_mbps, down_mbps);
        d.up = BandwidthDirection::parametric(up_mbps, up_mbps, up_mbps);
        return d;
    }
};

inline BandwidthDistribution parse_bandwidth_distribution(const std::string& text,
                                                          const std::string& origin) {
    const auto lines = content_lines(text);
    std::optional<BandwidthDirection> down, up;
    for (const auto& line : lines) {
        if (line.rfind("powmesh-bandwidth", 0) == 0) continue;
        const auto toks = split_ws(line);
        if (toks.size() < 3) throw ParseError(origin + ": short line '" + line + "'");
        BandwidthDirection dir;
        if (toks[1] == "parametric") {
            if (toks.size() != 5)
                throw ParseError(origin + ": parametric needs min max mean (Mbps)");
            dir = BandwidthDirection::parametric(parse_double(toks[2], "min_mbps"),
                                                 parse_double(toks[3], "max_mbps"),
                                                 parse_double(toks[4], "mean_mbps"));
        } else if (toks[1] == "samples") {
            std::vector<double> samples;
            for (size_t i = 2; i < toks.size(); ++i)
                samples.push_back(parse_double(toks[i], "sample_mbps") * 1e6);
            dir = BandwidthDirection::from_samples(std::move(samples));
        } else {
            throw ParseError(origin + ": expected 'parametric' or 'samples', got '" + toks[1] + "'");
        }
        if (toks[0] == "down")
            down = dir;
        else if (toks[0] == "up")
            up = dir;
        else
            throw ParseError(origin + ": expected 'down' or 'up', got '" + toks[0] + "'");
    }
    if (!down || !up) throw ParseError(origin + ": needs both 'down' and 'up' lines");
    BandwidthDistribution d;
    d.down = *down;
    d.up = *up;
    return d;
}

inline BandwidthDistribution load_bandwidth_distribution(const std::string& path) {
    return parse_bandwidth_distribution(read_file(path), path);
}

// ---------------------------------------------------------------------------
// Topology

/// Connection-count profile. Miners additionally keep a low-degree circulant
/// backbone among themselves (block relay between mining devices is the
/// latency-critical path); backbone edges count toward the miner degree
/// budget.
struct DegreeProfile {
    int miner_min = 8;
    int miner_max = 16;
    int regular_min = 4;
    int regular_max = 8;
    int miner_backbone_degree = 6;  // circulant strides 1..degree/2; 0 disables

    void validate() const {
        if (miner_min < 1 || miner_max < miner_min || regular_min < 1 || regular_max < regular_min)
            throw ValidationError("degree profile bounds must satisfy 1 <= min <= max");
    }
};

struct GenOptions {
    double intra_city_floor_ms = 1.0;
    // Mining devices are provisioned as the resource-rich tier: wired-class
    // bandwidth instead of a draw, plus the miner relay overlay (see
    // DegreeProfile::miner_backbone_degree). Disabling the tier models a
    // uniform population with no relay hubs.
    bool miner_tier = true;
    double miner_down_mbps = 100.0;
    double miner_up_mbps = 20.0;
};

struct Link {
    std::int64_t a = 0, b = 0;
    double latency_ms = 0;
};

struct Network {
    std::vector<DeviceSpec> devices;
    std::vector<Link> links;
    std::string setup_name;

    size_t miner_count() const {
        size_t n = 0;
        for (const auto& d : devices) n += d.role == Role::Miner;
        return n;
    }

    double total_mining_power() const {
        double p = 0;
        for (const auto& d : devices) p += d.mining_power;
        return p;
    }

    std::map<std::int64_t, size_t> index_by_id() const {
        std::map<std::int64_t, size_t> idx;
        for (size_t i = 0; i < devices.size(); ++i) idx[devices[i].id] = i;
        return idx;
    }
};

inline void validate_network(const Network& net) {
    const size_t n = net.devices.size();
    if (n == 0) throw ValidationError("network has no devices");
    const auto idx = net.index_by_id();
    if (idx.size() != n) throw ValidationError("duplicate device ids in network");
    for (const auto& d : net.devices) {
        if (d.arch_role == ArchRole::Outsider)
            throw ValidationError("device " + std::to_string(d.id) +
                                  " has outsider role; outsiders are not network peers");
        if (d.download_bw <= 0 || d.upload_bw <= 0)
            throw ValidationError("device " + std::to_string(d.id) + " has non-positive bandwidth");
        if ((d.role == Role::Miner) != (d.mining_power > 0))
            throw ValidationError("device " + std::to_string(d.id) +
                                  ": miner role must coincide with positive mining power");
    }
    std::set<std::pair<std::int64_t, std::int64_t>> seen;
    std::vector<size_t> parent(n);
    std::iota(parent.begin(), parent.end(), size_t{0});
    auto find = [&](size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& link : net.links) {
        if (link.a == link.b)
            throw ValidationError("self-link on device " + std::to_string(link.a));
        if (!idx.count(link.a) || !idx.count(link.b))
            throw ValidationError("link references unknown device");
        const auto key = std::minmax(link.a, link.b);
        if (!seen.insert(key).second)
            throw ValidationError("duplicate link " + std::to_string(link.a) + "-" +
                                  std::to_string(link.b));
        if (link.latency_ms < 0) throw ValidationError("negative link latency");
        parent[find(idx.at(link.a))] = find(idx.at(link.b));
    }
    if (n > 1) {
        const size_t root = find(0);
        for (size_t i = 1; i < n; ++i)
            if (find(i) != root)
                throw ValidationError("network is not connected (device " +
                                      std::to_string(net.devices[i].id) + " unreachable)");
    }
}

/// Builds the device population (roles, cities, bandwidth). Device ids are
/// 0..n-1 with miners first; cities are assigned round-robin per role so city
/// populations stay balanced within one device.
inline std::vector<DeviceSpec> make_population(int n_devices, double miner_ratio,
                                               const LatencyMatrix& setup,
                                               const BandwidthDistribution& bw,
                                               std::uint64_t seed, const GenOptions& opts = {}) {
    if (n_devices < 2) throw ValidationError("need at least 2 devices");
    if (!(miner_ratio > 0 && miner_ratio < 1))
        throw ValidationError("miner ratio must be in (0, 1)");
    const int miners = static_cast<int>(std::llround(n_devices * miner_ratio));
    if (miners < 1) throw ValidationError("miner ratio rounds to zero miners");
    if (miners >= n_devices) throw ValidationError("miner ratio leaves no regular devices");
    const size_t n_cities = setup.size();
    if (n_cities == 0) throw ValidationError("latency matrix has no cities");

    Rng rng = rng_stream(seed, "bandwidth");
    std::vector<DeviceSpec> devices(n_devices);
    for (int i = 0; i < n_devices; ++i) {
        DeviceSpec& d = devices[i];
        d.id = i;
        const bool miner = i < miners;
        d.role = miner ? Role::Miner : Role::Regular;
        d.arch_role = miner ? ArchRole::FullPeer : ArchRole::LightPeer;
        d.mining_power = miner ? 1.0 : 0.0;
        const int role_index = miner ? i : i - miners;
        d.city = setup.cities[role_index % n_cities];
        if (miner && opts.miner_tier) {
            d.download_bw = opts.miner_down_mbps * 1e6;
            d.upload_bw = opts.miner_up_mbps * 1e6;
        } else {
            d.download_bw = bw.down.sample(rng);
            d.upload_bw = bw.up.sample(rng);
        }
    }
    return devices;
}

/// Wires point-to-point links over an existing population: miner ring first,
/// then a configuration-model pass over per-device degree draws, then
/// connectivity repair. Deterministic for a fixed seed.
inline Network wire_topology(std::vector<DeviceSpec> devices, const LatencyMatrix& setup,
                             const DegreeProfile& degrees, std::uint64_t seed,
                             const GenOptions& opts = {}) {
    degrees.validate();
    const size_t n = devices.size();
    if (n < 2) throw ValidationError("need at least 2 devices to wire a topology");
    for (const auto& d : devices)
        if (!setup.city_index(d.city))
            throw ValidationError("device " + std::to_string(d.id) + " city '" + d.city +
                                  "' missing from latency matrix");
    if (degrees.regular_min < 1 || degrees.miner_min < 1)
        throw InfeasibleTopologyError("degree profile cannot connect devices with zero links");

    Network net;
    net.setup_name = setup.name;
    net.devices = std::move(devices);

    std::vector<size_t> miners;
    for (size_t i = 0; i < n; ++i)
        if (net.devices[i].role == Role::Miner) miners.push_back(i);

    std::set<std::pair<size_t, size_t>> edges;
    auto add_edge = [&](size_t a, size_t b) {
        if (a == b) return false;
        return edges.insert(std::minmax(a, b)).second;
    };

    // Miner relay backbone; part of the miner-tier provisioning, so a uniform
    // population (tier disabled) gets no overlay.
    const size_t m = miners.size();
    if (degrees.miner_backbone_degree > 0 && opts.miner_tier && m >= 2) {
        const size_t max_stride = std::max<size_t>(1, degrees.miner_backbone_degree / 2);
        for (size_t stride = 1; stride <= max_stride && stride < m; ++stride)
            for (size_t i = 0; i < m; ++i) add_edge(miners[i], miners[(i + stride) % m]);
    }

    // The backbone is an overlay on top of the profile draw: miners keep
    // their full configuration-model degree toward the general population.
    Rng rng = rng_stream(seed, "topology");
    std::vector<int> degree_target(n);
    for (size_t i = 0; i < n; ++i) {
        const bool miner = net.devices[i].role == Role::Miner;
        const int lo = miner ? degrees.miner_min : degrees.regular_min;
        const int hi = miner ? degrees.miner_max : degrees.regular_max;
        degree_target[i] = static_cast<int>(
            std::min<std::int64_t>(rng.uniform_int(lo, hi), static_cast<std::int64_t>(n - 1)));
    }

    std::vector<size_t> stubs;
    for (size_t i = 0; i < n; ++i)
        for (int s = 0; s < degree_target[i]; ++s) stubs.push_back(i);

    // Configuration model: shuffle and pair, re-shuffling rejected stubs.
    for (int round = 0; round < 24 && stubs.size() >= 2; ++round) {
        for (size_t i = stubs.size(); i > 1; --i)
            std::swap(stubs[i - 1], stubs[rng.below(i)]);
        std::vector<size_t> leftover;
        for (size_t i = 0; i + 1 < stubs.size(); i += 2) {
            if (!add_edge(stubs[i], stubs[i + 1])) {
                leftover.push_back(stubs[i]);
                leftover.push_back(stubs[i + 1]);
            }
        }
        if (stubs.size() % 2) leftover.push_back(stubs.back());
        stubs = std::move(leftover);
    }

    // Connectivity repair: chain remaining components together.
    std::vector<size_t> parent(n);
    std::iota(parent.begin(), parent.end(), size_t{0});
    auto find = [&](size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& [a, b] : edges) parent[find(a)] = find(b);
    std::map<size_t, size_t> component_head;  // root -> lowest member
    for (size_t i = 0; i < n; ++i) component_head.emplace(find(i), i);
    if (component_head.size() > 1) {
        std::vector<size_t> heads;
        for (const auto& [root, head] : component_head) heads.push_back(head);
        std::sort(heads.begin(), heads.end());
        for (size_t i = 1; i < heads.size(); ++i) {
            if (!add_edge(heads[i - 1], heads[i]))
                throw InfeasibleTopologyError("connectivity repair failed");
            parent[find(heads[i - 1])] = find(heads[i]);
        }
    }

    net.links.reserve(edges.size());
    for (const auto& [a, b] : edges) {
        const auto& da = net.devices[a];
        const auto& db = net.devices[b];
        const double lat = da.city == db.city ? opts.intra_city_floor_ms
                                              : setup.between(da.city, db.city);
        net.links.push_back({da.id, db.id, lat});
    }
    validate_network(net);
    return net;
}

/// Full generator: population plus topology. Pure function of its arguments;
/// identical inputs (including seed) produce identical networks.
inline Network generate_network(int n_devices, double miner_ratio, const LatencyMatrix& setup,
                                const BandwidthDistribution& bw, const DegreeProfile& degrees,
                                std::uint64_t seed, const GenOptions& opts = {}) {
    auto devices = make_population(n_devices, miner_ratio, setup, bw, seed, opts);
    return wire_topology(std::move(devices), setup, degrees, seed, opts);
}

// Default miner ratio. round(n * 0.072) reproduces every published
// miners/devices pair on the 83..1250 ladder.
inline constexpr double kDefaultMinerRatio = 0.072;

// ---------------------------------------------------------------------------
// Network serialization (tab-separated; city names may contain spaces)

inline std::string serialize_network(const Network& net) {
    std::string out = "powmesh-network v1\n";
    out += "setup " + (net.setup_name.empty() ? std::string("custom") : net.setup_name) + "\n";
    out += "devices " + std::to_string(net.devices.size()) + "\n";
    for (const auto& d : net.devices) {
        out += std::to_string(d.id) + "\t" + to_string(d.role) + "\t" + to_string(d.arch_role) +
               "\t" + d.city + "\t" + fmt_fixed(d.download_bw, 3) + "\t" +
               fmt_fixed(d.upload_bw, 3) + "\t" + fmt_fixed(d.mining_power, 6) + "\n";
    }
    out += "links " + std::to_string(net.links.size()) + "\n";
    for (const auto& l : net.links)
        out += std::to_string(l.a) + "\t" + std::to_string(l.b) + "\t" +
               fmt_fixed(l.latency_ms, 6) + "\n";
    return out;
}

inline Network parse_network(const std::string& text, const std::string& origin) {
    const auto lines = content_lines(text);
    size_t pos = 0;
    auto next_line = [&]() -> const std::string& {
        if (pos >= lines.size()) throw ParseError(origin + ": truncated network file");
        return lines[pos++];
    };
    if (next_line().rfind("powmesh-network", 0) != 0)
        throw ParseError(origin + ": missing powmesh-network header");
    Network net;
    {
        const auto toks = split_ws(next_line());
        if (toks.size() != 2 || toks[0] != "setup")
            throw ParseError(origin + ": expected 'setup <name>'");
        net.setup_name = toks[1];
    }
    const auto dev_head = split_ws(next_line());
    if (dev_head.size() != 2 || dev_head[0] != "devices")
        throw ParseError(origin + ": expected 'devices <n>'");
    const auto n_devices = parse_int(dev_head[1], "device count");
    for (std::int64_t i = 0; i < n_devices; ++i) {
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
        net.devices.push_back(std::move(d));
    }
    const auto link_head = split_ws(next_line());
    if (link_head.size() != 2 || link_head[0] != "links")
        throw ParseError(origin + ": expected 'links <n>'");
    const auto n_links = parse_int(link_head[1], "link count");
    for (std::int64_t i = 0; i < n_links; ++i) {
        const auto cols = split(next_line(), '\t');
        if (cols.size() != 3) throw ParseError(origin + ": link line needs 3 fields");
        net.links.push_back({parse_int(cols[0], "link endpoint"), parse_int(cols[1], "link endpoint"),
                             parse_double(cols[2], "link latency")});
    }
    validate_network(net);
    return net;
}

inline Network load_network(const std::string& path) {
    return parse_network(read_file(path), path);
}

}  // namespace powmesh
