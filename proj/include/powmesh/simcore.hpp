#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "powmesh/errors.hpp"
#include "powmesh/netmodel.hpp"
#include "powmesh/rng.hpp"
#include "powmesh/textio.hpp"

namespace powmesh {

// ---------------------------------------------------------------------------
// Configuration

struct MiningRegime {
    enum class Kind { FixedInterval, FixedDifficulty };
    Kind kind = Kind::FixedInterval;
    double target_interval_s = 60.0;  // FixedInterval
    double difficulty = 1.0;          // FixedDifficulty: bookkeeping units (alpha)
    int ref_miners = 6;               // FixedDifficulty: reference point
    double ref_interval_s = 180.0;

    static MiningRegime fixed_interval(double seconds) {
        MiningRegime r;
        r.kind = Kind::FixedInterval;
        r.target_interval_s = seconds;
        return r;
    }

    static MiningRegime fixed_difficulty(double difficulty, int ref_miners, double ref_interval_s) {
        MiningRegime r;
        r.kind = Kind::FixedDifficulty;
        r.difficulty = difficulty;
        r.ref_miners = ref_miners;
        r.ref_interval_s = ref_interval_s;
        return r;
    }
};

struct SimConfig {
    double block_size = 500e3;  // bytes, decimal units (1 KB = 1e3 B)
    MiningRegime regime = MiningRegime::fixed_interval(60.0);
    double duration_s = 6000.0;
    double avg_tx_size = 250.0;  // bytes
    std::uint64_t seed = 1;

    void validate() const {
        if (block_size <= 0) throw ValidationError("block_size must be positive");
        if (duration_s <= 0) throw ValidationError("duration must be positive");
        if (avg_tx_size <= 0) throw ValidationError("avg_tx_size must be positive");
        if (regime.kind == MiningRegime::Kind::FixedInterval && regime.target_interval_s <= 0)
            throw ValidationError("target interval must be positive");
        if (regime.kind == MiningRegime::Kind::FixedDifficulty &&
            (regime.ref_interval_s <= 0 || regime.ref_miners < 1 || regime.difficulty <= 0))
            throw ValidationError("fixed-difficulty regime needs positive reference values");
    }
};

/// Expected network-wide block interval under a config. With the difficulty
/// held fixed, the interval scales inversely with the mining power present:
/// ref_interval * total_ref_power / total_current_power (unit power per
/// reference miner).
inline double effective_interval(const SimConfig& config, const Network& network) {
    const double power = network.total_mining_power();
    if (power <= 0) throw NoMinersError();
    if (config.regime.kind == MiningRegime::Kind::FixedInterval)
        return config.regime.target_interval_s;
    return config.regime.ref_interval_s * (static_cast<double>(config.regime.ref_miners) / power);
}

/// Point-to-point delivery time for a full block: propagation latency plus
/// serialization at the bottleneck rate. The sender's uplink is split evenly
/// across its concurrent outgoing transfers; the receiver's downlink is not.
inline double transfer_time(double size_bytes, double link_latency_ms, double sender_up_bps,
                            double receiver_down_bps, int concurrent_out) {
    if (sender_up_bps <= 0 || receiver_down_bps <= 0)
        throw ValidationError("transfer rates must be positive");
    if (concurrent_out < 1) throw ValidationError("concurrent_out must be >= 1");
    const double rate = std::min(sender_up_bps / concurrent_out, receiver_down_bps);
    return link_latency_ms / 1000.0 + size_bytes * 8.0 / rate;
}

// ---------------------------------------------------------------------------
// Trace

constexpr std::int64_t kGenesisId = 0;
constexpr std::int64_t kNoDevice = -1;

struct Block {
    std::int64_t id = kGenesisId;
    std::int64_t miner = kNoDevice;
    std::int64_t parent = -1;
    int height = 0;
    double mined_at = 0;
    double size = 0;
};

struct Reception {
    std::int64_t block = 0;
    std::int64_t device = 0;
    double time = 0;
};

struct Transfer {
    std::int64_t block = 0;
    std::int64_t sender = 0;
    std::int64_t receiver = 0;
    double start = 0;
    double end = 0;
    double bytes = 0;
};

struct EventTrace {
    std::vector<Block> blocks;          // blocks[0] is genesis
    std::vector<Reception> receptions;  // engine order (chronological)
    std::vector<Transfer> transfers;    // completion order
    std::vector<std::int64_t> canonical_chain;  // genesis..tip
    int device_count = 0;
    double duration_s = 0;

    std::int64_t mined_count() const {
        return static_cast<std::int64_t>(blocks.size()) - 1;
    }
};

struct ChainSummary {
    std::vector<std::int64_t> canonical;
    std::set<std::int64_t> stale;
    int fork_count = 0;
};

/// Longest-chain resolution. Ties on height break by earliest tip mined_at,
/// then lowest block id. fork_count counts blocks with two or more children.
inline ChainSummary finalize_chain(const EventTrace& trace) {
    if (trace.blocks.empty()) throw IncompleteTraceError("trace has no genesis block");
    std::map<std::int64_t, size_t> index;
    for (size_t i = 0; i < trace.blocks.size(); ++i) index[trace.blocks[i].id] = i;

    std::map<std::int64_t, int> child_count;
    for (const auto& b : trace.blocks)
        if (b.id != kGenesisId) ++child_count[b.parent];

    const Block* best = &trace.blocks[0];
    for (const auto& b : trace.blocks) {
        if (b.height > best->height ||
            (b.height == best->height &&
             (b.mined_at < best->mined_at ||
              (b.mined_at == best->mined_at && b.id < best->id))))
            best = &b;
    }

    ChainSummary out;
    const Block* cur = best;
    for (;;) {
        out.canonical.push_back(cur->id);
        if (cur->id == kGenesisId) break;
        const auto it = index.find(cur->parent);
        if (it == index.end())
            throw IncompleteTraceError("block " + std::to_string(cur->id) + " has unknown parent");
        cur = &trace.blocks[it->second];
    }
    std::reverse(out.canonical.begin(), out.canonical.end());

    std::set<std::int64_t> canonical_set(out.canonical.begin(), out.canonical.end());
    for (const auto& b : trace.blocks)
        if (b.id != kGenesisId && !canonical_set.count(b.id)) out.stale.insert(b.id);
    for (const auto& [id, count] : child_count)
        if (count >= 2) ++out.fork_count;
    return out;
}

// ---------------------------------------------------------------------------
// Engine

namespace detail {

// A sender pushes to a bounded number of peers at once; remaining pushes
// queue and start fastest-link-first as slots free up. The slot count scales
// with the uplink so each concurrent share stays near typical receiver speed.
constexpr double kSlotTargetRate = 2.5e6;  // bps per concurrent push
constexpr int kMinSlots = 2;
constexpr int kMaxSlots = 10;

inline int upload_slots(double up_bps) {
    const auto by_rate = static_cast<int>(std::llround(up_bps / kSlotTargetRate));
    return std::clamp(by_rate, kMinSlots, kMaxSlots);
}

struct PendingPush {
    double rate_key = 0;  // min(sender up, receiver down); higher goes first
    std::uint64_t seq = 0;
    int block = 0;   // index into blocks
    int target = 0;  // device index

    bool operator<(const PendingPush& other) const {
        if (rate_key != other.rate_key) return rate_key < other.rate_key;  // max-heap on rate
        return seq > other.seq;
    }
};

struct QueuedEvent {
    double time = 0;
    std::uint64_t seq = 0;
    enum class Kind { Mine, Arrival, Complete } kind = Kind::Mine;
    int subject = 0;  // miner device index or transfer index

    bool operator>(const QueuedEvent& other) const {
        if (time != other.time) return time > other.time;
        return seq > other.seq;
    }
};

}  // namespace detail

/// Runs the discrete-event simulation: per-miner Poisson mining over the
/// longest-chain rule, direct full-block push relay with upload splitting and
/// FIFO receiver service. Deterministic for identical (network, config).
inline EventTrace run(const Network& network, const SimConfig& config) {
    using detail::QueuedEvent;
    config.validate();
    validate_network(network);
    const double interval = effective_interval(config, network);

    const int n = static_cast<int>(network.devices.size());
    std::vector<double> up(n), down(n);
    std::vector<std::int64_t> ids(n);
    for (int i = 0; i < n; ++i) {
        up[i] = network.devices[i].upload_bw;
        down[i] = network.devices[i].download_bw;
        ids[i] = network.devices[i].id;
    }
    const auto index_of = network.index_by_id();
    std::vector<std::vector<std::pair<int, double>>> adj(n);  // (peer index, latency ms)
    for (const auto& link : network.links) {
        const int a = static_cast<int>(index_of.at(link.a));
        const int b = static_cast<int>(index_of.at(link.b));
        adj[a].emplace_back(b, link.latency_ms);
        adj[b].emplace_back(a, link.latency_ms);
    }
    for (auto& peers : adj) std::sort(peers.begin(), peers.end());

    EventTrace trace;
    trace.device_count = n;
    trace.duration_s = config.duration_s;
    trace.blocks.push_back(Block{});  // genesis

    const double total_power = network.total_mining_power();
    std::vector<int> miner_indices;
    std::vector<Rng> miner_rng;
    std::vector<double> miner_rate;
    for (int i = 0; i < n; ++i) {
        if (network.devices[i].role != Role::Miner) continue;
        miner_indices.push_back(i);
        miner_rng.push_back(rng_stream(config.seed, "mine", static_cast<std::uint64_t>(i)));
        miner_rate.push_back(network.devices[i].mining_power / total_power / interval);
    }
    std::vector<int> miner_slot(n, -1);
    for (size_t s = 0; s < miner_indices.size(); ++s) miner_slot[miner_indices[s]] = static_cast<int>(s);

    // Per-device chain state. best_eta[b][d] carries the best predicted
    // completion among transfers of b towards d (0 when none): a holder only
    // starts a push it expects to beat, so a slow early sender cannot lock a
    // faster path out, and duplicate copies stay rare.
    std::vector<int> best_tip(n, 0);
    std::vector<std::vector<char>> has;
    std::vector<std::vector<char>> reserved;  // block already holds a downlink reservation
    std::vector<std::vector<double>> best_eta;
    has.push_back(std::vector<char>(n, 1));  // genesis is known everywhere
    reserved.push_back(std::vector<char>(n, 1));
    best_eta.push_back(std::vector<double>(n, 0.0));

    std::vector<double> receiver_free(n, 0.0);
    std::vector<int> active_out(n, 0);
    std::vector<std::priority_queue<detail::PendingPush>> pending(n);

    struct LiveTransfer {
        int block, sender, receiver;
        double start, latency_ms, service_s, recv_occupancy_s;
    };
    std::vector<LiveTransfer> live;

    std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, std::greater<>> queue;
    std::uint64_t next_seq = 0;
    auto push_event = [&](double t, QueuedEvent::Kind kind, int subject) {
        queue.push(QueuedEvent{t, next_seq++, kind, subject});
    };

    auto link_latency_ms = [&](int a, int b) {
        for (const auto& [peer, lat] : adj[a])
            if (peer == b) return lat;
        return 0.0;
    };

    auto start_transfer = [&](int sender, int target, int block, double now) {
        active_out[sender] += 1;
        const double rate = std::min(up[sender] / active_out[sender], down[target]);
        const double bits = trace.blocks[block].size * 8.0;
        const double latency_ms = link_latency_ms(sender, target);
        live.push_back({block, sender, target, now, latency_ms, bits / rate, bits / down[target]});
        push_event(now + latency_ms / 1000.0, QueuedEvent::Kind::Arrival,
                   static_cast<int>(live.size()) - 1);
    };

    // Starts queued pushes while the sender has free slots, skipping targets
    // already served (or about to be served faster) by someone else.
    auto pump_sender = [&](int sender, double now) {
        auto& q = pending[sender];
        while (active_out[sender] < detail::upload_slots(up[sender]) && !q.empty()) {
            const auto push = q.top();
            q.pop();
            if (has[push.block][push.target]) continue;
            const double bits = trace.blocks[push.block].size * 8.0;
            const double rate = std::min(up[sender] / (active_out[sender] + 1), down[push.target]);
            const double arrival = now + link_latency_ms(sender, push.target) / 1000.0;
            const double eta = std::max(arrival, receiver_free[push.target]) + bits / rate;
            double& best = best_eta[push.block][push.target];
            if (best != 0.0 && best <= eta) continue;
            best = eta;
            start_transfer(sender, push.target, push.block, now);
        }
    };

    auto enqueue_relays = [&](int device, int block, double now) {
        for (const auto& [peer, lat] : adj[device]) {
            (void)lat;
            if (has[block][peer]) continue;
            pending[device].push(detail::PendingPush{std::min(up[device], down[peer]), next_seq++,
                                                     block, peer});
        }
        pump_sender(device, now);
    };

    // True when `block` lies on `device`'s current best chain.
    auto on_best_chain = [&](int device, int block) {
        int cur = best_tip[device];
        while (trace.blocks[cur].height > trace.blocks[block].height)
            cur = static_cast<int>(trace.blocks[cur].parent);
        return cur == block;
    };

    for (size_t s = 0; s < miner_indices.size(); ++s) {
        const double t = miner_rng[s].exponential(miner_rate[s]);
        if (t <= config.duration_s) push_event(t, QueuedEvent::Kind::Mine, miner_indices[s]);
    }

    while (!queue.empty()) {
        const QueuedEvent ev = queue.top();
        queue.pop();
        const double now = ev.time;

        switch (ev.kind) {
            case QueuedEvent::Kind::Mine: {
                const int miner = ev.subject;
                const int slot = miner_slot[miner];
                const int parent = best_tip[miner];
                const int block = static_cast<int>(trace.blocks.size());
                trace.blocks.push_back(Block{static_cast<std::int64_t>(block), ids[miner],
                                             trace.blocks[parent].id,
                                             trace.blocks[parent].height + 1, now,
                                             config.block_size});
                has.push_back(std::vector<char>(n, 0));
                reserved.push_back(std::vector<char>(n, 0));
                best_eta.push_back(std::vector<double>(n, 0.0));
                has[block][miner] = 1;
                trace.receptions.push_back({static_cast<std::int64_t>(block), ids[miner], now});
                best_tip[miner] = block;
                enqueue_relays(miner, block, now);
                const double next = now + miner_rng[slot].exponential(miner_rate[slot]);
                if (next <= config.duration_s) push_event(next, QueuedEvent::Kind::Mine, miner);
                break;
            }
            case QueuedEvent::Kind::Arrival: {
                // Downlink reservations are FIFO in arrival order, one per
                // block: a transfer throttled by its sender holds the receiver
                // only for the receiver's own serialization time, and an
                // overriding faster copy of an already-queued block rides
                // without reserving again.
                const auto& tr = live[ev.subject];
                if (has[tr.block][tr.receiver] || reserved[tr.block][tr.receiver]) {
                    push_event(now + tr.service_s, QueuedEvent::Kind::Complete, ev.subject);
                    break;
                }
                reserved[tr.block][tr.receiver] = 1;
                const double service_start = std::max(now, receiver_free[tr.receiver]);
                const double completion = service_start + tr.service_s;
                receiver_free[tr.receiver] = service_start + tr.recv_occupancy_s;
                push_event(completion, QueuedEvent::Kind::Complete, ev.subject);
                break;
            }
            case QueuedEvent::Kind::Complete: {
                const auto tr = live[ev.subject];  // by value: live may grow below
                trace.transfers.push_back({static_cast<std::int64_t>(tr.block), ids[tr.sender],
                                           ids[tr.receiver], tr.start, now,
                                           trace.blocks[tr.block].size});
                active_out[tr.sender] -= 1;
                if (now <= config.duration_s) pump_sender(tr.sender, now);

                const int device = tr.receiver;
                const int block = tr.block;
                if (!has[block][device]) {
                    has[block][device] = 1;
                    trace.receptions.push_back(
                        {static_cast<std::int64_t>(block), ids[device], now});
                    bool relay = false;
                    if (trace.blocks[block].height > trace.blocks[best_tip[device]].height) {
                        best_tip[device] = block;
                        relay = true;
                    } else if (on_best_chain(device, block)) {
                        relay = true;  // late-arriving ancestor of the adopted tip
                    }
                    if (relay && now <= config.duration_s) enqueue_relays(device, block, now);
                }
                break;
            }
        }
    }

    trace.canonical_chain = finalize_chain(trace).canonical;
    return trace;
}

// ---------------------------------------------------------------------------
// Trace persistence

inline std::string serialize_trace(const EventTrace& trace, const SimConfig& config) {
    std::string out = "powmesh-trace v1\n";
    // Merge mine and reception records chronologically; mines sort first at
    // equal times so a block appears before its own receptions.
    size_t bi = 1, ri = 0;
    while (bi < trace.blocks.size() || ri < trace.receptions.size()) {
        const bool take_mine =
            bi < trace.blocks.size() &&
            (ri >= trace.receptions.size() ||
             trace.blocks[bi].mined_at <= trace.receptions[ri].time);
        if (take_mine) {
            const auto& b = trace.blocks[bi++];
            out += "mine " + fmt_fixed(b.mined_at, 9) + " " + std::to_string(b.id) + " " +
                   std::to_string(b.miner) + " " + std::to_string(b.parent) + " " +
                   std::to_string(b.height) + "\n";
        } else {
            const auto& r = trace.receptions[ri++];
            out += "recv " + fmt_fixed(r.time, 9) + " " + std::to_string(r.block) + " " +
                   std::to_string(r.device) + "\n";
        }
    }
    out += "chain";
    for (const auto id : trace.canonical_chain) out += " " + std::to_string(id);
    out += "\n";
    out += "config block_size=" + fmt_fixed(config.block_size, 0) +
           " duration=" + fmt_fixed(config.duration_s, 3) +
           " tx_size=" + fmt_fixed(config.avg_tx_size, 0) +
           " seed=" + std::to_string(config.seed) +
           " devices=" + std::to_string(trace.device_count);
    if (config.regime.kind == MiningRegime::Kind::FixedInterval)
        out += " interval=" + fmt_fixed(config.regime.target_interval_s, 3);
    else
        out += " difficulty=" + fmt_g(config.regime.difficulty) +
               " ref_miners=" + std::to_string(config.regime.ref_miners) +
               " ref_interval=" + fmt_fixed(config.regime.ref_interval_s, 3);
    out += "\n";
    return out;
}

}  // namespace powmesh
