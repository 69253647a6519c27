#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "qnoc/circuit.hpp"
#include "qnoc/errors.hpp"
#include "qnoc/placement.hpp"
#include "qnoc/protocol.hpp"
#include "qnoc/rng.hpp"
#include "qnoc/strategy.hpp"
#include "qnoc/topology.hpp"

namespace qnoc {

struct SimConfig {
    MeshTopology topology{4, 4};
    std::uint32_t n_per_core = 2;  // computation qubits
    std::uint32_t m_per_core = 2;  // communication qubits
    TimingConfig timing;
    Strategy strategy = Strategy::hop_by_hop;
    std::uint64_t seed = 0;
    // Let EPR generation for the next hop overlap the current hop's
    // classical correction.
    bool pipeline_hops = false;

    void validate() const {
        if (n_per_core == 0) throw ValidationError("n_per_core must be at least 1");
        if (m_per_core == 0) throw ValidationError("m_per_core must be at least 1");
        timing.validate();
    }
};

enum class ChainRole : std::uint8_t { source = 0, destination = 1 };

struct RequestRecord {
    std::uint64_t gate_id = 0;
    std::size_t layer = 0;
    CoreId src;
    CoreId dst;
    CoreId exec_core;
    int cr = 0;
    int rounds = 0;
    std::uint32_t attempts = 0;
    Time issue = 0;
    Time arrival = 0;

    Time latency() const noexcept { return arrival - issue; }
    friend bool operator==(const RequestRecord&, const RequestRecord&) = default;
};

struct HopRecord {
    std::uint64_t gate_id = 0;
    ChainRole role = ChainRole::source;
    QubitId qubit;
    CoreId from;
    CoreId to;
    BsmLinkId link;
    std::uint32_t attempts = 1;
    Time start = 0;
    Time finish = 0;

    friend bool operator==(const HopRecord&, const HopRecord&) = default;
};

struct AuditResult {
    std::size_t link_overlaps = 0;
    std::size_t comm_overholds = 0;

    bool clean() const noexcept { return link_overlaps == 0 && comm_overholds == 0; }
    friend bool operator==(const AuditResult&, const AuditResult&) = default;
};

struct SimReport {
    Time total_delay = 0;
    Time comm_delay_sum = 0;       // sum of per-request latencies
    Time comm_delay_critical = 0;  // sum over layers of the slowest request
    std::size_t original_depth = 0;
    std::size_t expanded_depth = 0;
    std::size_t inter_core_requests = 0;
    std::size_t congestion_events = 0;
    std::uint32_t max_core_occupancy = 0;
    std::vector<RequestRecord> requests;
    std::vector<HopRecord> hops;
    Circuit expanded;
    AuditResult audit;

    friend bool operator==(const SimReport&, const SimReport&) = default;
};

/// Replays a hop trace and counts BSM links serving two overlapping
/// teleports, and instants where a core holds more than `m_per_core`
/// communication qubits. Independent of the arbiter that produced the trace.
inline AuditResult audit_resources(const std::vector<HopRecord>& hops, const MeshTopology& topology,
                                   std::uint32_t m_per_core) {
    AuditResult out;
    std::map<BsmLinkId, std::vector<std::pair<Time, Time>>> per_link;
    for (const auto& h : hops) per_link[h.link].emplace_back(h.start, h.finish);
    for (auto& [link, spans] : per_link) {
        std::sort(spans.begin(), spans.end());
        for (std::size_t i = 1; i < spans.size(); ++i) {
            if (spans[i].first < spans[i - 1].second) ++out.link_overlaps;
        }
    }

    // (time, delta): releases sort before acquisitions at the same instant.
    std::vector<std::vector<std::pair<Time, int>>> per_core(topology.core_count());
    for (const auto& h : hops) {
        for (CoreId c : {h.from, h.to}) {
            per_core[c.index].emplace_back(h.start, +1);
            per_core[c.index].emplace_back(h.finish, -1);
        }
    }
    for (auto& ev : per_core) {
        std::sort(ev.begin(), ev.end());
        int held = 0;
        for (auto [t, delta] : ev) {
            held += delta;
            if (held > static_cast<int>(m_per_core)) ++out.comm_overholds;
        }
    }
    return out;
}

namespace detail {

class Simulation {
public:
    Simulation(const Circuit& circuit, const SimConfig& cfg)
        : circuit_(circuit),
          cfg_(cfg),
          topo_(cfg.topology),
          placement_(initial_mapping(circuit.num_qubits(), cfg.topology, cfg.n_per_core)),
          link_busy_(topo_.link_count(), false),
          free_comm_(topo_.core_count(), cfg.m_per_core),
          expanded_(circuit.num_qubits()) {}

    SimReport run() {
        const auto layers = layerize(circuit_);
        std::vector<std::size_t> pos_of_id;  // gate id -> index in circuit
        for (std::size_t i = 0; i < circuit_.size(); ++i) {
            const auto id = circuit_.gates()[i].id;
            if (id >= pos_of_id.size()) pos_of_id.resize(id + 1);
            pos_of_id[id] = i;
        }

        for (std::size_t layer = 0; layer < layers.size(); ++layer) {
            const Time t0 = now_;
            const std::size_t first_request = requests_.size();
            for (auto id : layers[layer]) start_gate(circuit_.gates()[pos_of_id[id]], layer, t0);
            drain();

            Time critical = 0;
            for (std::size_t r = first_request; r < requests_.size(); ++r) {
                critical = std::max(critical, requests_[r].record.latency());
            }
            report_.comm_delay_critical += critical;
        }

        report_.total_delay = now_;
        report_.original_depth = layers.size();
        report_.expanded = std::move(expanded_);
        report_.expanded_depth = depth(report_.expanded);
        report_.inter_core_requests = requests_.size();
        report_.max_core_occupancy = placement_.max_load_seen();
        for (auto& r : requests_) {
            report_.comm_delay_sum += r.record.latency();
            report_.requests.push_back(r.record);
        }
        report_.audit = audit_resources(report_.hops, topo_, cfg_.m_per_core);
        return std::move(report_);
    }

private:
    enum class EventKind : std::uint8_t { hop_done, hop_ready, gate_done };

    struct Event {
        Time time;
        std::uint64_t seq;
        EventKind kind;
        std::size_t index;  // hop record for hop events, gate position for gate_done

        bool operator>(const Event& o) const { return std::tie(time, seq) > std::tie(o.time, o.seq); }
    };

    struct Chain {
        std::size_t request;
        ChainRole role;
        QubitId qubit;
        CoreId origin;
        std::vector<CoreId> hops;
        RandomStream rng;
        std::size_t done = 0;  // completed hops
    };

    struct HopRef {
        std::size_t chain;
        std::size_t hop;  // position in the chain's hop list
    };

    struct Request {
        RequestRecord record;
        const Gate* gate;
        int pending_chains = 0;
    };

    struct Waiting {
        Time requested;
        std::uint64_t gate_id;
        ChainRole role;
        std::size_t chain;
        std::size_t hop;
        Time data_ready;
    };

    void schedule(Time t, EventKind kind, std::size_t index) { events_.push({t, seq_++, kind, index}); }

    void start_gate(const Gate& g, std::size_t layer, Time t0) {
        const auto idx = static_cast<std::size_t>(&g - circuit_.gates().data());
        if (g.kind != GateKind::two_qubit) {
            schedule(t0 + cfg_.timing.t_gate, EventKind::gate_done, idx);
            return;
        }
        const CoreId src = placement_.core_of(g.operands[0]);
        const CoreId dst = placement_.core_of(g.operands[1]);
        if (src == dst) {
            schedule(t0 + cfg_.timing.t_gate, EventKind::gate_done, idx);
            return;
        }

        const CommPlan p = plan(cfg_.strategy, topo_, src, dst);
        Request req;
        req.gate = &g;
        req.record.gate_id = g.id;
        req.record.layer = layer;
        req.record.src = src;
        req.record.dst = dst;
        req.record.exec_core = p.exec_core;
        req.record.cr = topo_.hop_distance(src, dst);
        req.record.rounds = p.rounds;
        req.record.issue = t0;
        const std::size_t r = requests_.size();
        requests_.push_back(req);

        const std::uint64_t gate_seed = derive_seed(cfg_.seed, g.id);
        auto add_chain = [&](ChainRole role, QubitId q, CoreId from, const std::vector<CoreId>& hops) {
            if (hops.empty()) return;
            chains_.push_back(Chain{r, role, q, from, hops,
                                    RandomStream(derive_seed(gate_seed, static_cast<std::uint64_t>(role)))});
            ++requests_[r].pending_chains;
            waiting_.push_back({t0, g.id, role, chains_.size() - 1, 0, t0});
        };
        add_chain(ChainRole::source, g.operands[0], src, p.src_hops);
        add_chain(ChainRole::destination, g.operands[1], dst, p.dst_hops);
    }

    void drain() {
        grant();
        while (!events_.empty()) {
            const Time t = events_.top().time;
            now_ = t;
            while (!events_.empty() && events_.top().time == t) {
                const Event ev = events_.top();
                events_.pop();
                handle(ev);
            }
            grant();
        }
        if (!waiting_.empty()) throw std::logic_error("simulation stalled with waiting teleports");
    }

    void handle(const Event& ev) {
        switch (ev.kind) {
            case EventKind::gate_done: {
                const Gate& g = circuit_.gates()[ev.index];
                Gate copy = g;
                copy.id = expanded_.next_id();
                expanded_.append(copy);
                break;
            }
            case EventKind::hop_ready: {
                const HopRef ref = hop_refs_[ev.index];
                const Chain& ch = chains_[ref.chain];
                waiting_.push_back({now_, requests_[ch.request].gate->id, ch.role, ref.chain, ref.hop + 1,
                                    report_.hops[ev.index].finish});
                break;
            }
            case EventKind::hop_done: finish_hop(ev.index); break;
        }
    }

    void finish_hop(std::size_t record) {
        const std::size_t chain_index = hop_refs_[record].chain;
        Chain& ch = chains_[chain_index];
        const HopRecord& hop = report_.hops[record];
        link_busy_[topo_.link_index(hop.link)] = false;
        ++free_comm_[hop.from.index];
        ++free_comm_[hop.to.index];

        if (placement_.relocate(ch.qubit, hop.to).congested) ++report_.congestion_events;
        expanded_.teleport(ch.qubit);
        ++ch.done;

        if (ch.done < ch.hops.size()) {
            if (!cfg_.pipeline_hops) {
                waiting_.push_back({now_, requests_[ch.request].gate->id, ch.role, chain_index, ch.done, now_});
            }
            return;
        }
        Request& req = requests_[ch.request];
        if (--req.pending_chains == 0) {
            req.record.arrival = now_;
            schedule(now_ + cfg_.timing.t_gate, EventKind::gate_done,
                     static_cast<std::size_t>(req.gate - circuit_.gates().data()));
        }
    }

    // FIFO by request time, then gate id, then source before destination. A
    // waiting teleport that cannot start still claims its link and one comm
    // qubit per endpoint so that later requests cannot overtake it.
    void grant() {
        if (waiting_.empty()) return;
        std::stable_sort(waiting_.begin(), waiting_.end(), [](const Waiting& a, const Waiting& b) {
            return std::tie(a.requested, a.gate_id, a.role) < std::tie(b.requested, b.gate_id, b.role);
        });
        std::vector<bool> claimed(link_busy_.size(), false);
        std::vector<std::int64_t> avail(free_comm_.begin(), free_comm_.end());
        std::vector<Waiting> still;
        for (const Waiting& w : waiting_) {
            Chain& ch = chains_[w.chain];
            const CoreId from = w.hop == 0 ? ch.origin : ch.hops[w.hop - 1];
            const CoreId to = ch.hops[w.hop];
            const BsmLinkId link = topo_.bsm_link_between(from, to);
            const std::size_t li = topo_.link_index(link);
            const bool ok = !link_busy_[li] && !claimed[li] && avail[from.index] > 0 && avail[to.index] > 0;
            claimed[li] = true;
            --avail[from.index];
            --avail[to.index];
            if (!ok) {
                still.push_back(w);
                continue;
            }
            link_busy_[li] = true;
            --free_comm_[from.index];
            --free_comm_[to.index];

            const TeleportOutcome out = teleport_hop(topo_, from, to, now_, cfg_.timing, ch.rng, w.data_ready);
            Request& req = requests_[ch.request];
            req.record.attempts += out.attempts;
            const std::size_t record = report_.hops.size();
            report_.hops.push_back({req.gate->id, ch.role, ch.qubit, from, to, link, out.attempts, out.start,
                                    out.finish});
            hop_refs_.push_back({w.chain, w.hop});
            schedule(out.finish, EventKind::hop_done, record);
            if (cfg_.pipeline_hops && w.hop + 1 < ch.hops.size()) {
                const Time ready = std::max(now_, out.finish - cfg_.timing.t_classical - cfg_.timing.t_correct);
                schedule(ready, EventKind::hop_ready, record);
            }
        }
        waiting_ = std::move(still);
    }

    const Circuit& circuit_;
    const SimConfig& cfg_;
    const MeshTopology& topo_;
    PlacementMap placement_;
    std::vector<bool> link_busy_;
    std::vector<std::uint32_t> free_comm_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
    std::uint64_t seq_ = 0;
    Time now_ = 0;
    std::vector<Request> requests_;
    std::vector<Chain> chains_;
    std::vector<HopRef> hop_refs_;  // parallel to report_.hops
    std::vector<Waiting> waiting_;
    Circuit expanded_;
    SimReport report_;
};

}  // namespace detail

/// Executes `circuit` layer by layer: a layer starts once every gate of the
/// previous layer, communication included, has finished.
inline SimReport run(const Circuit& circuit, const SimConfig& cfg) {
    cfg.validate();
    return detail::Simulation(circuit, cfg).run();
}

struct Comparison {
    SimReport hh;
    SimReport twt;
    double delay_reduction = 0;      // on comm_delay_critical
    double delay_sum_reduction = 0;  // on comm_delay_sum
    double depth_reduction = 0;      // on expanded_depth
};

// (hh - twt) / hh, or 0 when hh is 0.
inline double reduction(double hh, double twt) { return hh == 0 ? 0.0 : (hh - twt) / hh; }

inline Comparison compare(const Circuit& circuit, SimConfig cfg) {
    Comparison c;
    cfg.strategy = Strategy::hop_by_hop;
    c.hh = run(circuit, cfg);
    cfg.strategy = Strategy::two_way;
    c.twt = run(circuit, cfg);
    c.delay_reduction = reduction(c.hh.comm_delay_critical, c.twt.comm_delay_critical);
    c.delay_sum_reduction = reduction(c.hh.comm_delay_sum, c.twt.comm_delay_sum);
    c.depth_reduction =
        reduction(static_cast<double>(c.hh.expanded_depth), static_cast<double>(c.twt.expanded_depth));
    return c;
}

}  // namespace qnoc
