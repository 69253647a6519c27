#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qnoc/circuit.hpp"
#include "qnoc/errors.hpp"
#include "qnoc/placement.hpp"
#include "qnoc/rng.hpp"
#include "qnoc/strategy.hpp"
#include "qnoc/topology.hpp"

namespace qnoc {

/// Connectivity radius of generated requests: every request at exactly
/// `radius` hops, or a radius drawn uniformly from [1, radius] per request.
struct CrMode {
    enum class Kind { fixed, random };
    Kind kind = Kind::fixed;
    int radius = 1;

    static CrMode fixed(int r) { return {Kind::fixed, r}; }
    static CrMode random(int max_r) { return {Kind::random, max_r}; }

    std::string to_string() const { return (kind == Kind::fixed ? "fixed:" : "random:") + std::to_string(radius); }

    static CrMode parse(std::string_view token) {
        const auto colon = token.find(':');
        if (colon == std::string_view::npos) {
            throw ValidationError("C_r mode must be fixed:<r> or random:<max>, got '" + std::string(token) + "'");
        }
        const auto kind = token.substr(0, colon);
        const auto num = token.substr(colon + 1);
        int r = 0;
        const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), r);
        if (ec != std::errc{} || ptr != num.data() + num.size() || r <= 0) {
            throw ValidationError("C_r radius must be a positive integer in '" + std::string(token) + "'");
        }
        if (kind == "fixed") return fixed(r);
        if (kind == "random") return random(r);
        throw ValidationError("unknown C_r mode '" + std::string(kind) + "'");
    }

    friend bool operator==(const CrMode&, const CrMode&) = default;
};

struct SynthSpec {
    int target_depth = 5;
    int requests_per_layer = 1;
    CrMode cr = CrMode::fixed(1);
    std::uint64_t seed = 0;
    // Placement the radius is measured against. Under hop-by-hop the anchors
    // never move, so distances equal those of the initial block mapping.
    Strategy reference = Strategy::hop_by_hop;
};

namespace detail {

struct SynthState {
    const MeshTopology& topology;
    PlacementMap placement;
    std::vector<bool> fresh;  // never used as an operand so far
    std::vector<bool> busy;   // used in the current layer
};

// Qubits on `core` that are still fresh and free this layer.
inline std::vector<QubitId> fresh_on(const SynthState& st, CoreId core) {
    std::vector<QubitId> out;
    const auto& where = st.placement.assignment();
    for (std::uint32_t q = 0; q < where.size(); ++q) {
        if (where[q] == core && st.fresh[q] && !st.busy[q]) out.emplace_back(q);
    }
    return out;
}

inline int draw_radius(const CrMode& cr, RandomStream& rng, const std::vector<int>& feasible) {
    if (cr.kind == CrMode::Kind::fixed) {
        for (int r : feasible) {
            if (r == cr.radius) return r;
        }
        throw GenerationError("no free operand pair at C_r=" + std::to_string(cr.radius));
    }
    const int r = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cr.radius)));
    for (int f : feasible) {
        if (f == r) return r;
    }
    // Redraw among radii that still have a free pair.
    if (feasible.empty()) throw GenerationError("no free operand pair within C_r<=" + std::to_string(cr.radius));
    return feasible[rng.uniform_index(feasible.size())];
}

inline void apply_move(SynthState& st, Strategy reference, QubitId src, QubitId dst) {
    const CoreId cs = st.placement.core_of(src);
    const CoreId cd = st.placement.core_of(dst);
    if (cs == cd) return;
    const CommPlan p = plan(reference, st.topology, cs, cd);
    st.placement.relocate(src, p.exec_core);
    st.placement.relocate(dst, p.exec_core);
}

}  // namespace detail

/**
 * Synthetic workload of exactly `target_depth` layers with
 * `requests_per_layer` inter-core two-qubit gates each.
 *
 * Layer 1 picks `requests_per_layer` (source, anchor) pairs at the drawn
 * radius. Every later layer pairs each anchor with a never-used source qubit
 * at the drawn radius from the anchor's current core, so each layer depends
 * on the previous one through its anchors and the layering is exact. Sources
 * are used once; they are the qubits that move under hop-by-hop.
 */
inline Circuit gen_synthetic(const SynthSpec& spec, const MeshTopology& topology, std::uint32_t qubits_per_core) {
    if (spec.target_depth <= 0 || spec.requests_per_layer <= 0) {
        throw GenerationError("depth and requests per layer must be positive");
    }
    if (spec.cr.radius <= 0 || spec.cr.radius > topology.diameter()) {
        throw GenerationError("C_r " + std::to_string(spec.cr.radius) + " outside [1, " +
                              std::to_string(topology.diameter()) + "]");
    }
    if (spec.cr.kind == CrMode::Kind::fixed &&
        static_cast<std::size_t>(spec.requests_per_layer) > topology.core_count() / 2) {
        throw GenerationError(std::to_string(spec.requests_per_layer) + " requests per layer exceed " +
                              std::to_string(topology.core_count() / 2) + " core pairs");
    }

    const auto num_qubits = static_cast<std::uint32_t>(topology.core_count() * qubits_per_core);
    detail::SynthState st{topology, initial_mapping(num_qubits, topology, qubits_per_core),
                          std::vector<bool>(num_qubits, true), std::vector<bool>(num_qubits, false)};
    RandomStream rng(derive_seed(spec.seed, 0x5EED));
    Circuit circuit(num_qubits);
    const std::size_t cores = topology.core_count();
    const int max_r = spec.cr.radius;

    std::vector<QubitId> anchors;
    std::vector<int> anchors_on(cores, 0);
    for (int layer = 0; layer < spec.target_depth; ++layer) {
        std::fill(st.busy.begin(), st.busy.end(), false);
        for (QubitId a : anchors) st.busy[a.index] = true;

        for (int k = 0; k < spec.requests_per_layer; ++k) {
            // Candidate (source core, anchor core) pairs by radius.
            std::vector<std::vector<std::pair<CoreId, CoreId>>> by_radius(static_cast<std::size_t>(max_r) + 1);
            std::vector<std::vector<QubitId>> fresh(cores);
            for (std::uint32_t c = 0; c < cores; ++c) fresh[c] = detail::fresh_on(st, CoreId(c));

            if (layer == 0) {
                for (std::uint32_t a = 0; a < cores; ++a) {
                    if (fresh[a].empty()) continue;
                    for (std::uint32_t b = 0; b < cores; ++b) {
                        const int d = topology.hop_distance(CoreId(a), CoreId(b));
                        if (d < 1 || d > max_r || fresh[b].empty()) continue;
                        by_radius[d].emplace_back(CoreId(a), CoreId(b));
                    }
                }
            } else {
                const CoreId anchor_core = st.placement.core_of(anchors[k]);
                for (std::uint32_t a = 0; a < cores; ++a) {
                    const int d = topology.hop_distance(CoreId(a), anchor_core);
                    if (d < 1 || d > max_r || fresh[a].empty()) continue;
                    by_radius[d].emplace_back(CoreId(a), anchor_core);
                }
            }
            std::vector<int> feasible;
            for (int r = 1; r <= max_r; ++r) {
                if (!by_radius[r].empty()) feasible.push_back(r);
            }
            const int r = detail::draw_radius(spec.cr, rng, feasible);
            auto pairs = by_radius[r];
            if (layer == 0) {
                // Spread anchors over cores so no core's neighbourhood runs
                // out of fresh sources in later layers.
                int least = anchors_on[pairs.front().second.index];
                for (const auto& pr : pairs) least = std::min(least, anchors_on[pr.second.index]);
                std::erase_if(pairs, [&](const auto& pr) { return anchors_on[pr.second.index] != least; });
            }
            const auto [src_core, dst_core] = pairs[rng.uniform_index(pairs.size())];

            const auto& src_pool = fresh[src_core.index];
            const QubitId src = src_pool[rng.uniform_index(src_pool.size())];
            QubitId dst;
            if (layer == 0) {
                const auto& dst_pool = fresh[dst_core.index];
                dst = dst_pool[rng.uniform_index(dst_pool.size())];
                anchors.push_back(dst);
                ++anchors_on[dst_core.index];
            } else {
                dst = anchors[k];
            }
            st.fresh[src.index] = false;
            st.fresh[dst.index] = false;
            st.busy[src.index] = true;
            st.busy[dst.index] = true;
            circuit.two_qubit(src, dst);
            detail::apply_move(st, spec.reference, src, dst);
        }
    }
    return circuit;
}

// Coupling-level QFT: one-qubit gate on i, then (j, i) for every j > i.
inline Circuit gen_qft(std::uint32_t n) {
    if (n == 0) throw GenerationError("QFT needs at least one qubit");
    Circuit c(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        c.one_qubit(i);
        for (std::uint32_t j = i + 1; j < n; ++j) c.two_qubit(j, i);
    }
    return c;
}

/**
 * Coupling-level ripple-carry adder on 2n+2 qubits laid out as
 * c0, b0, a0, b1, a1, ..., b(n-1), a(n-1), z.
 *
 * MAJ(x, y, z) = cx(z,y) cx(z,x) toffoli(x,y -> z)
 * UMA(x, y, z) = toffoli(x,y -> z) cx(z,x) cx(x,y)
 * with the Toffoli kept as the single pair (x, z) spanning the triple.
 */
inline Circuit gen_cuccaro(std::uint32_t n_bits) {
    if (n_bits == 0) throw GenerationError("adder needs at least one bit");
    const std::uint32_t n = 2 * n_bits + 2;
    Circuit c(n);
    auto b = [](std::uint32_t i) { return 2 * i + 1; };
    auto a = [](std::uint32_t i) { return 2 * i + 2; };
    auto carry_in = [&](std::uint32_t i) { return i == 0 ? 0u : a(i - 1); };
    const std::uint32_t z = n - 1;

    for (std::uint32_t i = 0; i < n_bits; ++i) {
        const std::uint32_t x = carry_in(i), y = b(i), t = a(i);
        c.two_qubit(t, y);
        c.two_qubit(t, x);
        c.two_qubit(x, t);
    }
    c.two_qubit(a(n_bits - 1), z);
    for (std::uint32_t i = n_bits; i-- > 0;) {
        const std::uint32_t x = carry_in(i), y = b(i), t = a(i);
        c.two_qubit(x, t);
        c.two_qubit(t, x);
        c.two_qubit(x, y);
    }
    return c;
}

/**
 * Multi-control multi-target gate, V-chain style. Controls are qubits
 * [0, nc), ancillas [nc, 2nc-1), targets follow. Each Toffoli(p,q -> t) is
 * kept as its three two-qubit couplings (q,t) (p,q) (p,t). The accumulator
 * (last ancilla, or the sole control) then drives every target, and the
 * accumulation is undone in exact reverse order.
 */
inline Circuit gen_mcmt(std::uint32_t n_controls, std::uint32_t n_targets) {
    if (n_controls == 0 || n_targets == 0) throw GenerationError("MCMT needs at least one control and one target");
    const std::uint32_t n_anc = n_controls - 1;
    const std::uint32_t first_target = n_controls + n_anc;
    Circuit c(first_target + n_targets);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> compute;
    std::uint32_t acc = 0;
    for (std::uint32_t k = 0; k < n_anc; ++k) {
        const std::uint32_t p = acc;
        const std::uint32_t q = k + 1;
        const std::uint32_t t = n_controls + k;
        compute.insert(compute.end(), {{q, t}, {p, q}, {p, t}});
        acc = t;
    }
    for (auto [x, y] : compute) c.two_qubit(x, y);
    for (std::uint32_t j = 0; j < n_targets; ++j) c.two_qubit(acc, first_target + j);
    for (auto it = compute.rbegin(); it != compute.rend(); ++it) c.two_qubit(it->first, it->second);
    return c;
}

// Quantum-volume-style layers: random permutation, consecutive pairs coupled.
inline Circuit gen_quantum_volume(std::uint32_t n, std::uint32_t n_layers, std::uint64_t seed) {
    if (n < 2) throw GenerationError("quantum volume needs at least two qubits");
    if (n_layers == 0) throw GenerationError("quantum volume needs at least one layer");
    RandomStream rng(derive_seed(seed, 0x0B5));
    Circuit c(n);
    std::vector<std::uint32_t> perm(n);
    for (std::uint32_t layer = 0; layer < n_layers; ++layer) {
        for (std::uint32_t i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(perm);
        for (std::uint32_t i = 0; i + 1 < n; i += 2) c.two_qubit(perm[i], perm[i + 1]);
    }
    return c;
}

}  // namespace qnoc
