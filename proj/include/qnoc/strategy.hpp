#pragma once

#include <algorithm>
#include <cstdlib>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qnoc/errors.hpp"
#include "qnoc/topology.hpp"

namespace qnoc {

enum class Strategy { hop_by_hop, two_way };

inline std::string_view to_string(Strategy s) { return s == Strategy::hop_by_hop ? "hh" : "twt"; }

inline Strategy parse_strategy(std::string_view token) {
    if (token == "hh") return Strategy::hop_by_hop;
    if (token == "twt") return Strategy::two_way;
    throw ValidationError("unknown strategy '" + std::string(token) + "' (expected hh or twt)");
}

inline std::ostream& operator<<(std::ostream& os, Strategy s) { return os << to_string(s); }

/// Movement schedule for one inter-core two-qubit gate. Hop lists exclude the
/// starting core; both operands end on exec_core.
struct CommPlan {
    std::vector<CoreId> src_hops;
    std::vector<CoreId> dst_hops;
    CoreId exec_core;
    int rounds = 0;

    friend bool operator==(const CommPlan&, const CommPlan&) = default;
};

namespace detail {

inline void require_distinct(CoreId src, CoreId dst) {
    if (src == dst) {
        throw NoPlanError("operands already share core " + std::to_string(src.index) + "; no communication needed");
    }
}

inline int sign(int v) { return (v > 0) - (v < 0); }

// Cores visited walking from `from` in unit steps of (dx, dy), excluding `from`.
inline std::vector<CoreId> walk(const MeshTopology& topology, Coord from, int dx, int dy, int steps) {
    std::vector<CoreId> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (int i = 1; i <= steps; ++i) out.push_back(topology.core_at({from.x + i * dx, from.y + i * dy}));
    return out;
}

}  // namespace detail

// Source qubit walks the XY route; the gate runs on the destination core.
inline CommPlan plan_hh(const MeshTopology& topology, CoreId src, CoreId dst) {
    detail::require_distinct(src, dst);
    auto route = topology.xy_route(src, dst);
    CommPlan plan;
    plan.src_hops.assign(route.begin() + 1, route.end());
    plan.exec_core = dst;
    plan.rounds = static_cast<int>(plan.src_hops.size());
    return plan;
}

/**
 * Two-way teleportation. Both operands step toward each other each round:
 *   - same row:    both move along X, meeting ceil(d/2) hops from the source
 *                  (the closer-to-destination core when d is odd);
 *   - same column: the same along Y;
 *   - diagonal:    the source moves along X only and the destination along Y
 *                  only, meeting at (x_dst, y_src).
 * The qubit that arrives first waits on the meeting core.
 */
inline CommPlan plan_twt(const MeshTopology& topology, CoreId src, CoreId dst) {
    detail::require_distinct(src, dst);
    const Coord s = topology.coord_of(src);
    const Coord d = topology.coord_of(dst);
    const int dx = d.x - s.x;
    const int dy = d.y - s.y;

    CommPlan plan;
    if (dy == 0 || dx == 0) {
        const int dist = std::abs(dx) + std::abs(dy);
        const int ux = detail::sign(dx);
        const int uy = detail::sign(dy);
        const int src_steps = (dist + 1) / 2;
        const int dst_steps = dist / 2;
        plan.src_hops = detail::walk(topology, s, ux, uy, src_steps);
        plan.dst_hops = detail::walk(topology, d, -ux, -uy, dst_steps);
    } else {
        plan.src_hops = detail::walk(topology, s, detail::sign(dx), 0, std::abs(dx));
        plan.dst_hops = detail::walk(topology, d, 0, -detail::sign(dy), std::abs(dy));
    }
    plan.exec_core = plan.src_hops.empty() ? src : plan.src_hops.back();
    plan.rounds = static_cast<int>(std::max(plan.src_hops.size(), plan.dst_hops.size()));
    return plan;
}

inline CommPlan plan(Strategy strategy, const MeshTopology& topology, CoreId src, CoreId dst) {
    return strategy == Strategy::hop_by_hop ? plan_hh(topology, src, dst) : plan_twt(topology, src, dst);
}

// (hop-by-hop rounds, two-way rounds) for one request.
inline std::pair<int, int> rounds_saved(const MeshTopology& topology, CoreId src, CoreId dst) {
    return {plan_hh(topology, src, dst).rounds, plan_twt(topology, src, dst).rounds};
}

}  // namespace qnoc
