#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qnoc/circuit.hpp"
#include "qnoc/errors.hpp"
#include "qnoc/topology.hpp"

namespace qnoc {

struct RelocateResult {
    CoreId from;
    bool congested = false;  // destination above capacity after the move
};

/**
 * Logical qubit -> core assignment. relocate() is the only mutation; a core
 * may hold more than `capacity` qubits, which counts as congestion instead of
 * an error.
 */
class PlacementMap {
public:
    PlacementMap(std::size_t core_count, std::uint32_t capacity, std::vector<CoreId> qubit_core)
        : capacity_(capacity), qubit_core_(std::move(qubit_core)), core_load_(core_count, 0) {
        for (CoreId c : qubit_core_) {
            if (c.index >= core_count) throw BoundsError("initial core " + std::to_string(c.index) + " out of range");
            ++core_load_[c.index];
        }
        for (std::uint32_t load : core_load_) max_load_ = std::max(max_load_, load);
    }

    std::uint32_t capacity() const noexcept { return capacity_; }
    std::size_t num_qubits() const noexcept { return qubit_core_.size(); }
    std::size_t core_count() const noexcept { return core_load_.size(); }

    CoreId core_of(QubitId q) const {
        if (q.index >= qubit_core_.size()) throw BoundsError("qubit " + std::to_string(q.index) + " not placed");
        return qubit_core_[q.index];
    }

    std::uint32_t load(CoreId c) const {
        if (c.index >= core_load_.size()) throw BoundsError("core " + std::to_string(c.index) + " out of range");
        return core_load_[c.index];
    }

    // Highest occupancy any core has reached, including the initial state.
    std::uint32_t max_load_seen() const noexcept { return max_load_; }

    std::size_t total_load() const noexcept {
        std::size_t total = 0;
        for (auto l : core_load_) total += l;
        return total;
    }

    RelocateResult relocate(QubitId q, CoreId to) {
        const CoreId from = core_of(q);
        if (to.index >= core_load_.size()) throw BoundsError("core " + std::to_string(to.index) + " out of range");
        if (from == to) return {from, false};
        --core_load_[from.index];
        const std::uint32_t now = ++core_load_[to.index];
        qubit_core_[q.index] = to;
        max_load_ = std::max(max_load_, now);
        return {from, now > capacity_};
    }

    const std::vector<CoreId>& assignment() const noexcept { return qubit_core_; }

    friend bool operator==(const PlacementMap& a, const PlacementMap& b) {
        return a.capacity_ == b.capacity_ && a.qubit_core_ == b.qubit_core_ && a.core_load_ == b.core_load_;
    }

private:
    std::uint32_t capacity_;
    std::vector<CoreId> qubit_core_;
    std::vector<std::uint32_t> core_load_;
    std::uint32_t max_load_ = 0;
};

// Block 1:1 mapping: qubit i lives on core i / n_per_core.
inline PlacementMap initial_mapping(std::uint32_t num_qubits, const MeshTopology& topology,
                                    std::uint32_t n_per_core) {
    if (n_per_core == 0) throw CapacityError("cores must hold at least one computation qubit");
    const std::size_t slots = topology.core_count() * n_per_core;
    if (num_qubits > slots) {
        throw CapacityError(std::to_string(num_qubits) + " qubits exceed " + std::to_string(slots) +
                            " computation slots (" + std::to_string(topology.core_count()) + " cores x " +
                            std::to_string(n_per_core) + ")");
    }
    std::vector<CoreId> cores;
    cores.reserve(num_qubits);
    for (std::uint32_t q = 0; q < num_qubits; ++q) cores.emplace_back(q / n_per_core);
    return PlacementMap(topology.core_count(), n_per_core, std::move(cores));
}

}  // namespace qnoc
