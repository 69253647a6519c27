#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qnoc/errors.hpp"

namespace qnoc {

struct QubitId {
    std::uint32_t index = 0;

    constexpr QubitId() = default;
    constexpr explicit QubitId(std::uint32_t i) : index(i) {}

    friend constexpr auto operator<=>(QubitId, QubitId) = default;
    friend std::ostream& operator<<(std::ostream& os, QubitId q) { return os << 'q' << q.index; }
};

// Only arity matters to the simulator; which unitary a gate applies is not
// modelled. `teleport` marks one hop of a data qubit in an expanded circuit.
enum class GateKind : std::uint8_t { one_qubit, two_qubit, teleport };

struct Gate {
    std::uint64_t id = 0;
    GateKind kind = GateKind::one_qubit;
    std::array<QubitId, 2> operands{};

    std::size_t arity() const noexcept { return kind == GateKind::two_qubit ? 2 : 1; }
    std::span<const QubitId> qubits() const noexcept { return {operands.data(), arity()}; }

    friend bool operator==(const Gate& a, const Gate& b) {
        return a.id == b.id && a.kind == b.kind && std::ranges::equal(a.qubits(), b.qubits());
    }
};

class Circuit {
public:
    Circuit() = default;
    explicit Circuit(std::uint32_t num_qubits) : num_qubits_(num_qubits) {}

    // Validates operands and id ordering.
    Circuit(std::uint32_t num_qubits, std::vector<Gate> gates) : num_qubits_(num_qubits) {
        for (Gate& g : gates) append(g);
    }

    std::uint32_t num_qubits() const noexcept { return num_qubits_; }
    const std::vector<Gate>& gates() const noexcept { return gates_; }
    std::size_t size() const noexcept { return gates_.size(); }
    bool empty() const noexcept { return gates_.empty(); }

    std::uint64_t next_id() const noexcept { return gates_.empty() ? 0 : gates_.back().id + 1; }

    const Gate& one_qubit(QubitId q) { return append({next_id(), GateKind::one_qubit, {q, QubitId{}}}); }
    const Gate& two_qubit(QubitId a, QubitId b) { return append({next_id(), GateKind::two_qubit, {a, b}}); }
    const Gate& teleport(QubitId q) { return append({next_id(), GateKind::teleport, {q, QubitId{}}}); }

    const Gate& one_qubit(std::uint32_t q) { return one_qubit(QubitId{q}); }
    const Gate& two_qubit(std::uint32_t a, std::uint32_t b) { return two_qubit(QubitId{a}, QubitId{b}); }

    const Gate& append(Gate g) {
        if (!gates_.empty() && g.id <= gates_.back().id) {
            throw ValidationError("gate ids must be strictly increasing (gate " + std::to_string(g.id) + ")");
        }
        if (g.kind != GateKind::two_qubit) g.operands[1] = QubitId{};
        for (QubitId q : g.qubits()) {
            if (q.index >= num_qubits_) {
                throw ValidationError("gate " + std::to_string(g.id) + " operand " + std::to_string(q.index) +
                                      " out of range for " + std::to_string(num_qubits_) + " qubits");
            }
        }
        if (g.kind == GateKind::two_qubit && g.operands[0] == g.operands[1]) {
            throw ValidationError("gate " + std::to_string(g.id) + " repeats operand " +
                                  std::to_string(g.operands[0].index));
        }
        gates_.push_back(g);
        return gates_.back();
    }

    std::size_t count(GateKind kind) const {
        return static_cast<std::size_t>(std::ranges::count(gates_, kind, &Gate::kind));
    }

    friend bool operator==(const Circuit&, const Circuit&) = default;

private:
    std::uint32_t num_qubits_ = 0;
    std::vector<Gate> gates_;
};

// Gate ids that can run simultaneously.
using Layer = std::vector<std::uint64_t>;

/// ASAP layering: each gate goes one layer past the latest earlier gate that
/// shares an operand. Also returns, per gate position, its 0-based layer.
inline std::vector<std::size_t> layer_of_gates(const Circuit& circuit) {
    std::vector<std::size_t> frontier(circuit.num_qubits(), 0);  // next free layer per qubit
    std::vector<std::size_t> layer_of;
    layer_of.reserve(circuit.size());
    for (const Gate& g : circuit.gates()) {
        std::size_t layer = 0;
        for (QubitId q : g.qubits()) layer = std::max(layer, frontier[q.index]);
        for (QubitId q : g.qubits()) frontier[q.index] = layer + 1;
        layer_of.push_back(layer);
    }
    return layer_of;
}

inline std::vector<Layer> layerize(const Circuit& circuit) {
    const auto layer_of = layer_of_gates(circuit);
    std::vector<Layer> layers;
    for (std::size_t i = 0; i < layer_of.size(); ++i) {
        if (layer_of[i] >= layers.size()) layers.resize(layer_of[i] + 1);
        layers[layer_of[i]].push_back(circuit.gates()[i].id);
    }
    return layers;
}

inline std::size_t depth(const Circuit& circuit) {
    const auto layer_of = layer_of_gates(circuit);
    return layer_of.empty() ? 0 : *std::ranges::max_element(layer_of) + 1;
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

inline std::uint32_t parse_index(std::string_view tok, std::size_t line_no) {
    std::uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw ParseError(line_no, "expected a non-negative integer, got '" + std::string(tok) + "'");
    }
    return v;
}

inline void parse_gate_line(Circuit& circuit, const std::vector<std::string_view>& tok, std::size_t line_no) {
    auto expect_args = [&](std::size_t n) {
        if (tok.size() != n + 1) {
            throw ParseError(line_no, "'" + std::string(tok[0]) + "' takes " + std::to_string(n) +
                                          " operand(s), got " + std::to_string(tok.size() - 1));
        }
    };
    if (tok[0] == "h" || tok[0] == "u") {
        expect_args(1);
        circuit.one_qubit(QubitId{detail::parse_index(tok[1], line_no)});
    } else if (tok[0] == "tp") {
        expect_args(1);
        circuit.teleport(QubitId{detail::parse_index(tok[1], line_no)});
    } else if (tok[0] == "cx") {
        expect_args(2);
        circuit.two_qubit(QubitId{detail::parse_index(tok[1], line_no)},
                          QubitId{detail::parse_index(tok[2], line_no)});
    } else {
        throw ParseError(line_no, "unknown directive '" + std::string(tok[0]) + "'");
    }
}

}  // namespace detail

/**
 * Parses the gate-list text format:
 *
 *     # comment
 *     qubits 4
 *     h 0
 *     u 1
 *     cx 0 3
 *     tp 2        (teleport marker, emitted in expanded circuits)
 *
 * Gate ids are assigned in file order starting at 0. Malformed lines raise
 * ParseError; out-of-range operands raise ValidationError.
 */
inline Circuit parse_circuit(std::string_view text) {
    std::optional<Circuit> circuit;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tok = detail::split_ws(line);
        if (tok.empty()) continue;

        if (tok[0] == "qubits") {
            if (circuit) throw ParseError(line_no, "duplicate 'qubits' header");
            if (tok.size() != 2) throw ParseError(line_no, "'qubits' takes 1 operand");
            const auto n = detail::parse_index(tok[1], line_no);
            if (n == 0) throw ParseError(line_no, "qubit count must be positive");
            circuit.emplace(n);
            continue;
        }
        if (!circuit) throw ParseError(line_no, "gate before 'qubits' header");
        try {
            detail::parse_gate_line(*circuit, tok, line_no);
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!circuit) throw ParseError(line_no, "missing 'qubits' header");
    return std::move(*circuit);
}

// Inverse of parse_circuit for circuits whose ids are 0..n-1.
inline std::string serialize_circuit(const Circuit& circuit) {
    std::ostringstream os;
    os << "qubits " << circuit.num_qubits() << '\n';
    for (const Gate& g : circuit.gates()) {
        switch (g.kind) {
            case GateKind::one_qubit: os << "u " << g.operands[0].index << '\n'; break;
            case GateKind::teleport: os << "tp " << g.operands[0].index << '\n'; break;
            case GateKind::two_qubit:
                os << "cx " << g.operands[0].index << ' ' << g.operands[1].index << '\n';
                break;
        }
    }
    return os.str();
}

}  // namespace qnoc
