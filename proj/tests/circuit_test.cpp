#include "qnoc/circuit.hpp"
#include "qnoc/rng.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace qnoc;

namespace {

Circuit random_circuit(RandomStream& rng, std::uint32_t n, std::size_t gates) {
    Circuit c(n);
    for (std::size_t i = 0; i < gates; ++i) {
        const auto a = static_cast<std::uint32_t>(rng.uniform_index(n));
        switch (n > 1 ? rng.uniform_index(3) : 0) {
            case 0: c.one_qubit(a); break;
            case 1: c.teleport(QubitId{a}); break;
            default: {
                auto b = static_cast<std::uint32_t>(rng.uniform_index(n - 1));
                if (b >= a) ++b;
                c.two_qubit(a, b);
            }
        }
    }
    return c;
}

}  // namespace

TEST(CircuitTest, LayerizeDisjointAndShared) {
    Circuit disjoint(4);
    disjoint.two_qubit(0, 1);
    disjoint.two_qubit(2, 3);
    EXPECT_EQ(layerize(disjoint).size(), 1u);

    Circuit chained(3);
    chained.two_qubit(0, 1);
    chained.two_qubit(1, 2);
    const auto layers = layerize(chained);
    ASSERT_EQ(layers.size(), 2u);
    EXPECT_EQ(layers[0], Layer{0});
    EXPECT_EQ(layers[1], Layer{1});

    EXPECT_TRUE(layerize(Circuit(3)).empty());
    EXPECT_EQ(depth(Circuit(3)), 0u);
}

TEST(CircuitTest, DepthOfSerialChain) {
    Circuit single(2);
    single.two_qubit(0, 1);
    EXPECT_EQ(depth(single), 1u);

    for (std::uint32_t k = 1; k <= 12; ++k) {
        Circuit c(3);
        for (std::uint32_t i = 0; i < k; ++i) {
            if (i % 2) {
                c.one_qubit(0);
            } else {
                c.two_qubit(0, 1 + (i / 2) % 2);
            }
        }
        EXPECT_EQ(depth(c), k);
    }
}

TEST(CircuitTest, RejectsBadGates) {
    Circuit c(2);
    EXPECT_THROW(c.two_qubit(0, 2), ValidationError);
    EXPECT_THROW(c.two_qubit(1, 1), ValidationError);
    EXPECT_THROW(c.one_qubit(5), ValidationError);
    EXPECT_THROW(Circuit(2, {Gate{3, GateKind::one_qubit, {}}, Gate{3, GateKind::one_qubit, {}}}),
                 ValidationError);
}

TEST(CircuitTest, ParseMinimalDocument) {
    const Circuit c = parse_circuit("qubits 2\ncx 0 1");
    Circuit expected(2);
    expected.two_qubit(0, 1);
    EXPECT_EQ(c, expected);
}

TEST(CircuitTest, ParseCommentsBlankLinesAndAllDirectives) {
    const Circuit c = parse_circuit("# header\n\nqubits 3   # three\n  h 0\nu 1\n\tcx 2 0\ntp 1\n");
    ASSERT_EQ(c.size(), 4u);
    EXPECT_EQ(c.gates()[0].kind, GateKind::one_qubit);
    EXPECT_EQ(c.gates()[1].kind, GateKind::one_qubit);
    EXPECT_EQ(c.gates()[2].kind, GateKind::two_qubit);
    EXPECT_EQ(c.gates()[2].operands[0], QubitId{2});
    EXPECT_EQ(c.gates()[3].kind, GateKind::teleport);
    EXPECT_EQ(c.gates()[3].id, 3u);
}

TEST(CircuitTest, ParseErrorsCarryLineNumbers) {
    EXPECT_THROW(parse_circuit("qubits 2\ncx 0 2"), ValidationError);
    try {
        parse_circuit("qubits 2\n\ncx 0\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    try {
        parse_circuit("qubits 2\nh 0\nswap 0 1\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(parse_circuit("cx 0 1\n"), ParseError);
    EXPECT_THROW(parse_circuit(""), ParseError);
    EXPECT_THROW(parse_circuit("qubits 2\nqubits 3\n"), ParseError);
    EXPECT_THROW(parse_circuit("qubits 2\ncx 0 -1\n"), ParseError);
    EXPECT_THROW(parse_circuit("qubits 0\n"), ParseError);
}

TEST(CircuitTest, RandomCircuitsRoundTripAndLayerProperties) {
    RandomStream rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<std::uint32_t>(1 + rng.uniform_index(8));
        const Circuit c = random_circuit(rng, n, rng.uniform_index(50));

        EXPECT_EQ(parse_circuit(serialize_circuit(c)), c);

        const auto layers = layerize(c);
        std::map<std::uint64_t, std::size_t> layer_of;
        std::size_t total = 0;
        for (std::size_t l = 0; l < layers.size(); ++l) {
            std::vector<bool> used(n, false);
            for (auto id : layers[l]) {
                layer_of[id] = l;
                ++total;
                for (auto q : c.gates()[id].qubits()) {
                    ASSERT_FALSE(used[q.index]) << "layer " << l << " reuses qubit " << q.index;
                    used[q.index] = true;
                }
            }
        }
        ASSERT_EQ(total, c.size());
        // Per-qubit program order is kept.
        std::vector<std::optional<std::uint64_t>> last(n);
        for (const auto& g : c.gates()) {
            for (auto q : g.qubits()) {
                if (last[q.index]) {
                    ASSERT_LT(layer_of[*last[q.index]], layer_of[g.id]);
                }
                last[q.index] = g.id;
            }
        }
        ASSERT_EQ(depth(c), oracle::longest_path_depth(c));
    }
}
