#include "qnoc/placement.hpp"
#include "qnoc/rng.hpp"

#include <gtest/gtest.h>

using namespace qnoc;

TEST(PlacementTest, IdentityMappingWithOneQubitPerCore) {
    const MeshTopology m(4, 4);
    const auto p = initial_mapping(16, m, 1);
    for (std::uint32_t q = 0; q < 16; ++q) EXPECT_EQ(p.core_of(QubitId{q}), CoreId(q));
    EXPECT_EQ(p.max_load_seen(), 1u);
}

TEST(PlacementTest, BlockMappingTwoPerCore) {
    const MeshTopology m(4, 4);
    const auto p = initial_mapping(32, m, 2);
    EXPECT_EQ(p.core_of(QubitId{0}), CoreId(0));
    EXPECT_EQ(p.core_of(QubitId{1}), CoreId(0));
    EXPECT_EQ(p.core_of(QubitId{30}), CoreId(15));
    EXPECT_EQ(p.core_of(QubitId{31}), CoreId(15));
    for (std::uint32_t c = 0; c < 16; ++c) EXPECT_EQ(p.load(CoreId(c)), 2u);
}

TEST(PlacementTest, CapacityError) {
    const MeshTopology m(4, 4);
    EXPECT_THROW(initial_mapping(17, m, 1), CapacityError);
    EXPECT_NO_THROW(initial_mapping(5, m, 1));
}

TEST(PlacementTest, RelocateToCurrentCoreIsNoOp) {
    const MeshTopology m(4, 4);
    auto p = initial_mapping(16, m, 1);
    const auto before = p;
    const auto r = p.relocate(QubitId{3}, CoreId(3));
    EXPECT_FALSE(r.congested);
    EXPECT_EQ(p, before);
}

TEST(PlacementTest, RelocateIntoFullCoreFlagsCongestion) {
    const MeshTopology m(4, 4);
    auto p = initial_mapping(16, m, 1);
    const auto r = p.relocate(QubitId{0}, CoreId(1));
    EXPECT_TRUE(r.congested);
    EXPECT_EQ(r.from, CoreId(0));
    EXPECT_EQ(p.load(CoreId(1)), 2u);
    EXPECT_EQ(p.load(CoreId(0)), 0u);
    EXPECT_EQ(p.max_load_seen(), 2u);
    EXPECT_THROW(p.relocate(QubitId{0}, CoreId(16)), BoundsError);
    EXPECT_THROW(p.relocate(QubitId{16}, CoreId(0)), BoundsError);
}

TEST(PlacementTest, FoldAlongRoute) {
    const MeshTopology m(4, 4);
    auto p = initial_mapping(16, m, 1);
    for (CoreId c : m.xy_route(CoreId(0), CoreId(15))) p.relocate(QubitId{0}, c);
    EXPECT_EQ(p.core_of(QubitId{0}), CoreId(15));
    EXPECT_EQ(p.load(CoreId(15)), 2u);
}

TEST(PlacementTest, ConservationAndReplayDeterminism) {
    const MeshTopology m(4, 3);
    RandomStream rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = initial_mapping(20, m, 2);
        std::vector<std::pair<QubitId, CoreId>> log;
        for (int i = 0; i < 100; ++i) {
            const QubitId q{static_cast<std::uint32_t>(rng.uniform_index(20))};
            const CoreId c(static_cast<std::uint32_t>(rng.uniform_index(m.core_count())));
            p.relocate(q, c);
            log.emplace_back(q, c);
            ASSERT_EQ(p.total_load(), 20u);
        }
        auto replay = initial_mapping(20, m, 2);
        for (auto [q, c] : log) replay.relocate(q, c);
        EXPECT_EQ(replay, p);

        std::vector<std::uint32_t> counted(m.core_count(), 0);
        for (CoreId c : p.assignment()) ++counted[c.index];
        for (std::uint32_t c = 0; c < m.core_count(); ++c) EXPECT_EQ(counted[c], p.load(CoreId(c)));
    }
}
