#include "dgsim/errors.hpp"
#include "dgsim/placement.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace dgsim;

TEST(Placement, OwnersAreDistinctAndSized) {
    HashRing ring(5, 3);
    for (Key k = 0; k < 2000; ++k) {
        auto o = ring.owners(k);
        ASSERT_EQ(o.size(), 3u);
        std::set<ServerId> s(o.owners().begin(), o.owners().end());
        EXPECT_EQ(s.size(), 3u);
        EXPECT_EQ(ring.is_primary(o.primary(), k), true);
    }
}

TEST(Placement, SingleServerOwnsEverything) {
    HashRing ring(1, 1);
    for (Key k = 0; k < 100; ++k) EXPECT_EQ(ring.owners(k).primary(), 0u);
}

TEST(Placement, FullReplicationListsEveryServer) {
    HashRing ring(3, 3);
    auto o = ring.owners(17);
    std::vector<ServerId> v(o.owners().begin(), o.owners().end());
    std::sort(v.begin(), v.end());
    EXPECT_EQ(v, (std::vector<ServerId>{0, 1, 2}));
}

TEST(Placement, ReplicationAboveServerCountIsRejected) {
    EXPECT_THROW(HashRing(2, 3), ConfigError);
    EXPECT_THROW(HashRing(2, 0), ConfigError);
}

TEST(Placement, DeterministicAcrossInstances) {
    HashRing a(8, 2), b(8, 2);
    for (Key k = 0; k < 500; ++k)
        EXPECT_TRUE(std::ranges::equal(a.owners(k).owners(), b.owners(k).owners()));
}

TEST(Placement, DirectoryAgreesWithRing) {
    HashRing ring(6, 2);
    OwnerDirectory dir(ring, 3000);
    std::uint64_t total = 0;
    for (ServerId s = 0; s < 6; ++s) total += dir.copies(s);
    EXPECT_EQ(total, 6000u);
    for (Key k = 0; k < 3000; ++k) {
        EXPECT_TRUE(std::ranges::equal(dir.owners(k), ring.owners(k).owners()));
        EXPECT_EQ(dir.primary(k), ring.owners(k).primary());
    }
}

TEST(Placement, PrimariesAreRoughlyBalanced) {
    const std::uint32_t n = 8;
    HashRing ring(n, 1);
    std::vector<double> count(n, 0.0);
    const Key keys = 200000;
    for (Key k = 0; k < keys; ++k) count[ring.owners(k).primary()] += 1.0;
    for (double c : count) EXPECT_NEAR(c / keys, 1.0 / n, 0.5 / n);
}

TEST(Placement, RemovingAServerOnlyMovesItsKeys) {
    HashRing full(6, 1);
    HashRing reduced(std::vector<ServerId>{0, 1, 2, 4, 5}, 1);
    for (Key k = 0; k < 20000; ++k) {
        ServerId before = full.owners(k).primary();
        if (before != 3) EXPECT_EQ(reduced.owners(k).primary(), before) << "key " << k;
        else EXPECT_NE(reduced.owners(k).primary(), 3u);
    }
}
