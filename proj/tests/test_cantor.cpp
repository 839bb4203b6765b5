#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

#include "acov/cantor.hpp"

using namespace acov;

TEST(Cantor, SmallBIsDegenerate)
{
    const CantorStructure c = build_cantor(8);
    EXPECT_NEAR(c.delta, 1.0 / 6.0, 1e-15);
    EXPECT_TRUE(c.degenerate);
    EXPECT_EQ(c.ell, 0);
    std::vector<std::int64_t> all(8);
    std::iota(all.begin(), all.end(), 1);
    EXPECT_EQ(c.k_b, all);
    EXPECT_FALSE(verify_cantor_properties(c).applicable);
    EXPECT_FALSE(verify_cantor_properties(c).all());
}

TEST(Cantor, HundredExample)
{
    const CantorStructure c = build_cantor(100);
    EXPECT_NEAR(c.delta, 0.07525, 1e-5);
    EXPECT_FALSE(c.degenerate);
    EXPECT_EQ(c.ell, 1);
    EXPECT_EQ(c.n_levels, (std::vector<std::int64_t>{100, 47}));
    EXPECT_EQ(c.d_levels, (std::vector<std::int64_t>{6}));
    ASSERT_EQ(c.intervals[1].size(), 2u);
    EXPECT_EQ(c.intervals[1][0], (IndexRange{1, 47}));
    EXPECT_EQ(c.intervals[1][1], (IndexRange{54, 100}));
    EXPECT_EQ(c.gaps[0][0], (IndexRange{48, 53}));
    EXPECT_EQ(c.k_b.size(), 94u);
    const CantorReport rep = verify_cantor_properties(c);
    EXPECT_TRUE(rep.applicable);
    for (int i = 0; i < 6; ++i) EXPECT_TRUE(rep.prop[i]) << "property " << i + 1;
}

TEST(Cantor, RejectsTinyB)
{
    EXPECT_THROW(build_cantor(1), InputError);
    EXPECT_THROW(build_cantor(-4), InputError);
    EXPECT_NO_THROW(build_cantor(2));
}

TEST(Cantor, Deterministic)
{
    for (std::int64_t b : {100, 777, 4096}) EXPECT_EQ(build_cantor(b), build_cantor(b));
}

TEST(Cantor, LevelRecursion)
{
    for (std::int64_t b = 2; b <= 5000; b += 37) {
        const CantorStructure c = build_cantor(b);
        if (c.degenerate) continue;
        for (int j = 1; j <= c.ell; ++j) {
            EXPECT_EQ(c.n_levels[j], static_cast<std::int64_t>(std::ceil(b * std::pow(1 - c.delta, j) / std::pow(2, j))));
            EXPECT_EQ(c.d_levels[j - 1], c.n_levels[j - 1] - 2 * c.n_levels[j]);
        }
        EXPECT_EQ(c.k_b.size(), (std::size_t{1} << c.ell) * static_cast<std::size_t>(c.n_levels.back()));
    }
}

TEST(Cantor, ExhaustiveProperties)
{
    const auto start = std::chrono::steady_clock::now();
    int nondegenerate = 0;
    for (std::int64_t b = 2; b <= 5000; ++b) {
        const CantorStructure c = build_cantor(b);
        if (c.degenerate) {
            EXPECT_EQ(c.ell, 0);
            continue;
        }
        ++nondegenerate;
        const CantorReport rep = verify_cantor_properties(c);
        ASSERT_TRUE(rep.applicable) << "B=" << b;
        for (int i = 0; i < 6; ++i) EXPECT_TRUE(rep.prop[i]) << "B=" << b << " property " << i + 1;
    }
    EXPECT_GT(nondegenerate, 4000);
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 10.0);
}

TEST(Cantor, TamperedIntervalFailsSpacing)
{
    CantorStructure c = build_cantor(1000);
    ASSERT_TRUE(verify_cantor_properties(c).all());
    auto& leaves = c.intervals[c.ell];
    leaves[1].first += 1;
    leaves[1].last += 1;
    EXPECT_FALSE(verify_cantor_properties(c).prop[2]);
}

TEST(Cantor, TamperedLevelFailsCount)
{
    CantorStructure c = build_cantor(1000);
    c.intervals[c.ell][0].last -= 1;
    const CantorReport rep = verify_cantor_properties(c);
    EXPECT_FALSE(rep.prop[2]);
    EXPECT_FALSE(rep.all());
}

TEST(Cantor, SubBlocksPartitionKB)
{
    for (std::int64_t b : {100, 513, 2048, 5000}) {
        const CantorStructure c = build_cantor(b);
        for (int k = 0; k <= c.ell; ++k) {
            std::vector<std::int64_t> joined;
            std::set<std::int64_t> seen;
            for (std::int64_t j = 1; j <= (std::int64_t{1} << k); ++j) {
                for (std::int64_t v : c.k_block(k, j)) {
                    EXPECT_TRUE(seen.insert(v).second);
                    joined.push_back(v);
                }
            }
            EXPECT_EQ(joined, c.k_b) << "B=" << b << " k=" << k;
        }
        EXPECT_THROW(c.k_block(c.ell + 1, 1), InputError);
        EXPECT_THROW(c.k_block(0, 2), InputError);
    }
}
