#include "hsr/errors.hpp"
#include "hsr/patching.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace hsr;
using namespace hsr::test;

namespace {

// Every pixel in exactly one block; offsets contiguous.
void expect_partition(const PatchLayout& layout) {
    std::vector<int> hits(static_cast<std::size_t>(layout.pixels()), 0);
    Index total = 0;
    for (Index i = 0; i < layout.patch_count(); ++i) {
        const Rect& b = layout.blocks()[static_cast<std::size_t>(i)];
        EXPECT_EQ(layout.offset(i), total);
        EXPECT_EQ(layout.size(i), static_cast<Index>(b.w) * b.h);
        total += layout.size(i);
        for (int r = b.y; r < b.y + b.h; ++r) {
            for (int c = b.x; c < b.x + b.w; ++c) {
                ++hits[static_cast<std::size_t>(r * layout.width() + c)];
            }
        }
    }
    EXPECT_EQ(total, layout.pixels());
    for (int h : hits) {
        EXPECT_EQ(h, 1);
    }
    const auto& fwd = layout.patch_index_of();
    const auto& inv = layout.raster_index_of();
    for (std::size_t k = 0; k < fwd.size(); ++k) {
        EXPECT_EQ(inv[static_cast<std::size_t>(fwd[k])], static_cast<Index>(k));
    }
}

} // namespace

TEST(GridLayout, EvenBlocks) {
    const auto layout = grid_layout(4, 4, 2, 2);
    ASSERT_EQ(layout.patch_count(), 4);
    for (Index i = 0; i < 4; ++i) {
        EXPECT_EQ(layout.size(i), 4);
    }
    EXPECT_EQ(layout.blocks()[1], (Rect{2, 0, 2, 2}));
    expect_partition(layout);
}

TEST(GridLayout, SinglePatchIsIdentity) {
    const auto layout = grid_layout(5, 3, 1, 1);
    ASSERT_EQ(layout.patch_count(), 1);
    for (Index k = 0; k < 15; ++k) {
        EXPECT_EQ(layout.patch_index_of()[static_cast<std::size_t>(k)], k);
    }
    const Matrix x = random_matrix(2, 15, 1);
    EXPECT_EQ(layout.to_patch_order(x), x);
}

TEST(GridLayout, UnevenBlocks) {
    const auto layout = grid_layout(5, 5, 2, 2);
    std::multiset<int> widths;
    for (const auto& b : layout.blocks()) {
        widths.insert(b.w);
    }
    EXPECT_EQ(widths, (std::multiset<int>{2, 2, 3, 3}));
    EXPECT_EQ(layout.blocks()[0], (Rect{0, 0, 2, 2}));
    EXPECT_EQ(layout.blocks()[3], (Rect{2, 2, 3, 3}));
    expect_partition(layout);
}

TEST(GridLayout, Errors) {
    EXPECT_THROW(grid_layout(4, 4, 0, 2), ConfigError);
    EXPECT_THROW(grid_layout(4, 4, 5, 1), ConfigError);
    EXPECT_THROW(grid_layout(4, 4, 1, 5), ConfigError);
}

TEST(PatchOrder, RegroupsColumnsByBlock) {
    // 2×2 image, two blocks stacked vertically: pixels {0,1} then {2,3}.
    const auto layout = grid_layout(2, 2, 2, 1);
    Matrix x(1, 4);
    x << 0, 1, 2, 3;
    EXPECT_EQ(layout.to_patch_order(x), x);
    // Side by side: block 0 = pixels {0,2}, block 1 = {1,3}.
    const auto side = grid_layout(2, 2, 1, 2);
    Matrix expected(1, 4);
    expected << 0, 2, 1, 3;
    EXPECT_EQ(side.to_patch_order(x), expected);
    EXPECT_EQ(side.from_patch_order(expected), x);
}

TEST(PatchOrder, RoundTripIsBitExact) {
    const auto layout = grid_layout(6, 6, 3, 3);
    const Matrix x = random_matrix(3, 36, 4);
    EXPECT_EQ(layout.from_patch_order(layout.to_patch_order(x)), x);
    EXPECT_THROW(layout.to_patch_order(Matrix::Zero(3, 35)), DimensionError);
    EXPECT_THROW(layout.from_patch_order(Matrix::Zero(3, 37)), DimensionError);
}

TEST(PatchLayout, RejectsNonPartitions) {
    EXPECT_THROW(PatchLayout(4, 4, {Rect{0, 0, 4, 2}}), ConfigError);
    EXPECT_THROW(PatchLayout(4, 4, {Rect{0, 0, 4, 3}, Rect{0, 2, 4, 2}}), ConfigError);
    EXPECT_THROW(PatchLayout(4, 4, {Rect{0, 0, 4, 4}, Rect{4, 0, 1, 1}}), ConfigError);
    EXPECT_THROW(PatchLayout(4, 4, {}), ConfigError);
}

TEST(PatchLayout, JsonRoundTrip) {
    const auto layout = random_rect_layout(20, 16, 6, 3);
    const auto j = layout.to_json();
    EXPECT_EQ(j.at("width"), 20);
    EXPECT_EQ(j.at("blocks").size(), 6u);
    EXPECT_EQ(PatchLayout::from_json(j), layout);
    EXPECT_THROW(PatchLayout::from_json(nlohmann::json{{"width", 2}}), ConfigError);
}

TEST(RandomRectLayout, WholeImageForOnePatch) {
    const auto layout = random_rect_layout(7, 5, 1, 9);
    ASSERT_EQ(layout.patch_count(), 1);
    EXPECT_EQ(layout.blocks()[0], (Rect{0, 0, 7, 5}));
}

TEST(RandomRectLayout, SeedsGiveDifferentValidPartitions) {
    const auto a = random_rect_layout(8, 8, 4, 1);
    expect_partition(a);
    bool differs = false;
    for (std::uint64_t seed = 2; seed < 12 && !differs; ++seed) {
        const auto b = random_rect_layout(8, 8, 4, seed);
        expect_partition(b);
        differs = !(a == b);
    }
    EXPECT_TRUE(differs);
    EXPECT_EQ(random_rect_layout(8, 8, 4, 1), a);
}

TEST(RandomRectLayout, LargeLayout) {
    const auto layout = random_rect_layout(120, 120, 64, 5);
    EXPECT_EQ(layout.patch_count(), 64);
    EXPECT_EQ(layout.pixels(), 14400);
    expect_partition(layout);
    for (const auto& b : layout.blocks()) {
        EXPECT_GE(b.w, 2);
        EXPECT_GE(b.h, 2);
    }
}

TEST(RandomRectLayout, PartitionPropertyOverSeeds) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        for (int p : {2, 3, 6, 9, 16}) {
            expect_partition(random_rect_layout(24, 18, p, seed));
        }
    }
}

TEST(RandomRectLayout, Infeasible) {
    // 7 is prime and 7 blocks of ≥ 2 pixels do not fit in either direction of a 6×6 image.
    EXPECT_THROW(random_rect_layout(6, 6, 7, 0), ConfigError);
    EXPECT_THROW(random_rect_layout(6, 6, 0, 0), ConfigError);
}
