#include <gtest/gtest.h>

#include <cmath>

#include "obox/errors.hpp"
#include "obox/pipeline.hpp"
#include "obox/rng.hpp"
#include "obox/roi.hpp"

using namespace obox;

namespace {

double deg(double d) { return d * kPi / 180.0; }

BinaryRegion ellipse(double cr, double cc, double a, double b, double phi) {
    const Point2 u = major_axis(phi), v = minor_axis(phi);
    return BinaryRegion::from_predicate(256, 256, [&](int r, int c) {
        const double x = ((r - cr) * u.r + (c - cc) * u.c) / a;
        const double y = ((r - cr) * v.r + (c - cc) * v.c) / b;
        return x * x + y * y <= 1.0;
    });
}

}  // namespace

TEST(GridCellCenter, AxisAlignedBox) {
    const OrientedBox box{10, 20, 4, 2, 0};
    const Point2 p = grid_cell_center(box, 2, 4, 0, 0);
    EXPECT_NEAR(p.c, 17, 1e-12);
    EXPECT_NEAR(p.r, 9, 1e-12);
    const Point2 q = grid_cell_center(box, 2, 4, 1, 3);
    EXPECT_NEAR(q.c, 23, 1e-12);
    EXPECT_NEAR(q.r, 11, 1e-12);
}

TEST(GridCellCenter, FollowsBoxAxes) {
    const OrientedBox box{50, 50, 10, 4, deg(90)};
    // phi = 90 degrees: the l1-axis points up the image (decreasing rows).
    const Point2 first = grid_cell_center(box, 1, 10, 0, 0);
    const Point2 last = grid_cell_center(box, 1, 10, 0, 9);
    EXPECT_GT(first.r, last.r);
    EXPECT_NEAR(first.c, last.c, 1e-12);
}

TEST(RoiPool, ExactOnLinearField) {
    FeatureMap fm(2, 64, 64);
    for (int r = 0; r < 64; ++r) {
        for (int c = 0; c < 64; ++c) {
            fm.at(0, r, c) = 2.0 * r - 0.5 * c + 3.0;
            fm.at(1, r, c) = c;
        }
    }
    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
        const OrientedBox box{rng.uniform(25, 38), rng.uniform(25, 38), rng.uniform(2, 15), rng.uniform(2, 15),
                              rng.uniform(-kPi, kPi)};
        const FeatureMap out = roi_pool(fm, box, 7, 9);
        ASSERT_EQ(out.channels, 2);
        for (int i = 0; i < 7; ++i) {
            for (int j = 0; j < 9; ++j) {
                const Point2 p = grid_cell_center(box, 7, 9, i, j);
                EXPECT_NEAR(out.at(0, i, j), 2.0 * p.r - 0.5 * p.c + 3.0, 1e-9);
                EXPECT_NEAR(out.at(1, i, j), p.c, 1e-9);
            }
        }
    }
}

TEST(RoiPool, ZeroPadding) {
    FeatureMap fm(1, 4, 4, 1.0);
    EXPECT_NEAR(fm.sample(0, -0.5, 1.0), 0.5, 1e-12);
    EXPECT_EQ(fm.sample(0, -2, -2), 0.0);
    const FeatureMap out = roi_pool(fm, {100, 100, 2, 2, 0}, 2, 2);
    for (double v : out.data) EXPECT_EQ(v, 0.0);
}

TEST(RoiPool, InvalidArguments) {
    FeatureMap fm(1, 4, 4);
    EXPECT_THROW(roi_pool(fm, {1, 1, 0, 1, 0}, 2, 2), DomainError);
    EXPECT_THROW(roi_pool(fm, {1, 1, 1, 1, 0}, 0, 2), ConfigError);
}

TEST(PoolMaskTarget, OverloadsAgree) {
    const BinaryRegion m = ellipse(60, 70, 30, 12, deg(25));
    const BinaryRegion other = ellipse(150, 150, 20, 20, 0);
    const std::vector<BinaryRegion> masks{other, m};
    const FeatureMap painted = paint_masks(masks, 256, 256);
    const OrientedBox box = smallest_obb(m, true);
    const MaskGrid a = pool_mask_target(painted, 1, box);
    const MaskGrid b = pool_mask_target(m, box);
    ASSERT_EQ(a.size, kMaskTargetSize);
    for (std::size_t k = 0; k < a.values.size(); ++k) EXPECT_NEAR(a.values[k], b.values[k], 1e-12);
    EXPECT_THROW(pool_mask_target(painted, 2, box), IndexError);
    EXPECT_THROW(pool_mask_target(painted, -1, box), IndexError);
}

TEST(PoolMaskTarget, FullBoxIsOne) {
    const BinaryRegion m = BinaryRegion::rasterize({50, 50, 20, 10, deg(30)});
    const MaskGrid g = pool_mask_target(m, {50, 50, 15, 6, deg(30)});
    for (double v : g.values) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(DecodeMask, FullGridFillsBox) {
    const OrientedBox box{40, 40, 12, 5, deg(-20)};
    const BinaryRegion r = decode_mask(MaskGrid(kMaskTargetSize, 1.0), box, 100, 100);
    EXPECT_EQ(r, BinaryRegion::rasterize(box, 100, 100));
    EXPECT_TRUE(decode_mask(MaskGrid(kMaskTargetSize, 0.0), box, 100, 100).empty());
}

TEST(DecodeMask, ClipsToImage) {
    const OrientedBox box{2, 2, 10, 10, 0};
    const BinaryRegion r = decode_mask(MaskGrid(4, 1.0), box, 5, 6);
    EXPECT_EQ(r.area(), 30);
}

TEST(DecodeMask, InvalidThreshold) {
    EXPECT_THROW(decode_mask(MaskGrid(4, 1.0), {5, 5, 2, 2, 0}, 10, 10, 1.0), ConfigError);
    EXPECT_THROW(decode_mask(MaskGrid(4, 1.0), {5, 5, 2, 2, 0}, 10, 10, 0.0), ConfigError);
}

TEST(MaskRoundTrip, EllipsesOverOrientedBoxes) {
    const auto regions = random_ellipses(40, 5);
    const RoundtripStats s = mask_roundtrip(regions, BoxKind::Oriented);
    EXPECT_GE(s.min, 0.93);
}

TEST(MaskRoundTrip, SingleEllipse) {
    const BinaryRegion m = ellipse(128, 128, 50, 14, deg(33));
    const OrientedBox box = smallest_obb(m, true);
    const BinaryRegion back = decode_mask(pool_mask_target(m, box), box, 256, 256);
    EXPECT_GE(mask_iou(m, back), 0.93);
}

TEST(RouteLevel, CanonicalSizes) {
    const RoiRouting r;
    EXPECT_EQ(route_level({0, 0, 112, 112, 0}, r), 5);
    EXPECT_EQ(route_level({0, 0, 56, 56, 0}, r), 4);
    EXPECT_EQ(route_level({0, 0, 28, 28, 0}, r), 3);
    EXPECT_EQ(route_level({0, 0, 4, 4, 0}, r), 3);
    EXPECT_EQ(route_level({0, 0, 1000, 1000, 0}, r), 5);
    EXPECT_THROW(route_level({0, 0, 4, 4, 0}, {5, 3, 224, 5}), ConfigError);
}

TEST(MaskGrid, Mean) {
    MaskGrid g(2);
    g.at(0, 0) = 1.0;
    g.at(1, 1) = 0.5;
    EXPECT_DOUBLE_EQ(g.mean(), 0.375);
}
