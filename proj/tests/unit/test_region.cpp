#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "obox/errors.hpp"
#include "obox/region.hpp"
#include "obox/rng.hpp"
#include "obox/synth.hpp"
#include "oracles.hpp"

using namespace obox;

namespace {

double deg(double d) { return d * kPi / 180.0; }

// Angular distance modulo pi.
double axis_error(double a, double b) { return std::abs(normalize_angle(a - b, true)); }

std::set<std::pair<int, int>> pixels(const BinaryRegion& r) {
    std::set<std::pair<int, int>> s;
    for (const auto& run : r.runs()) {
        for (int c = run.col_begin; c < run.col_end; ++c) s.insert({run.row, c});
    }
    return s;
}

BinaryRegion random_blob(Rng& rng, int h, int w) {
    return BinaryRegion::from_predicate(h, w, [&](int, int) { return rng.uniform() < 0.4; });
}

// Rectangle of the given side lengths rasterized at an angle.
BinaryRegion rotated_rect(double length, double width, double phi) {
    return BinaryRegion::rasterize({200, 200, length / 2, width / 2, phi});
}

}  // namespace

TEST(BinaryRegion, SortsAndMergesRuns) {
    BinaryRegion r({{1, 5, 8}, {0, 0, 2}, {1, 2, 6}, {1, 9, 9}});
    ASSERT_EQ(r.runs().size(), 2u);
    EXPECT_EQ(r.runs()[0], (obox::Run{0, 0, 2}));
    EXPECT_EQ(r.runs()[1], (obox::Run{1, 2, 8}));
    EXPECT_EQ(r.area(), 8);
    EXPECT_TRUE(r.contains(1, 7));
    EXPECT_FALSE(r.contains(1, 8));
}

TEST(BinaryRegion, AdjacentRunsMerge) {
    BinaryRegion r({{0, 0, 3}, {0, 3, 5}});
    ASSERT_EQ(r.runs().size(), 1u);
    EXPECT_EQ(r.runs()[0], (obox::Run{0, 0, 5}));
}

TEST(BinaryRegion, MaskRoundTrip) {
    Rng rng(1);
    const BinaryRegion r = random_blob(rng, 13, 17);
    const auto mask = r.to_mask(13, 17);
    EXPECT_EQ(BinaryRegion::from_mask(13, 17, mask), r);
}

TEST(BinaryRegion, SetOperationsMatchPixelSets) {
    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
        const BinaryRegion a = random_blob(rng, 20, 20), b = random_blob(rng, 20, 20);
        const auto pa = pixels(a), pb = pixels(b);
        std::set<std::pair<int, int>> inter, diff;
        for (const auto& p : pa) (pb.count(p) ? inter : diff).insert(p);
        EXPECT_EQ(pixels(a.intersect(b)), inter);
        EXPECT_EQ(pixels(a.subtract(b)), diff);
        EXPECT_EQ(intersection_area(a, b), static_cast<int64_t>(inter.size()));
        EXPECT_NEAR(mask_iou(a, b), oracle::pixel_iou(a, b), 1e-15);
    }
}

TEST(BinaryRegion, TranslateAndBounds) {
    const BinaryRegion r({{2, 3, 6}, {4, 1, 2}});
    const BinaryRegion t = r.translate(-2, 10);
    const AxisAlignedBox b = t.bounds();
    EXPECT_EQ(b.r_min, 0);
    EXPECT_EQ(b.r_max, 2);
    EXPECT_EQ(b.c_min, 11);
    EXPECT_EQ(b.c_max, 15);
    EXPECT_THROW(BinaryRegion().bounds(), DomainError);
}

TEST(BinaryRegion, MaskIouEmpty) {
    EXPECT_EQ(mask_iou(BinaryRegion(), BinaryRegion()), 0.0);
}

TEST(Rasterize, MatchesPointContainment) {
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        const OrientedBox b{rng.uniform(20, 40), rng.uniform(20, 40), rng.uniform(1, 15), rng.uniform(1, 15),
                            rng.uniform(-kPi, kPi)};
        const BinaryRegion r = BinaryRegion::rasterize(b);
        for (int i = 0; i < 60; ++i) {
            for (int j = 0; j < 60; ++j) {
                const bool in = contains(b, {static_cast<double>(i), static_cast<double>(j)}, 1e-9);
                const bool far_in = contains(b, {static_cast<double>(i), static_cast<double>(j)}, -1e-6);
                if (far_in) EXPECT_TRUE(r.contains(i, j)) << t;
                if (!in) EXPECT_FALSE(r.contains(i, j)) << t;
            }
        }
    }
}

TEST(Rasterize, ClipsToImage) {
    const BinaryRegion r = BinaryRegion::rasterize({0, 0, 5, 5, 0}, 3, 4);
    const AxisAlignedBox b = r.bounds();
    EXPECT_EQ(b.r_min, 0);
    EXPECT_EQ(b.r_max, 2);
    EXPECT_EQ(b.c_max, 3);
    EXPECT_EQ(r.area(), 12);
}

TEST(Moments, MatchNaiveSums) {
    Rng rng(4);
    for (int t = 0; t < 20; ++t) {
        const BinaryRegion r = random_blob(rng, 30, 40).translate(100, 1000);
        const Moments m = moments(r);
        const auto n = oracle::naive_moments(r);
        EXPECT_NEAR(m.r0, n.r0, 1e-9);
        EXPECT_NEAR(m.c0, n.c0, 1e-9);
        EXPECT_NEAR(m.m20, n.m20, 1e-6);
        EXPECT_NEAR(m.m02, n.m02, 1e-6);
        EXPECT_NEAR(m.m11, n.m11, 1e-6);
    }
}

TEST(Orientation, RotatedRectangles) {
    for (int k = 0; k < 180; ++k) {
        const double phi = deg(k - 89.5);
        const BinaryRegion r = rotated_rect(60, 20, phi);
        const OrientationResult o = orientation(r);
        EXPECT_FALSE(o.degenerate);
        EXPECT_LT(axis_error(o.phi, phi), deg(1)) << k;
        EXPECT_GT(o.phi, -kPi / 2);
        EXPECT_LE(o.phi, kPi / 2);
    }
}

TEST(Orientation, SinglePixelIsDegenerate) {
    const OrientationResult o = orientation(BinaryRegion({{3, 3, 4}}));
    EXPECT_TRUE(o.degenerate);
    EXPECT_EQ(o.phi, 0.0);
}

TEST(Orientation, HorizontalAndVerticalBars) {
    EXPECT_NEAR(orientation(make_rectangle(40, 5)).phi, 0.0, 1e-12);
    EXPECT_NEAR(orientation(make_rectangle(5, 40)).phi, kPi / 2, 1e-12);
}

TEST(FarthestPixel, TieBreaksToFirstPixel) {
    const BinaryRegion r = make_rectangle(5, 3);
    const Point2 p = farthest_pixel(r);
    EXPECT_EQ(p.r, 0);
    EXPECT_EQ(p.c, 0);
}

// With the (0, 0) corner as the tie-broken farthest pixel, phi = 0 points away
// from it and flips; phi = pi points toward it and stays.
TEST(CorrectDirection, SymmetricRectangle) {
    const BinaryRegion r = make_rectangle(20, 4);
    EXPECT_NEAR(correct_direction(r, 0.0), kPi, 1e-12);
    EXPECT_NEAR(correct_direction(r, kPi), kPi, 1e-12);
}

TEST(CorrectDirection, ScrewPointsHeadToTail) {
    const BinaryRegion screw = make_screw(60, 7, 8);
    EXPECT_NEAR(correct_direction(screw, kPi), 0.0, 1e-12);
    EXPECT_NEAR(correct_direction(screw, 0.0), 0.0, 1e-12);
    // Mirrored: head on the right.
    std::vector<obox::Run> runs;
    const AxisAlignedBox b = screw.bounds();
    for (const obox::Run& run : screw.runs()) {
        runs.push_back({run.row, static_cast<int>(b.c_max) - run.col_end + 1, static_cast<int>(b.c_max) - run.col_begin + 1});
    }
    const BinaryRegion mirrored(runs);
    EXPECT_NEAR(correct_direction(mirrored, 0.0), kPi, 1e-12);
}

TEST(CorrectDirection, RotatedScrews) {
    const BinaryRegion screw = make_screw(70, 8, 9);
    for (int k = 0; k < 36; ++k) {
        const double theta = deg(10 * k - 175);
        const BinaryRegion r = transform_region(screw, theta, 1.0);
        const double phi = correct_direction(r, orientation(r).phi);
        EXPECT_LT(std::abs(normalize_angle(phi - theta, false)), deg(3)) << k;
    }
}

TEST(SmallestBoxAt, EnclosesAllPixels) {
    Rng rng(5);
    const BinaryRegion r = random_blob(rng, 25, 30);
    for (int k = 0; k < 12; ++k) {
        const OrientedBox b = smallest_oriented_box_at(r, deg(15 * k));
        for (const auto& [i, j] : pixels(r)) {
            EXPECT_TRUE(contains(b, {static_cast<double>(i), static_cast<double>(j)}, 1e-9));
        }
    }
}

TEST(SmallestBoxAt, FloorsThinRegions) {
    const OrientedBox b = smallest_oriented_box_at(BinaryRegion({{0, 0, 10}}), 0.0);
    EXPECT_NEAR(b.l1, 4.5, 1e-12);
    EXPECT_EQ(b.l2, kMinSemiAxis);
}

TEST(ConvexHull, CounterclockwiseAndEnclosing) {
    Rng rng(6);
    const BinaryRegion r = random_blob(rng, 20, 20);
    const auto hull = convex_hull(r);
    ASSERT_GE(hull.size(), 3u);
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Point2 a = hull[i], b = hull[(i + 1) % hull.size()];
        for (const auto& [pr, pc] : pixels(r)) {
            const double cr = (b.r - a.r) * (pc - a.c) - (b.c - a.c) * (pr - a.r);
            EXPECT_GE(cr, -1e-9);
        }
    }
}

TEST(SmallestObb, MatchesSampledMinimum) {
    Rng rng(7);
    for (int t = 0; t < 15; ++t) {
        const OrientedBox gen{40, 40, rng.uniform(5, 25), rng.uniform(3, 10), rng.uniform(-kPi, kPi)};
        const BinaryRegion r = BinaryRegion::rasterize(gen);
        const OrientedBox b = smallest_obb(r, true);
        const double sampled = oracle::sampled_min_rect_area(r, 4000);
        EXPECT_LE(b.area(), sampled + 1e-6);
        EXPECT_GE(b.area(), sampled * (1 - 2e-3));
        EXPECT_GE(b.l1, b.l2);
        EXPECT_GT(b.phi, -kPi / 2);
        EXPECT_LE(b.phi, kPi / 2);
        for (const auto& [i, j] : pixels(r)) {
            EXPECT_TRUE(contains(b, {static_cast<double>(i), static_cast<double>(j)}, 1e-6));
        }
    }
}

TEST(SmallestObb, AxisAlignedRectangle) {
    const OrientedBox b = smallest_obb(make_rectangle(30, 10), true);
    EXPECT_NEAR(b.l1, 14.5, 1e-9);
    EXPECT_NEAR(b.l2, 4.5, 1e-9);
    EXPECT_NEAR(axis_error(b.phi, 0.0), 0.0, 1e-9);
    EXPECT_NEAR(b.r, 4.5, 1e-9);
    EXPECT_NEAR(b.c, 14.5, 1e-9);
}

TEST(SmallestAabbBox, ZeroAngle) {
    const OrientedBox b = smallest_aabb_box(BinaryRegion({{2, 3, 9}, {5, 4, 5}}));
    EXPECT_EQ(b.phi, 0.0);
    EXPECT_NEAR(b.l1, 2.5, 1e-12);
    EXPECT_NEAR(b.l2, 1.5, 1e-12);
}

TEST(GtBoxFromMask, ClassWithoutOrientation) {
    const BinaryRegion r = rotated_rect(60, 20, deg(30));
    const OrientedBox b = gt_box_from_mask(r, false, false);
    EXPECT_EQ(b.phi, 0.0);
    const AxisAlignedBox bb = r.bounds();
    EXPECT_NEAR(b.l1, bb.width() / 2, 1e-12);
    EXPECT_NEAR(b.l2, bb.height() / 2, 1e-12);
}

TEST(GtBoxFromMask, DirectionModeUsesMomentAngle) {
    const BinaryRegion screw = transform_region(make_screw(70, 8, 9), deg(120), 1.0);
    const OrientedBox b = gt_box_from_mask(screw, true, false);
    EXPECT_LT(std::abs(normalize_angle(b.phi - deg(120), false)), deg(3));
}

TEST(GtBoxFromMask, IgnoreDirectionUsesMinimumArea) {
    const BinaryRegion r = rotated_rect(60, 20, deg(-40));
    const OrientedBox b = gt_box_from_mask(r, true, true);
    EXPECT_EQ(b.area(), smallest_obb(r, true).area());
    EXPECT_LT(axis_error(b.phi, deg(-40)), deg(1));
}

TEST(GtBoxFromMask, EmptyThrows) {
    EXPECT_THROW(gt_box_from_mask(BinaryRegion(), true, true), DomainError);
}

TEST(RefineOrientation, ReplacesOnlyAngle) {
    const BinaryRegion r = rotated_rect(60, 20, deg(25));
    const OrientedBox box{200, 200, 30, 10, deg(10)};
    const RefineResult res = refine_orientation_from_mask(box, r, true);
    ASSERT_TRUE(res.changed);
    EXPECT_EQ(res.box.r, box.r);
    EXPECT_EQ(res.box.c, box.c);
    EXPECT_EQ(res.box.l1, box.l1);
    EXPECT_EQ(res.box.l2, box.l2);
    EXPECT_LT(axis_error(res.box.phi, deg(25)), deg(1));
}

TEST(RefineOrientation, KeepsLengthsAttachedWhenL2IsLonger) {
    const BinaryRegion r = rotated_rect(60, 20, deg(25));
    const OrientedBox box{200, 200, 10, 30, deg(100)};
    const RefineResult res = refine_orientation_from_mask(box, r, true);
    EXPECT_LT(axis_error(res.box.phi, deg(115)), deg(1));
    EXPECT_GT(iou(res.box, {200, 200, 30, 10, deg(25)}), 0.95);
}

TEST(RefineOrientation, DegenerateOrEmptyUnchanged) {
    const OrientedBox box{5, 5, 3, 2, 0.3};
    EXPECT_FALSE(refine_orientation_from_mask(box, BinaryRegion(), true).changed);
    EXPECT_FALSE(refine_orientation_from_mask(box, BinaryRegion({{5, 5, 6}}), false).changed);
    EXPECT_EQ(refine_orientation_from_mask(box, BinaryRegion(), true).box.phi, 0.3);
}
