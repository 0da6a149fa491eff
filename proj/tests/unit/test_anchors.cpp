#include <gtest/gtest.h>

#include <cmath>

#include "obox/anchors.hpp"
#include "obox/errors.hpp"
#include "obox/rng.hpp"

using namespace obox;

namespace {

double deg(double d) { return d * kPi / 180.0; }

bool is_fg(const AnchorLabel& l, std::size_t g) {
    const auto* f = std::get_if<Foreground>(&l);
    return f && f->gt_index == g;
}

}  // namespace

TEST(AnchorGrid, CountsPerLevel) {
    AnchorGridSpec spec;
    const auto levels = generate_anchors(spec, 100, 70);
    ASSERT_EQ(levels.size(), 3u);
    const std::size_t per_cell = 3 * 2 * 3;
    EXPECT_EQ(levels[0].boxes.size(), 13u * 9u * per_cell);  // stride 8
    EXPECT_EQ(levels[1].boxes.size(), 7u * 5u * per_cell);   // stride 16
    EXPECT_EQ(levels[2].boxes.size(), 4u * 3u * per_cell);   // stride 32
    EXPECT_EQ(flatten(levels).size(), levels[0].boxes.size() + levels[1].boxes.size() + levels[2].boxes.size());
}

TEST(AnchorGrid, CentersAndStrides) {
    AnchorGridSpec spec;
    const auto levels = generate_anchors(spec, 64, 64);
    for (const auto& lv : levels) {
        EXPECT_EQ(lv.stride, std::ldexp(1.0, lv.level));
        EXPECT_EQ(lv.boxes.front().r, lv.stride / 2);
        EXPECT_EQ(lv.boxes.front().c, lv.stride / 2);
    }
}

TEST(AnchorGrid, ScalesAndRatios) {
    AnchorGridSpec spec;
    spec.angles = {0.0};
    spec.aspect_ratios = {0.25};
    spec.num_subscales = 2;
    const auto levels = generate_anchors(spec, 8, 8);
    const auto& b = levels[0].boxes;
    ASSERT_EQ(b.size(), 2u);
    // s = 32: sides s / sqrt(rho) = 64 and s * sqrt(rho) = 16.
    EXPECT_NEAR(b[0].l1, 32.0, 1e-12);
    EXPECT_NEAR(b[0].l2, 8.0, 1e-12);
    EXPECT_NEAR(std::sqrt(b[1].area()), 32.0 * std::sqrt(2.0), 1e-9);
    EXPECT_NEAR(std::sqrt(levels[1].boxes[0].area()), 64.0, 1e-9);
    for (const auto& lv : levels) {
        for (const auto& a : lv.boxes) EXPECT_GE(a.l1, a.l2);
    }
}

TEST(AnchorGrid, AnglesCanonicalized) {
    AnchorGridSpec spec;
    spec.angles = {kPi, -kPi / 2};
    const auto lv = generate_anchors(spec, 8, 8)[0];
    EXPECT_NEAR(lv.boxes[0].phi, 0.0, 1e-12);
    EXPECT_NEAR(lv.boxes[1].phi, kPi / 2, 1e-12);
    spec.ignore_direction = false;
    const auto lv2 = generate_anchors(spec, 8, 8)[0];
    EXPECT_NEAR(lv2.boxes[0].phi, kPi, 1e-12);
    EXPECT_NEAR(lv2.boxes[1].phi, -kPi / 2, 1e-12);
}

TEST(AnchorGrid, InvalidSpecs) {
    AnchorGridSpec spec;
    spec.aspect_ratios = {1.5};
    EXPECT_THROW(generate_anchors(spec, 8, 8), ConfigError);
    spec = {};
    spec.min_level = 6;
    EXPECT_THROW(generate_anchors(spec, 8, 8), ConfigError);
    spec = {};
    spec.angles.clear();
    EXPECT_THROW(generate_anchors(spec, 8, 8), ConfigError);
    EXPECT_THROW(generate_anchors(AnchorGridSpec{}, 0, 8), ConfigError);
}

TEST(AssignmentConfig, Presets) {
    EXPECT_EQ(AssignmentConfig::rpn().fg_pos_thresh, 0.5);
    EXPECT_EQ(AssignmentConfig::rpn().fg_neg_thresh, 0.3);
    EXPECT_FALSE(AssignmentConfig::rpn().swb2bg);
    EXPECT_EQ(AssignmentConfig::rcnn_head().fg_pos_thresh, 0.7);
    EXPECT_EQ(AssignmentConfig::mask_head().fg_neg_thresh, 0.6);
    EXPECT_THROW((AssignmentConfig{0.3, 0.5, false}.validate()), ConfigError);
}

TEST(Assign, StrongOverlapIsForeground) {
    const std::vector<OrientedBox> anchors{{10, 10, 8, 4, 0}, {100, 100, 8, 4, 0}};
    const std::vector<OrientedBox> gts{{10, 10, 8, 4, 0}};
    const auto labels = assign(anchors, gts, AssignmentConfig::rpn());
    EXPECT_TRUE(is_fg(labels[0], 0));
    EXPECT_TRUE(std::holds_alternative<Background>(labels[1]));
}

TEST(Assign, MiddleBandIgnoredUnlessBest) {
    const OrientedBox gt{50, 50, 20, 10, 0};
    // IoU 0.6 (best for the GT) and IoU 1/3 (neither).
    const std::vector<OrientedBox> anchors{{50, 54, 20, 10, 0}, {50, 60, 20, 10, 0}, {50, 75, 20, 10, 0}};
    AssignmentConfig cfg{0.7, 0.3, true};
    const auto labels = assign(anchors, {gt}, cfg);
    EXPECT_TRUE(is_fg(labels[0], 0));
    EXPECT_TRUE(std::holds_alternative<Ignore>(labels[1]));
    EXPECT_TRUE(std::holds_alternative<Background>(labels[2]));
}

TEST(Assign, WeakBestAnchorDependsOnSwb2bg) {
    const OrientedBox gt{50, 50, 20, 10, 0};
    const std::vector<OrientedBox> anchors{{50, 75, 20, 10, 0}, {300, 300, 20, 10, 0}};
    ASSERT_LT(ar_iou(anchors[0], gt), 0.3);
    ASSERT_GT(ar_iou(anchors[0], gt), 0.0);
    auto labels = assign(anchors, {gt}, {0.5, 0.3, false});
    EXPECT_TRUE(is_fg(labels[0], 0));
    labels = assign(anchors, {gt}, {0.5, 0.3, true});
    EXPECT_TRUE(std::holds_alternative<Background>(labels[0]));
    EXPECT_TRUE(std::holds_alternative<Background>(labels[1]));
}

TEST(Assign, ZeroOverlapGtGetsNothing) {
    const std::vector<OrientedBox> anchors{{0, 0, 4, 4, 0}};
    const auto labels = assign(anchors, {{100, 100, 4, 4, 0}}, {0.5, 0.3, false});
    EXPECT_TRUE(std::holds_alternative<Background>(labels[0]));
}

TEST(Assign, MidBandBestForOneGtButArgmaxOfAnother) {
    const OrientedBox g0{50, 40, 20, 10, 0};
    const OrientedBox g1{50, 62, 20, 10, 0};
    const std::vector<OrientedBox> anchors{{50, 60, 20, 10, 0}, {50, 62, 20, 10, 0}};
    const auto labels = assign(anchors, {g0, g1}, {0.95, 0.3, true});
    EXPECT_TRUE(is_fg(labels[0], 0));
    EXPECT_TRUE(is_fg(labels[1], 1));
}

TEST(Assign, MidBandExample) {
    const OrientedBox gt{50, 50, 20, 10, 0};
    // Shifts giving IoU 0.4 and 0.35.
    const double d40 = 40.0 * 0.6 / 1.4, d35 = 40.0 * 0.65 / 1.35;
    const std::vector<OrientedBox> anchors{{50, 50 + d35, 20, 10, 0}, {50, 50 + d40, 20, 10, 0}};
    ASSERT_NEAR(ar_iou(anchors[1], gt), 0.4, 1e-12);
    const auto labels = assign(anchors, {gt}, {0.5, 0.3, false});
    EXPECT_TRUE(std::holds_alternative<Ignore>(labels[0]));
    EXPECT_TRUE(is_fg(labels[1], 0));
}

TEST(Assign, BestForOneGtButArgmaxOfAnother) {
    // Anchor 0 overlaps GT 1 most, but is GT 0's only overlapping anchor.
    const OrientedBox g0{50, 40, 20, 10, 0};
    const OrientedBox g1{50, 62, 20, 10, 0};
    const std::vector<OrientedBox> anchors{{50, 60, 20, 10, 0}, {50, 62, 20, 10, 0}};
    const auto labels = assign(anchors, {g0, g1}, {0.7, 0.3, false});
    ASSERT_GT(ar_iou(anchors[0], g1), ar_iou(anchors[0], g0));
    EXPECT_TRUE(is_fg(labels[0], 0));
    EXPECT_TRUE(is_fg(labels[1], 1));
}

TEST(Assign, ArIouRejectsOrthogonalAnchor) {
    const OrientedBox gt{50, 50, 30, 8, 0};
    const OrientedBox swapped{50, 50, 8, 30, kPi / 2};
    ASSERT_NEAR(iou(swapped, gt), 1.0, 1e-12);
    const auto ar = assign({swapped}, {gt}, {0.5, 0.3, true}, AssignmentMetric::ArIoU);
    EXPECT_TRUE(std::holds_alternative<Background>(ar[0]));
    const auto ex = assign({swapped}, {gt}, {0.5, 0.3, true}, AssignmentMetric::ExactIoU);
    EXPECT_TRUE(is_fg(ex[0], 0));
}

TEST(Assign, NoGtAllBackground) {
    const auto labels = assign({{0, 0, 4, 4, 0}, {5, 5, 4, 4, 0}}, {}, AssignmentConfig::rpn());
    for (const auto& l : labels) EXPECT_TRUE(std::holds_alternative<Background>(l));
}

TEST(Assign, CoverageProperty) {
    Rng rng(11);
    AnchorGridSpec spec;
    const auto anchors = flatten(generate_anchors(spec, 128, 128));
    int counterexamples = 0;
    for (int scene = 0; scene < 30; ++scene) {
        std::vector<OrientedBox> gts;
        const int n = 1 + static_cast<int>(rng.below(4));
        for (int k = 0; k < n; ++k) {
            gts.push_back({rng.uniform(10, 118), rng.uniform(10, 118), rng.uniform(4, 40), rng.uniform(2, 6),
                           rng.uniform(-kPi / 2, kPi / 2)});
        }
        const auto on = count_labels(assign(anchors, gts, {0.5, 0.3, false}), gts.size());
        const auto off = count_labels(assign(anchors, gts, {0.5, 0.3, true}), gts.size());
        for (std::size_t g = 0; g < gts.size(); ++g) {
            double best = 0.0;
            for (const auto& a : anchors) best = std::max(best, ar_iou(a, gts[g]));
            if (best > 0.0) EXPECT_GE(on.per_gt_foreground[g], 1u);
            if (off.per_gt_foreground[g] == 0 && best > 0.0) ++counterexamples;
        }
        EXPECT_EQ(on.foreground + on.background + on.ignore, anchors.size());
    }
    EXPECT_GT(counterexamples, 0);
}

TEST(CountLabels, Tallies) {
    const std::vector<AnchorLabel> labels{Foreground{1}, Background{}, Ignore{}, Foreground{1}, Foreground{0}};
    const auto c = count_labels(labels, 3);
    EXPECT_EQ(c.foreground, 3u);
    EXPECT_EQ(c.background, 1u);
    EXPECT_EQ(c.ignore, 1u);
    EXPECT_EQ(c.per_gt_foreground, (std::vector<std::size_t>{1, 2, 0}));
}

TEST(Assign, DeterministicUnderThreads) {
    AnchorGridSpec spec;
    const auto anchors = flatten(generate_anchors(spec, 96, 96));
    const std::vector<OrientedBox> gts{{30, 30, 20, 5, deg(30)}, {60, 70, 15, 4, deg(-60)}};
    const auto a = assign(anchors, gts, AssignmentConfig::rpn());
    const auto b = assign(anchors, gts, AssignmentConfig::rpn());
    EXPECT_EQ(a, b);
}
