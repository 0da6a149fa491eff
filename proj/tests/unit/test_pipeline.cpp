#include <gtest/gtest.h>

#include <cmath>

#include "obox/errors.hpp"
#include "obox/pipeline.hpp"
#include "obox/rng.hpp"

using namespace obox;

namespace {

DatasetConfig config(bool ignore_direction) {
    DatasetConfig c;
    c.ignore_direction = ignore_direction;
    c.classes = {{0, "bar", true}, {1, "nut", false}};
    return c;
}

std::vector<GroundTruthInstance> ellipse_gts(std::size_t n, uint64_t seed) {
    std::vector<GroundTruthInstance> out;
    const auto regions = random_ellipses(n, seed);
    for (std::size_t i = 0; i < regions.size(); ++i) {
        GroundTruthInstance g;
        g.image_id = static_cast<int>(i);
        g.class_id = 0;
        g.mask = regions[i];
        g.obb = gt_box_from_mask(regions[i], true, true);
        g.aabb = regions[i].bounds();
        g.mask_supervised = true;
        out.push_back(std::move(g));
    }
    return out;
}

double mean_mask_iou(const std::vector<DetectionRecord>& dets, const std::vector<GroundTruthInstance>& gts) {
    double sum = 0.0;
    for (std::size_t i = 0; i < gts.size(); ++i) sum += dets[i].mask ? mask_iou(*dets[i].mask, *gts[i].mask) : 0.0;
    return sum / static_cast<double>(gts.size());
}

}  // namespace

TEST(Simulate, ZeroNoiseReproducesGroundTruth) {
    const auto gts = ellipse_gts(40, 1);
    const auto dets = simulate_detections(gts, config(true), NoiseSpec{}, 7);
    ASSERT_EQ(dets.size(), gts.size());
    for (std::size_t i = 0; i < gts.size(); ++i) {
        EXPECT_EQ(dets[i].image_id, gts[i].image_id);
        EXPECT_NEAR(dets[i].det.box.r, gts[i].obb.r, 1e-9);
        EXPECT_NEAR(dets[i].det.box.phi, gts[i].obb.phi, 1e-9);
        EXPECT_NEAR(dets[i].det.score, 1.0, 1e-9);
        ASSERT_TRUE(dets[i].mask.has_value());
        EXPECT_GE(mask_iou(*dets[i].mask, *gts[i].mask), 0.93);
        EXPECT_EQ(dets[i].aabb->r_min, dets[i].mask->bounds().r_min);
    }
}

TEST(Simulate, DeterministicPerSeed) {
    const auto gts = ellipse_gts(10, 2);
    const NoiseSpec noise{2.0, 0.1, 0.2};
    const auto a = simulate_detections(gts, config(true), noise, 3);
    const auto b = simulate_detections(gts, config(true), noise, 3);
    const auto c = simulate_detections(gts, config(true), noise, 4);
    for (std::size_t i = 0; i < gts.size(); ++i) {
        EXPECT_EQ(a[i].det.box.r, b[i].det.box.r);
        EXPECT_EQ(a[i].det.score, b[i].det.score);
    }
    EXPECT_NE(a[0].det.box.r, c[0].det.box.r);
}

TEST(Simulate, QualityDropsWithAngleNoise) {
    const auto gts = ellipse_gts(60, 3);
    double previous = 1.0;
    for (double sigma : {0.0, 0.1, 0.3, 0.6}) {
        const auto dets = simulate_detections(gts, config(true), NoiseSpec{0.0, 0.0, sigma}, 5);
        const double m = mean_mask_iou(dets, gts);
        EXPECT_LT(m, previous + 1e-12) << sigma;
        previous = m;
    }
    EXPECT_LT(previous, 0.9);
}

TEST(Simulate, MissingMaskGivesNoMask) {
    auto gts = ellipse_gts(2, 4);
    gts[1].mask.reset();
    const auto dets = simulate_detections(gts, config(true), NoiseSpec{}, 0);
    EXPECT_TRUE(dets[0].mask.has_value());
    EXPECT_FALSE(dets[1].mask.has_value());
    EXPECT_THROW(NoiseSpec({-1.0, 0.0, 0.0}).validate(), ConfigError);
}

TEST(Refine, OfmChangesOnlyTheAngle) {
    const auto gts = ellipse_gts(30, 5);
    const auto dets = simulate_detections(gts, config(true), NoiseSpec{2.0, 0.1, 0.3}, 1);
    const auto refined = apply_ofm(dets, config(true));
    ASSERT_EQ(refined.size(), dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i) {
        EXPECT_EQ(refined[i].det.box.r, dets[i].det.box.r);
        EXPECT_EQ(refined[i].det.box.c, dets[i].det.box.c);
        EXPECT_EQ(refined[i].det.box.l1, dets[i].det.box.l1);
        EXPECT_EQ(refined[i].det.box.l2, dets[i].det.box.l2);
    }
}

TEST(Refine, OfmRecoversAngleOfElongatedMasks) {
    std::vector<DetectionRecord> dets;
    for (int i = 0; i < 12; ++i) {
        DetectionRecord d;
        const double phi = -1.4 + 0.25 * i;
        d.det = {{60, 60, 30, 8, phi + 0.3}, 0.9, 0};
        d.mask = BinaryRegion::rasterize({60, 60, 30, 8, phi});
        dets.push_back(d);
    }
    const auto out = apply_ofm(dets, config(true));
    for (int i = 0; i < 12; ++i) {
        const double phi = -1.4 + 0.25 * i;
        EXPECT_NEAR(normalize_angle(out[static_cast<std::size_t>(i)].det.box.phi - phi, true), 0.0, kPi / 180.0);
    }
}

TEST(Refine, BfmOnPerfectMasksRecoversBox) {
    std::vector<DetectionRecord> dets;
    for (int i = 0; i < 12; ++i) {
        const OrientedBox b{60, 60, 30, 8, -1.4 + 0.25 * i};
        DetectionRecord d;
        d.det = {{60, 60, 20, 20, 0}, 0.9, 0};
        d.mask = BinaryRegion::rasterize(b);
        dets.push_back(d);
    }
    const auto out = boxes_from_masks(dets, config(true));
    ASSERT_EQ(out.size(), dets.size());
    for (int i = 0; i < 12; ++i) {
        const OrientedBox want{60, 60, 30, 8, -1.4 + 0.25 * i};
        const auto& got = out[static_cast<std::size_t>(i)].det.box;
        EXPECT_NEAR(got.r, want.r, 1.0);
        EXPECT_NEAR(got.c, want.c, 1.0);
        EXPECT_NEAR(got.l1, want.l1, 1.0);
        EXPECT_NEAR(got.l2, want.l2, 1.0);
        EXPECT_NEAR(normalize_angle(got.phi - want.phi, true), 0.0, 2.0 * kPi / 180.0);
    }
}

TEST(Refine, BfmDropsEmptyAndUsesClassOrientation) {
    std::vector<DetectionRecord> dets(3);
    dets[0].det = {{20, 20, 5, 5, 0}, 0.5, 0};
    dets[1].det = {{20, 20, 5, 5, 0}, 0.5, 0};
    dets[1].mask = BinaryRegion{};
    dets[2].det = {{60, 60, 5, 5, 0.7}, 0.5, 1};
    dets[2].mask = BinaryRegion::rasterize({60, 60, 20, 6, 0.7});
    const auto out = boxes_from_masks(dets, config(true));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].det.box.phi, 0.0);
    EXPECT_EQ(out[0].aabb->r_min, dets[2].mask->bounds().r_min);
}

TEST(NmsPerImage, GroupsByImage) {
    std::vector<DetectionRecord> dets;
    for (int im : {5, 2, 5, 2}) {
        DetectionRecord d;
        d.image_id = im;
        d.det = {{20, 20, 8, 4, 0}, 0.5 + 0.1 * static_cast<double>(dets.size()), 0};
        dets.push_back(d);
    }
    NmsConfig cfg;
    cfg.min_score = 0.0;
    NmsStats stats;
    const auto out = nms_per_image(dets, cfg, &stats);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].image_id, 5);
    EXPECT_DOUBLE_EQ(out[0].det.score, 0.7);
    EXPECT_EQ(out[1].image_id, 2);
    EXPECT_DOUBLE_EQ(out[1].det.score, 0.8);
    EXPECT_EQ(stats.input, 4u);
    EXPECT_EQ(stats.output, 2u);
}

TEST(Roundtrip, OrientedBoxesBeatAxisBoxes) {
    const auto regions = random_ellipses(60, 11);
    const auto oriented = mask_roundtrip(regions, BoxKind::Oriented);
    const auto axis = mask_roundtrip(regions, BoxKind::Axis);
    ASSERT_EQ(oriented.iou.size(), 60u);
    EXPECT_GE(oriented.min, 0.93);
    EXPECT_LT(axis.mean, oriented.mean);
    EXPECT_THROW(mask_roundtrip(std::vector<BinaryRegion>{BinaryRegion{}}, BoxKind::Oriented), DomainError);
}

TEST(Ellipses, Deterministic) {
    const auto a = random_ellipses(5, 1);
    const auto b = random_ellipses(5, 1);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a[i], b[i]);
}
