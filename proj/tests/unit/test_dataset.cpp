#include <gtest/gtest.h>

#include <filesystem>

#include "obox/dataset.hpp"
#include "obox/errors.hpp"
#include "obox/rng.hpp"

using namespace obox;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "obox_unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

Dataset small_dataset() {
    Dataset ds;
    ds.config.ignore_direction = false;
    ds.config.classes = {{0, "screw", true}, {1, "nut", false}};
    ds.config.images = {{7, 64, 80, "a.pgm"}};
    const OrientedBox box{30.25, 40.5, 12.0, 4.0, 0.3};
    GroundTruthInstance a;
    a.image_id = 7;
    a.class_id = 0;
    a.mask = BinaryRegion::rasterize(box, 64, 80);
    a.obb = box;
    a.aabb = a.mask->bounds();
    a.mask_supervised = true;
    GroundTruthInstance b;
    b.image_id = 7;
    b.class_id = 1;
    b.obb = {10.0, 10.0, 3.0, 3.0, 0.0};
    b.aabb = to_aabb(b.obb);
    ds.instances = {a, b};
    return ds;
}

const char* kValidInstance = R"({"image_id": 1, "class_id": 0, "rbox": [10, 10, 5, 3, 0], "bbox": [5, 7, 15, 13]})";

std::string doc_with(const std::string& instance, const std::string& extra = "") {
    return std::string(R"({"schema": 1, "ignore_direction": true, )") + extra +
           R"("classes": [{"id": 0, "name": "a", "oriented": true}], "images": [{"id": 1, "height": 32, "width": 32, "file": ""}], "instances": [)" +
           instance + "]}";
}

}  // namespace

TEST(Rle, RoundTripRandomMasks) {
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        const int h = 1 + static_cast<int>(rng.below(20));
        const int w = 1 + static_cast<int>(rng.below(20));
        std::vector<uint8_t> dense(static_cast<std::size_t>(h * w));
        for (auto& v : dense) v = rng.below(3) == 0;
        const auto region = BinaryRegion::from_mask(h, w, dense);
        const Rle rle = rle_encode(region, h, w);
        EXPECT_EQ(rle_decode(rle), region);
        uint64_t sum = 0;
        for (auto c : rle.counts) sum += c;
        EXPECT_EQ(sum, static_cast<uint64_t>(h * w));
    }
}

TEST(Rle, ColumnMajorStartsWithBackground) {
    // Pixel (0, 0) set: the first count is an empty background run.
    const auto region = BinaryRegion::from_mask(2, 2, std::vector<uint8_t>{1, 0, 0, 1});
    EXPECT_EQ(rle_encode(region, 2, 2).counts, (std::vector<uint32_t>{0, 1, 2, 1}));
}

TEST(Rle, Errors) {
    EXPECT_THROW(rle_decode(Rle{2, 2, {1, 2}}), ParseError);
    const auto region = BinaryRegion::from_mask(3, 3, std::vector<uint8_t>(9, 1));
    EXPECT_THROW(rle_encode(region, 2, 2), ValidationError);
}

TEST(Annotations, SaveLoadRoundTripIsExact) {
    const Dataset ds = small_dataset();
    const auto path = temp_path("ann.json");
    save_annotations(path, ds);
    const Dataset back = load_annotations(path);
    EXPECT_EQ(back.config.ignore_direction, ds.config.ignore_direction);
    EXPECT_EQ(back.config.classes, ds.config.classes);
    EXPECT_EQ(back.config.images, ds.config.images);
    ASSERT_EQ(back.instances.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& x = ds.instances[i];
        const auto& y = back.instances[i];
        EXPECT_EQ(y.obb.r, x.obb.r);
        EXPECT_EQ(y.obb.c, x.obb.c);
        EXPECT_EQ(y.obb.l1, x.obb.l1);
        EXPECT_EQ(y.obb.l2, x.obb.l2);
        EXPECT_EQ(y.obb.phi, x.obb.phi);
        EXPECT_EQ(y.aabb.r_min, x.aabb.r_min);
        EXPECT_EQ(y.aabb.c_max, x.aabb.c_max);
        EXPECT_EQ(y.mask.has_value(), x.mask.has_value());
        if (x.mask) EXPECT_EQ(*y.mask, *x.mask);
        EXPECT_EQ(y.mask_supervised, x.mask_supervised);
    }
    EXPECT_TRUE(back.warnings.empty());
    EXPECT_EQ(serialize_annotations(back), serialize_annotations(ds));
}

TEST(Annotations, ParseErrors) {
    EXPECT_THROW(parse_annotations("not json"), ParseError);
    EXPECT_THROW(parse_annotations("[]"), ParseError);
    EXPECT_THROW(parse_annotations(R"({"schema": 2, "instances": []})"), ParseError);
    EXPECT_THROW(parse_annotations(doc_with(R"({"image_id": 1, "class_id": 0, "bbox": [5, 7, 15, 13]})")),
                 ParseError);
    EXPECT_THROW(parse_annotations(doc_with(
                     R"({"image_id": "x", "class_id": 0, "rbox": [10, 10, 5, 3, 0], "bbox": [5, 7, 15, 13]})")),
                 ParseError);
    EXPECT_NO_THROW(parse_annotations(doc_with(kValidInstance)));
}

TEST(Annotations, ValidationErrors) {
    EXPECT_THROW(parse_annotations(doc_with(
                     R"({"image_id": 1, "class_id": 5, "rbox": [10, 10, 5, 3, 0], "bbox": [5, 7, 15, 13]})")),
                 ValidationError);
    EXPECT_THROW(parse_annotations(doc_with(
                     R"({"image_id": 9, "class_id": 0, "rbox": [10, 10, 5, 3, 0], "bbox": [5, 7, 15, 13]})")),
                 ValidationError);
    EXPECT_THROW(parse_annotations(doc_with(
                     R"({"image_id": 1, "class_id": 0, "rbox": [10, 10, 5, 3, 0], "bbox": [5, 7, 15, 13], "mask_supervised": true})")),
                 ValidationError);
    // A 1x1 mask at (0, 0) lies outside the box.
    EXPECT_THROW(parse_annotations(doc_with(
                     R"({"image_id": 1, "class_id": 0, "rbox": [10, 10, 5, 3, 0], "bbox": [5, 7, 15, 13], "rle": {"h": 1, "w": 1, "counts": [0, 1]}})")),
                 ValidationError);
}

TEST(Annotations, AngleIsRecanonicalizedWithWarning) {
    const Dataset ds = parse_annotations(doc_with(
        R"({"image_id": 1, "class_id": 0, "rbox": [10, 10, 5, 3, 2.5], "bbox": [5, 5, 15, 15]})"));
    ASSERT_EQ(ds.instances.size(), 1u);
    EXPECT_NEAR(ds.instances[0].obb.phi, 2.5 - kPi, 1e-12);
    EXPECT_EQ(ds.warnings.size(), 1u);
}

TEST(Detections, RoundTrip) {
    std::vector<DetectionRecord> dets(2);
    dets[0].image_id = 3;
    dets[0].det = {{20.5, 30.25, 8.0, 3.0, -1.0}, 0.75, 2};
    dets[0].mask = BinaryRegion::rasterize(dets[0].det.box);
    dets[0].aabb = dets[0].mask->bounds();
    dets[1].image_id = 4;
    dets[1].det = {{5, 5, 2, 2, 0}, 1.0, 0};
    const auto path = temp_path("dets.json");
    save_detections(path, dets);
    const auto back = load_detections(path);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].image_id, 3);
    EXPECT_EQ(back[0].det.score, 0.75);
    EXPECT_EQ(back[0].det.box.phi, -1.0);
    ASSERT_TRUE(back[0].mask.has_value());
    EXPECT_EQ(*back[0].mask, *dets[0].mask);
    EXPECT_FALSE(back[1].mask.has_value());
    EXPECT_FALSE(back[1].aabb.has_value());
}

TEST(Detections, ScoreOutsideUnitInterval) {
    EXPECT_THROW(parse_detections(
                     R"({"detections": [{"image_id": 0, "class_id": 0, "score": 1.5, "rbox": [1, 1, 1, 1, 0]}]})"),
                 ValidationError);
    std::vector<DetectionRecord> dets(1);
    dets[0].det = {{1, 1, 1, 1, 0}, -0.1, 0};
    EXPECT_THROW(serialize_detections(dets), ValidationError);
}

TEST(AnchorFile, SaveLoadRoundTrip) {
    const auto levels = generate_anchors(AnchorGridSpec{}, 64, 96);
    const auto path = temp_path("anchors.json");
    save_anchors(path, levels);
    const auto back = load_anchors(path);
    ASSERT_EQ(back.size(), levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        EXPECT_EQ(back[i].level, levels[i].level);
        EXPECT_EQ(back[i].stride, levels[i].stride);
        ASSERT_EQ(back[i].boxes.size(), levels[i].boxes.size());
        for (std::size_t k = 0; k < levels[i].boxes.size(); ++k) {
            EXPECT_EQ(back[i].boxes[k].phi, levels[i].boxes[k].phi);
            EXPECT_EQ(back[i].boxes[k].l1, levels[i].boxes[k].l1);
        }
    }
}

TEST(AnchorSpec, ParseAndDefaults) {
    const auto spec = parse_anchor_spec(R"({"min_level": 4, "angles": [0.0], "ignore_direction": false})");
    EXPECT_EQ(spec.min_level, 4);
    EXPECT_EQ(spec.max_level, 5);
    EXPECT_EQ(spec.angles, (std::vector<double>{0.0}));
    EXPECT_FALSE(spec.ignore_direction);
    EXPECT_THROW(parse_anchor_spec(R"({"min_level": 6})"), ConfigError);
    EXPECT_THROW(parse_anchor_spec("[1]"), ParseError);
}

TEST(SubsampleMasks, KeepsCeilFraction) {
    std::vector<GroundTruthInstance> inst(30);
    for (auto& g : inst) g.mask = BinaryRegion::rasterize({5, 5, 2, 2, 0});
    inst[0].mask.reset();
    for (double f : {0.0, 0.1, 0.25, 0.5, 1.0}) {
        const auto out = subsample_masks(inst, f, 11);
        std::size_t n = 0;
        for (const auto& g : out) n += g.mask_supervised;
        EXPECT_EQ(n, static_cast<std::size_t>(std::ceil(f * 29 - 1e-9))) << f;
        EXPECT_FALSE(out[0].mask_supervised);
    }
    const auto a = subsample_masks(inst, 0.5, 4);
    const auto b = subsample_masks(inst, 0.5, 4);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].mask_supervised, b[i].mask_supervised);
    EXPECT_THROW(subsample_masks(inst, 1.5, 0), ConfigError);
}

TEST(Files, MissingFileIsIoError) {
    EXPECT_THROW(read_text_file("/nonexistent/obox/file.json"), IoError);
}
