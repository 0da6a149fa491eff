#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "obox/dataset.hpp"
#include "obox/region.hpp"

namespace obox {

/// A class template cut out of a single image.
struct TemplateInstance {
    int class_id = 0;
    BinaryRegion region;
    /// Head-to-tail direction of the template, radians (oriented classes).
    double direction = 0.0;
};

/// Elongated bar along the column axis: `length` columns by `width` rows.
BinaryRegion make_rectangle(int length, int width);
/// Ellipse with semi-axis a along columns and b along rows.
BinaryRegion make_ellipse(double a, double b);
BinaryRegion make_disk(double radius);
/// Bar of `length` x `width` with a disk of `head_radius` centered on its left end;
/// points head -> tail along +column (direction 0).
BinaryRegion make_screw(int length, int width, double head_radius);

struct SceneSpec {
    int height = 384;
    int width = 512;
    int min_count = 1;
    int max_count = 8;
    double rotation_min = -kPi;
    double rotation_max = kPi;
    double scale_min = 1.0;
    double scale_max = 1.0;
    /// Largest mask IoU allowed between a new instance and any earlier one.
    double max_iou = 0.0;
    int max_retries = 200;

    void validate() const;
};

struct Scene {
    int height = 0;
    int width = 0;
    std::vector<GroundTruthInstance> instances;
    /// Row-major; 0 is background, otherwise class_id + 1 (saturating at 255).
    std::vector<uint8_t> label;
};

/// Rotates (about the centroid, inverse nearest-neighbor) and scales a template
/// region. The result is centered near the origin.
BinaryRegion transform_region(const BinaryRegion& region, double rotation, double scale);

/// Pastes randomly drawn, rotated and scaled templates into an empty scene.
///
/// Placements whose mask IoU with an earlier instance exceeds spec.max_iou are
/// redrawn up to spec.max_retries times, then GenerationError is thrown. Later
/// instances occlude earlier ones; boxes are computed from the visible masks
/// with gt_box_from_mask.
Scene generate_scene(std::span<const TemplateInstance> templates, const DatasetConfig& config, const SceneSpec& spec,
                     uint64_t seed, int image_id = 0);

/// Template library file: classes, direction mode and templates given either
/// as shapes or as RLE masks.
struct TemplateLibrary {
    DatasetConfig config;
    std::vector<TemplateInstance> templates;
};

TemplateLibrary parse_templates(const std::string& text, const std::string& source = "<memory>");
TemplateLibrary load_templates(const std::filesystem::path& path);
SceneSpec parse_scene_spec(const std::string& text, const std::string& source = "<memory>");
SceneSpec load_scene_spec(const std::filesystem::path& path);

struct GeneratedDataset {
    Dataset dataset;
    std::vector<Scene> scenes;
};

/// `count` scenes; scene k uses a seed derived from (seed, k) and image id k.
GeneratedDataset generate_dataset(const TemplateLibrary& library, const SceneSpec& spec, int count, uint64_t seed);

/// Writes annotations.json and one scene_NNNN.pgm label image per scene.
void write_generated_dataset(const GeneratedDataset& generated, const std::filesystem::path& out_dir);

/// Binary (P5) portable graymap.
std::string encode_pgm(std::span<const uint8_t> pixels, int height, int width);

}  // namespace obox
