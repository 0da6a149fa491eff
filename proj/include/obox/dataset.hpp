#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "obox/anchors.hpp"
#include "obox/geometry.hpp"
#include "obox/nms.hpp"
#include "obox/region.hpp"

namespace obox {

struct ClassMeta {
    int id = 0;
    std::string name;
    bool is_oriented = true;  ///< false: class without orientation (axis-aligned GT, phi = 0)

    friend bool operator==(const ClassMeta&, const ClassMeta&) = default;
};

struct ImageInfo {
    int id = 0;
    int height = 0;
    int width = 0;
    std::string file;

    friend bool operator==(const ImageInfo&, const ImageInfo&) = default;
};

struct DatasetConfig {
    bool ignore_direction = true;
    std::vector<ClassMeta> classes;
    std::vector<ImageInfo> images;

    const ClassMeta* find_class(int id) const;
    const ImageInfo* find_image(int id) const;
    /// Oriented unless the class is listed as without orientation.
    bool class_is_oriented(int id) const;
};

struct GroundTruthInstance {
    int image_id = 0;
    int class_id = 0;
    OrientedBox obb;
    AxisAlignedBox aabb;
    std::optional<BinaryRegion> mask;
    /// false: the instance contributes zero mask-loss weight.
    bool mask_supervised = false;
};

struct Dataset {
    DatasetConfig config;
    std::vector<GroundTruthInstance> instances;
    /// Non-fatal findings from loading, e.g. re-canonicalized angles.
    std::vector<std::string> warnings;
};

struct DetectionRecord {
    int image_id = 0;
    Detection det;
    std::optional<AxisAlignedBox> aabb;
    std::optional<BinaryRegion> mask;

    /// Stored axis-aligned box, or the one enclosing the oriented box.
    AxisAlignedBox axis_box() const { return aabb ? *aabb : to_aabb(det.box); }
};

/// Uncompressed run-length mask: column-major run lengths, starting with a
/// (possibly empty) background run.
struct Rle {
    int height = 0;
    int width = 0;
    std::vector<uint32_t> counts;

    friend bool operator==(const Rle&, const Rle&) = default;
};

/// Throws ValidationError when the region has pixels outside the image.
Rle rle_encode(const BinaryRegion& region, int height, int width);
/// Throws ParseError when the counts do not cover height * width pixels.
BinaryRegion rle_decode(const Rle& rle);

inline constexpr int kSchemaVersion = 1;

/// Annotation file (one JSON document per split).
Dataset parse_annotations(const std::string& text, const std::string& source = "<memory>");
std::string serialize_annotations(const Dataset& dataset);
Dataset load_annotations(const std::filesystem::path& path);
void save_annotations(const std::filesystem::path& path, const Dataset& dataset);

std::vector<DetectionRecord> parse_detections(const std::string& text, const std::string& source = "<memory>");
std::string serialize_detections(const std::vector<DetectionRecord>& dets);
std::vector<DetectionRecord> load_detections(const std::filesystem::path& path);
/// Throws ValidationError for scores outside [0, 1].
void save_detections(const std::filesystem::path& path, const std::vector<DetectionRecord>& dets);

/// Anchor grid spec and generated anchor files.
AnchorGridSpec parse_anchor_spec(const std::string& text, const std::string& source = "<memory>");
AnchorGridSpec load_anchor_spec(const std::filesystem::path& path);
std::string serialize_anchors(const std::vector<AnchorLevel>& levels);
std::vector<AnchorLevel> load_anchors(const std::filesystem::path& path);
void save_anchors(const std::filesystem::path& path, const std::vector<AnchorLevel>& levels);

/// Keeps mask supervision on exactly ceil(fraction * N) of the N instances that
/// carry a mask, chosen uniformly with the given seed. Boxes are untouched.
std::vector<GroundTruthInstance> subsample_masks(std::vector<GroundTruthInstance> instances, double fraction,
                                                 uint64_t seed);

/// Whole-file helpers that map failures to IoError.
std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace obox
