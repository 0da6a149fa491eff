#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "obox/geometry.hpp"

namespace obox {

/// Horizontal run of foreground pixels: columns [col_begin, col_end) of `row`.
struct Run {
    int32_t row = 0;
    int32_t col_begin = 0;
    int32_t col_end = 0;

    int32_t length() const { return col_end - col_begin; }
    friend bool operator==(const Run&, const Run&) = default;
};

/// Pixel-precise region stored as sorted, non-overlapping runs.
///
/// Pixel (i, j) is identified with the point (r = i, c = j); all box/region
/// interop uses pixel centers.
class BinaryRegion {
public:
    BinaryRegion() = default;
    /// Accepts runs in any order; sorts, drops empty runs, and merges overlaps.
    explicit BinaryRegion(std::vector<Run> runs);

    /// Region of all (row, col) in [0, height) x [0, width) for which `pred` holds.
    static BinaryRegion from_predicate(int height, int width,
                                       const std::function<bool(int, int)>& pred);
    /// Region of nonzero entries of a row-major mask.
    static BinaryRegion from_mask(int height, int width, std::span<const uint8_t> mask);
    /// Pixels whose centers lie inside the box (inclusive, small tolerance),
    /// optionally clipped to an image.
    static BinaryRegion rasterize(const OrientedBox& box, int image_height = -1, int image_width = -1);

    std::span<const Run> runs() const { return runs_; }
    int64_t area() const { return area_; }
    bool empty() const { return area_ == 0; }
    bool contains(int row, int col) const;

    /// Smallest axis-aligned box of the pixel centers. Empty region -> DomainError.
    AxisAlignedBox bounds() const;

    /// Rasterizes into a row-major mask of the given size; pixels outside are dropped.
    std::vector<uint8_t> to_mask(int height, int width) const;

    BinaryRegion intersect(const BinaryRegion& other) const;
    BinaryRegion subtract(const BinaryRegion& other) const;
    BinaryRegion translate(int d_row, int d_col) const;

    friend bool operator==(const BinaryRegion& a, const BinaryRegion& b) { return a.runs_ == b.runs_; }

private:
    std::vector<Run> runs_;
    int64_t area_ = 0;
};

int64_t intersection_area(const BinaryRegion& a, const BinaryRegion& b);

/// |a & b| / |a | b|; 0 when both are empty.
double mask_iou(const BinaryRegion& a, const BinaryRegion& b);

/// Center of gravity and central second moments M_ij = sum (r0 - r)^i (c0 - c)^j.
struct Moments {
    int64_t n = 0;
    double r0 = 0.0;
    double c0 = 0.0;
    double m20 = 0.0;
    double m02 = 0.0;
    double m11 = 0.0;
};

/// Exact moments (integer accumulation per run). Empty region -> DomainError.
Moments moments(const BinaryRegion& region);

struct OrientationResult {
    double phi = 0.0;  ///< in (-pi/2, pi/2]
    bool degenerate = false;
};

/// Orientation of the ellipse with the same second moments:
/// phi = -1/2 atan2(2 M11, M02 - M20). All-zero moments give phi = 0 and the
/// degenerate flag.
OrientationResult orientation(const BinaryRegion& region);

/// Region pixel farthest from the center of gravity; ties go to the smallest
/// row, then the smallest column.
Point2 farthest_pixel(const BinaryRegion& region);

/// Flips phi by pi when it points away from the farthest pixel. Result in (-pi, pi].
double correct_direction(const BinaryRegion& region, double phi);

/// Smallest box with orientation phi that encloses every pixel center.
/// Semi-axes are floored at kMinSemiAxis so single-pixel-thin regions still
/// give a valid box.
OrientedBox smallest_oriented_box_at(const BinaryRegion& region, double phi);

/// Minimum-area enclosing box of the pixel centers (rotating calipers over the
/// convex hull). l1 is the longer side; phi is canonicalized per ignore_direction.
OrientedBox smallest_obb(const BinaryRegion& region, bool ignore_direction = true);

/// Smallest axis-aligned box of the pixel centers as an oriented box with phi = 0.
OrientedBox smallest_aabb_box(const BinaryRegion& region);

/// Ground-truth box recipe.
///  - class without orientation: smallest axis-aligned box, phi = 0;
///  - oriented class, ignore_direction: smallest_obb;
///  - oriented class with direction: moment orientation, head/tail corrected,
///    enclosing box at that angle.
OrientedBox gt_box_from_mask(const BinaryRegion& region, bool class_is_oriented, bool ignore_direction);

struct RefineResult {
    OrientedBox box;
    bool changed = false;  ///< false when the region was empty or degenerate
};

/// Replaces only phi with the orientation of the region (orientation from mask).
RefineResult refine_orientation_from_mask(const OrientedBox& box, const BinaryRegion& region,
                                          bool ignore_direction);

/// Convex hull of the pixel centers, counterclockwise on screen.
std::vector<Point2> convex_hull(const BinaryRegion& region);

inline constexpr double kMinSemiAxis = 0.5;

}  // namespace obox
