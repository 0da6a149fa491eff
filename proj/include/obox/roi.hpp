#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "obox/geometry.hpp"
#include "obox/region.hpp"

namespace obox {

/// Row-major multi-channel grid: value(ch, r, c) = data[(ch * height + r) * width + c].
struct FeatureMap {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(int channels, int height, int width, double fill = 0.0);

    double& at(int ch, int r, int c) { return data[(static_cast<std::size_t>(ch) * height + r) * width + c]; }
    double at(int ch, int r, int c) const { return data[(static_cast<std::size_t>(ch) * height + r) * width + c]; }

    /// Bilinear sample at a subpixel position; pixels outside the map count as zero.
    double sample(int ch, double r, double c) const;
};

/// Square probability grid (14 for pooled features, 28 for mask targets/outputs).
struct MaskGrid {
    int size = 0;
    std::vector<double> values;

    MaskGrid() = default;
    explicit MaskGrid(int size, double fill = 0.0)
        : size(size), values(static_cast<std::size_t>(size) * size, fill) {}

    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * size + c]; }
    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * size + c]; }
    double mean() const;
};

inline constexpr int kMaskPoolSize = 14;
inline constexpr int kMaskTargetSize = 28;

/// Image-space position of the center of cell (i, j) of an out_h x out_w grid
/// laid over the box. Columns run along the l1-axis, rows along the l2-axis.
Point2 grid_cell_center(const OrientedBox& box, int out_h, int out_w, int i, int j);

/// Oriented RoI pooling: one bilinear sample per output cell center.
FeatureMap roi_pool(const FeatureMap& fm, const OrientedBox& box, int out_h, int out_w);

/// One binary channel per region ("painted" GT masks).
FeatureMap paint_masks(std::span<const BinaryRegion> masks, int height, int width);

/// Mask target of one channel of a painted GT stack. Throws IndexError on a bad channel.
MaskGrid pool_mask_target(const FeatureMap& gt_masks, int channel, const OrientedBox& box,
                          int grid = kMaskTargetSize);

/// Same sampling directly from a run-length region.
MaskGrid pool_mask_target(const BinaryRegion& mask, const OrientedBox& box, int grid = kMaskTargetSize);

/// Fits mask probabilities to a box: every image pixel whose center lies in the
/// box is mapped back into grid coordinates and kept iff the bilinear
/// probability there is >= threshold.
BinaryRegion decode_mask(const MaskGrid& probs, const OrientedBox& box, int image_h, int image_w,
                         double threshold = 0.5);

struct RoiRouting {
    int roi_min_level = 3;
    int roi_max_level = 5;
    double canonical_scale = 224.0;
    int canonical_level = 5;

    void validate() const;
};

/// clamp(canonical_level + floor(log2(sqrt(area) / canonical_scale)), min, max)
int route_level(const OrientedBox& box, const RoiRouting& routing);

}  // namespace obox
