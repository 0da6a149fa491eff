#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "obox/dataset.hpp"
#include "obox/eval.hpp"
#include "obox/roi.hpp"

namespace obox {

/// Standard deviations of the box perturbation. Center noise is in pixels,
/// length noise is on the log scale and angle noise in radians.
struct NoiseSpec {
    double center = 0.0;
    double length = 0.0;
    double angle = 0.0;

    /// Throws ConfigError for negative or non-finite values.
    void validate() const;
};

/// Learning-free stand-in for a detector.
///
/// Every GT box is perturbed by decoding seeded Gaussian deltas against it; the
/// GT mask is pooled to 28x28 over the GT box and decoded into the perturbed
/// box; the score is arIoU(perturbed, gt). Instance i uses a seed derived from
/// (seed, i). GTs without a mask yield detections without a mask.
std::vector<DetectionRecord> simulate_detections(std::span<const GroundTruthInstance> gts,
                                                 const DatasetConfig& config, const NoiseSpec& noise,
                                                 uint64_t seed);

/// Box from mask: replaces the whole box with the GT recipe applied to the
/// detection's mask and resets the axis-aligned box to the mask bounds.
/// Detections without a mask or with an empty one are dropped.
std::vector<DetectionRecord> boxes_from_masks(std::vector<DetectionRecord> dets, const DatasetConfig& config);

/// Orientation from mask: replaces only phi. Detections without a usable mask
/// are left untouched.
std::vector<DetectionRecord> apply_ofm(std::vector<DetectionRecord> dets, const DatasetConfig& config);

/// Runs nms separately on the detections of every image. Output is grouped by
/// image in first-appearance order, each group in nms order; stats are summed.
std::vector<DetectionRecord> nms_per_image(const std::vector<DetectionRecord>& dets, const NmsConfig& cfg,
                                           NmsStats* stats = nullptr);

/// n filled ellipses with semi-axes in [10, 60] px and uniform angles.
std::vector<BinaryRegion> random_ellipses(std::size_t n, uint64_t seed);

struct RoundtripStats {
    std::vector<double> iou;  ///< per region
    double mean = 0.0;
    double min = 0.0;
};

/// Pools each region to a grid over its smallest box of the given kind, decodes
/// it back into the same box and compares with the original region.
/// Throws DomainError for an empty region.
RoundtripStats mask_roundtrip(std::span<const BinaryRegion> regions, BoxKind kind, int grid = kMaskTargetSize,
                              double threshold = 0.5);

}  // namespace obox
