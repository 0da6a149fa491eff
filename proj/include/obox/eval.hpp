#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "obox/dataset.hpp"

namespace obox {

enum class IouKind { AABB, OBB, Mask };

struct EvalConfig {
    IouKind iou_kind = IouKind::Mask;
    std::vector<double> iou_thresholds = coco_thresholds();
    bool class_agnostic = false;

    /// 0.50, 0.55, ..., 0.95
    static std::vector<double> coco_thresholds();
    /// Thresholds must lie in (0, 1) and increase strictly. Throws ConfigError.
    void validate() const;
};

/// Class-averaged AP at one IoU threshold.
///
/// Per image, detections are visited by descending score (ties by input
/// order) and each one claims the unmatched GT of highest IoU >= threshold,
/// restricted to its own class unless class_agnostic. AP per class is the
/// 101-point interpolated area under the precision envelope; classes without
/// GT are excluded from the mean. Returns 0 when there is no GT at all.
double average_precision(std::span<const DetectionRecord> dets, std::span<const GroundTruthInstance> gts,
                         double iou_threshold, const EvalConfig& cfg);

/// Mean of average_precision over cfg.iou_thresholds.
double mean_average_precision(std::span<const DetectionRecord> dets, std::span<const GroundTruthInstance> gts,
                              const EvalConfig& cfg);

struct ApCurve {
    std::vector<double> thresholds;
    std::vector<double> ap;
    double map = 0.0;
};

/// AP for every threshold of cfg, sharing one IoU computation.
ApCurve ap_curve(std::span<const DetectionRecord> dets, std::span<const GroundTruthInstance> gts,
                 const EvalConfig& cfg);

enum class BoxKind { Axis, Oriented };

/// IoU between each mask and its smallest enclosing box of the given kind,
/// rasterized at pixel centers; averaged per class, then over classes.
/// Throws ValidationError when an instance has no mask.
double mean_box_mask_iou(std::span<const GroundTruthInstance> gts, BoxKind kind);

struct PerInstanceStats {
    std::size_t num_gt = 0;
    double mean_iou_all = 0.0;
    /// Mean over GTs with a positive maximum IoU; 0 with pos_empty set when there is none.
    double mean_iou_pos = 0.0;
    bool pos_empty = true;
    std::size_t num_fn_iou_075 = 0;
    std::size_t num_class_ok = 0;
};

/// For every GT, the maximum IoU over all detections of the same image,
/// independent of the predicted class. With class_check, counts GTs whose
/// best detection (first in input order on ties) carries the right class.
PerInstanceStats per_instance_stats(std::span<const DetectionRecord> dets, std::span<const GroundTruthInstance> gts,
                                    bool class_check, IouKind kind = IouKind::Mask);

/// IoU of one detection/GT pair under the given kind. Detections without a mask
/// score 0 under Mask; a GT without a mask throws ValidationError.
double pair_iou(const DetectionRecord& det, const GroundTruthInstance& gt, IouKind kind);

}  // namespace obox
