#pragma once

#include <cstddef>
#include <vector>

#include "obox/geometry.hpp"

namespace obox {

struct Detection {
    OrientedBox box;
    double score = 0.0;
    int class_id = 0;
};

struct NmsConfig {
    double min_score = 0.5;
    double iou_thresh_class = 0.3;     ///< 1.0 disables the class-specific stage
    double iou_thresh_agnostic = 0.3;  ///< 1.0 disables the class-agnostic stage
    std::size_t max_pre_nms = 256;
    std::size_t max_post_nms = 30;
    bool axis_aligned = false;  ///< compare enclosing axis-aligned boxes instead

    void validate() const;
};

/// Number of detections remaining after each stage.
struct NmsStats {
    std::size_t input = 0;
    std::size_t after_score = 0;
    std::size_t after_pre_nms = 0;
    std::size_t after_class = 0;
    std::size_t after_agnostic = 0;
    std::size_t output = 0;
};

/// Indices of kept detections in descending score order (ties by input index).
///
/// Stages: score filter, top max_pre_nms, greedy class-specific suppression,
/// greedy class-agnostic suppression, top max_post_nms. A detection is
/// suppressed when its IoU with an already kept one is strictly greater than
/// the threshold.
std::vector<std::size_t> nms_indices(const std::vector<Detection>& dets, const NmsConfig& cfg,
                                     NmsStats* stats = nullptr);

std::vector<Detection> nms(const std::vector<Detection>& dets, const NmsConfig& cfg, NmsStats* stats = nullptr);

}  // namespace obox
