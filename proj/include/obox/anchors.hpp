#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "obox/geometry.hpp"

namespace obox {

/// Oriented anchor grid over a feature pyramid.
///
/// Level L has stride 2^L. The anchor scale at level L and subscale k is
/// base_scale * 2^(L - min_level) * 2^(k / num_subscales) pixels. For aspect
/// ratio rho <= 1 and scale s the semi-axes are l1 = s / (2 sqrt(rho)) and
/// l2 = s sqrt(rho) / 2, so the side lengths multiply to s^2.
struct AnchorGridSpec {
    int min_level = 3;
    int max_level = 5;
    double base_scale = 32.0;
    int num_subscales = 3;
    std::vector<double> aspect_ratios{0.5, 1.0};
    std::vector<double> angles{-kPi / 3, 0.0, kPi / 3};
    bool ignore_direction = true;

    static double stride(int level);
    /// Throws ConfigError on an invalid spec.
    void validate() const;
};

struct AnchorLevel {
    int level = 0;
    double stride = 0.0;
    std::vector<OrientedBox> boxes;
};

/// One anchor per (cell, subscale, ratio, angle), cells row-major, cell centers
/// at stride * (i + 0.5). The grid covers ceil(height / stride) x
/// ceil(width / stride) cells. Angles are canonicalized for the spec's
/// direction mode.
std::vector<AnchorLevel> generate_anchors(const AnchorGridSpec& spec, int image_height, int image_width);

/// Concatenation of all levels in level order.
std::vector<OrientedBox> flatten(const std::vector<AnchorLevel>& levels);

struct AssignmentConfig {
    double fg_pos_thresh = 0.5;
    double fg_neg_thresh = 0.3;
    bool swb2bg = false;

    /// RPN defaults.
    static AssignmentConfig rpn() { return {0.5, 0.3, false}; }
    /// Box head defaults.
    static AssignmentConfig rcnn_head() { return {0.7, 0.5, true}; }
    /// Mask head defaults.
    static AssignmentConfig mask_head() { return {0.7, 0.6, true}; }

    void validate() const;
};

/// Overlap used for assignment: arIoU for oriented anchors, exact IoU for the
/// axis-aligned baseline.
enum class AssignmentMetric { ArIoU, ExactIoU };

struct Foreground {
    std::size_t gt_index = 0;
    friend bool operator==(const Foreground&, const Foreground&) = default;
};
struct Background {
    friend bool operator==(const Background&, const Background&) = default;
};
struct Ignore {
    friend bool operator==(const Ignore&, const Ignore&) = default;
};
using AnchorLabel = std::variant<Foreground, Background, Ignore>;

/// Anchor-to-GT assignment.
///
/// With m the best overlap of an anchor over all GTs (ties to the lowest GT
/// index) and g its argmax:
///   m >= fg_pos_thresh                -> Foreground(g)
///   fg_neg_thresh <= m < fg_pos_thresh -> Foreground if the anchor attains the
///                                        best overlap of some GT, else Ignore
///   m < fg_neg_thresh                 -> Background, unless swb2bg is off and
///                                        the anchor attains the best overlap of
///                                        some GT
/// A GT's best overlap only counts when it is strictly positive. When an
/// anchor is the best for several GTs, g wins if it is among them, otherwise
/// the lowest index. With swb2bg off, a GT left without foreground takes its
/// highest-overlap positive anchor that is not the only foreground anchor of
/// another GT.
std::vector<AnchorLabel> assign(const std::vector<OrientedBox>& anchors, const std::vector<OrientedBox>& gts,
                                const AssignmentConfig& cfg, AssignmentMetric metric = AssignmentMetric::ArIoU);

struct AssignmentCounts {
    std::size_t foreground = 0;
    std::size_t background = 0;
    std::size_t ignore = 0;
    std::vector<std::size_t> per_gt_foreground;
};

AssignmentCounts count_labels(const std::vector<AnchorLabel>& labels, std::size_t num_gts);

}  // namespace obox
