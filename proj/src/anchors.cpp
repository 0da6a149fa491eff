#include "obox/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "obox/errors.hpp"
#include "obox/parallel.hpp"

namespace obox {

double AnchorGridSpec::stride(int level) { return std::ldexp(1.0, level); }

void AnchorGridSpec::validate() const {
    if (min_level > max_level) throw ConfigError("anchor spec: min_level > max_level");
    if (min_level < 0 || max_level > 16) throw ConfigError("anchor spec: levels must lie in [0, 16]");
    if (!(base_scale > 0.0) || !std::isfinite(base_scale)) throw ConfigError("anchor spec: base_scale must be positive");
    if (num_subscales < 1) throw ConfigError("anchor spec: num_subscales must be >= 1");
    if (aspect_ratios.empty()) throw ConfigError("anchor spec: empty aspect ratio list");
    if (angles.empty()) throw ConfigError("anchor spec: empty angle list");
    for (double rho : aspect_ratios) {
        if (!(rho > 0.0 && rho <= 1.0)) {
            throw ConfigError("anchor spec: aspect ratio " + std::to_string(rho) + " outside (0, 1]");
        }
    }
    for (double a : angles) {
        if (!std::isfinite(a)) throw ConfigError("anchor spec: non-finite angle");
    }
}

std::vector<AnchorLevel> generate_anchors(const AnchorGridSpec& spec, int image_height, int image_width) {
    spec.validate();
    if (image_height <= 0 || image_width <= 0) throw ConfigError("generate_anchors: image dimensions must be positive");

    std::vector<double> angles;
    for (double a : spec.angles) angles.push_back(normalize_angle(a, spec.ignore_direction));

    std::vector<AnchorLevel> out;
    for (int level = spec.min_level; level <= spec.max_level; ++level) {
        AnchorLevel lv;
        lv.level = level;
        lv.stride = AnchorGridSpec::stride(level);
        const int rows = static_cast<int>(std::ceil(image_height / lv.stride));
        const int cols = static_cast<int>(std::ceil(image_width / lv.stride));
        const double level_scale = spec.base_scale * std::ldexp(1.0, level - spec.min_level);

        // Shapes shared by every cell of this level.
        std::vector<OrientedBox> shapes;
        for (int k = 0; k < spec.num_subscales; ++k) {
            const double s = level_scale * std::exp2(static_cast<double>(k) / spec.num_subscales);
            for (double rho : spec.aspect_ratios) {
                const double sq = std::sqrt(rho);
                for (double phi : angles) shapes.push_back({0.0, 0.0, s / (2.0 * sq), s * sq / 2.0, phi});
            }
        }
        lv.boxes.reserve(static_cast<size_t>(rows) * cols * shapes.size());
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                for (OrientedBox b : shapes) {
                    b.r = lv.stride * (i + 0.5);
                    b.c = lv.stride * (j + 0.5);
                    lv.boxes.push_back(b);
                }
            }
        }
        out.push_back(std::move(lv));
    }
    return out;
}

std::vector<OrientedBox> flatten(const std::vector<AnchorLevel>& levels) {
    std::vector<OrientedBox> all;
    for (const auto& lv : levels) all.insert(all.end(), lv.boxes.begin(), lv.boxes.end());
    return all;
}

void AssignmentConfig::validate() const {
    if (!(fg_neg_thresh > 0.0 && fg_neg_thresh <= fg_pos_thresh && fg_pos_thresh < 1.0)) {
        throw ConfigError("assignment config: require 0 < fgNegThresh <= fgPosThresh < 1");
    }
}

std::vector<AnchorLabel> assign(const std::vector<OrientedBox>& anchors, const std::vector<OrientedBox>& gts,
                                const AssignmentConfig& cfg, AssignmentMetric metric) {
    cfg.validate();
    const size_t na = anchors.size();
    const size_t ng = gts.size();
    std::vector<AnchorLabel> labels(na, Background{});
    if (na == 0 || ng == 0) return labels;

    std::vector<double> overlap(na * ng);
    parallel_for(na, [&](size_t a) {
        for (size_t g = 0; g < ng; ++g) {
            overlap[a * ng + g] = metric == AssignmentMetric::ArIoU ? ar_iou(anchors[a], gts[g])
                                                                   : iou(anchors[a], gts[g]);
        }
    });

    std::vector<double> gt_best(ng, 0.0);
    for (size_t a = 0; a < na; ++a) {
        for (size_t g = 0; g < ng; ++g) gt_best[g] = std::max(gt_best[g], overlap[a * ng + g]);
    }

    for (size_t a = 0; a < na; ++a) {
        const double* row = &overlap[a * ng];
        size_t arg = 0;
        for (size_t g = 1; g < ng; ++g) {
            if (row[g] > row[arg]) arg = g;
        }
        const double m = row[arg];
        if (m >= cfg.fg_pos_thresh) {
            labels[a] = Foreground{arg};
            continue;
        }
        // GT for which this anchor is the best match, preferring the argmax.
        bool is_best = false;
        size_t best_gt = 0;
        if (gt_best[arg] > 0.0 && row[arg] == gt_best[arg]) {
            is_best = true;
            best_gt = arg;
        } else {
            for (size_t g = 0; g < ng; ++g) {
                if (gt_best[g] > 0.0 && row[g] == gt_best[g]) {
                    is_best = true;
                    best_gt = g;
                    break;
                }
            }
        }
        if (m >= cfg.fg_neg_thresh) {
            labels[a] = is_best ? AnchorLabel{Foreground{best_gt}} : AnchorLabel{Ignore{}};
        } else if (!cfg.swb2bg && is_best) {
            labels[a] = Foreground{best_gt};
        }
    }
    if (!cfg.swb2bg) {
        // A GT left without foreground takes its highest-overlap anchor that is
        // not the only foreground anchor of another GT.
        std::vector<size_t> fg_count(ng, 0);
        for (const auto& l : labels) {
            if (const auto* f = std::get_if<Foreground>(&l)) ++fg_count[f->gt_index];
        }
        for (size_t g = 0; g < ng; ++g) {
            if (fg_count[g] > 0 || gt_best[g] <= 0.0) continue;
            size_t pick = na;
            for (size_t a = 0; a < na; ++a) {
                const double v = overlap[a * ng + g];
                if (v <= 0.0 || (pick < na && v <= overlap[pick * ng + g])) continue;
                const auto* f = std::get_if<Foreground>(&labels[a]);
                if (f && fg_count[f->gt_index] <= 1) continue;
                pick = a;
            }
            if (pick == na) continue;
            if (const auto* f = std::get_if<Foreground>(&labels[pick])) --fg_count[f->gt_index];
            ++fg_count[g];
            labels[pick] = Foreground{g};
        }
    }
    return labels;
}

AssignmentCounts count_labels(const std::vector<AnchorLabel>& labels, std::size_t num_gts) {
    AssignmentCounts counts;
    counts.per_gt_foreground.assign(num_gts, 0);
    for (const auto& label : labels) {
        if (const auto* fg = std::get_if<Foreground>(&label)) {
            ++counts.foreground;
            if (fg->gt_index < num_gts) ++counts.per_gt_foreground[fg->gt_index];
        } else if (std::holds_alternative<Background>(label)) {
            ++counts.background;
        } else {
            ++counts.ignore;
        }
    }
    return counts;
}

}  // namespace obox
