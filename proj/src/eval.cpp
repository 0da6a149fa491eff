#include "obox/eval.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "obox/errors.hpp"
#include "obox/parallel.hpp"

namespace obox {

namespace {

constexpr int kRecallPoints = 101;

// Detections and GTs of one image with their pairwise IoUs.
struct ImageBlock {
    std::vector<std::size_t> dets;  // indices into the detection span, in global score order
    std::vector<std::size_t> gts;   // indices into the GT span
    std::vector<double> iou;        // dets.size() x gts.size()
};

struct Prepared {
    std::vector<ImageBlock> images;
    std::vector<std::size_t> score_order;  // all detections, descending score, ties by index
};

Prepared prepare(std::span<const DetectionRecord> dets, std::span<const GroundTruthInstance> gts, IouKind kind) {
    Prepared p;
    p.score_order.resize(dets.size());
    std::iota(p.score_order.begin(), p.score_order.end(), 0);
    std::stable_sort(p.score_order.begin(), p.score_order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].det.score > dets[b].det.score; });

    std::map<int, std::size_t> slot;
    auto block = [&](int image_id) -> ImageBlock& {
        auto [it, inserted] = slot.try_emplace(image_id, p.images.size());
        if (inserted) p.images.emplace_back();
        return p.images[it->second];
    };
    for (std::size_t g = 0; g < gts.size(); ++g) block(gts[g].image_id).gts.push_back(g);
    for (std::size_t d : p.score_order) block(dets[d].image_id).dets.push_back(d);

    for (const auto& gt : gts) {
        if (kind == IouKind::Mask && !gt.mask) {
            throw ValidationError("mask evaluation: ground truth instance without a mask (image " +
                                  std::to_string(gt.image_id) + ")");
        }
    }
    parallel_for(p.images.size(), [&](std::size_t i) {
        ImageBlock& b = p.images[i];
        b.iou.resize(b.dets.size() * b.gts.size());
        for (std::size_t a = 0; a < b.dets.size(); ++a) {
            for (std::size_t g = 0; g < b.gts.size(); ++g) {
                b.iou[a * b.gts.size() + g] = pair_iou(dets[b.dets[a]], gts[b.gts[g]], kind);
            }
        }
    });
    return p;
}

// 101-point interpolated AP of one class from its detections' TP flags in score order.
double interpolated_ap(const std::vector<bool>& tp_in_order, std::size_t num_gt) {
    if (num_gt == 0) return 0.0;
    const std::size_t n = tp_in_order.size();
    std::vector<double> precision(n), recall(n);
    std::size_t tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (tp_in_order[i]) ++tp;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
    }
    for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
    double sum = 0.0;
    std::size_t pos = 0;
    for (int k = 0; k < kRecallPoints; ++k) {
        const double r = static_cast<double>(k) / (kRecallPoints - 1);
        while (pos < n && recall[pos] < r) ++pos;
        if (pos < n) sum += precision[pos];
    }
    return sum / kRecallPoints;
}

double ap_at(const Prepared& p, std::span<const DetectionRecord> dets, std::span<const GroundTruthInstance> gts,
             double threshold, bool agnostic) {
    std::vector<bool> is_tp(dets.size(), false);
    for (const ImageBlock& b : p.images) {
        std::vector<bool> taken(b.gts.size(), false);
        for (std::size_t a = 0; a < b.dets.size(); ++a) {
            const DetectionRecord& d = dets[b.dets[a]];
            double best = threshold;
            std::size_t best_g = b.gts.size();
            for (std::size_t g = 0; g < b.gts.size(); ++g) {
                if (taken[g]) continue;
                if (!agnostic && gts[b.gts[g]].class_id != d.det.class_id) continue;
                const double v = b.iou[a * b.gts.size() + g];
                if (v >= best && (best_g == b.gts.size() || v > best)) {
                    best = v;
                    best_g = g;
                }
            }
            if (best_g < b.gts.size()) {
                taken[best_g] = true;
                is_tp[b.dets[a]] = true;
            }
        }
    }

    if (agnostic) {
        std::vector<bool> flags;
        flags.reserve(dets.size());
        for (std::size_t d : p.score_order) flags.push_back(is_tp[d]);
        return gts.empty() ? 0.0 : interpolated_ap(flags, gts.size());
    }

    std::map<int, std::size_t> gt_per_class;
    for (const auto& gt : gts) ++gt_per_class[gt.class_id];
    if (gt_per_class.empty()) return 0.0;
    double total = 0.0;
    for (const auto& [cls, count] : gt_per_class) {
        std::vector<bool> flags;
        for (std::size_t d : p.score_order) {
            if (dets[d].det.class_id == cls) flags.push_back(is_tp[d]);
        }
        total += interpolated_ap(flags, count);
    }
    return total / static_cast<double>(gt_per_class.size());
}

}  // namespace

std::vector<double> EvalConfig::coco_thresholds() {
    std::vector<double> t;
    for (int k = 0; k < 10; ++k) t.push_back(0.5 + 0.05 * k);
    return t;
}

void EvalConfig::validate() const {
    if (iou_thresholds.empty()) throw ConfigError("eval: empty threshold list");
    for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
        const double t = iou_thresholds[i];
        if (!(t > 0.0 && t < 1.0)) throw ConfigError("eval: IoU thresholds must lie in (0, 1)");
        if (i > 0 && !(t > iou_thresholds[i - 1])) throw ConfigError("eval: IoU thresholds must increase strictly");
    }
}

double pair_iou(const DetectionRecord& det, const GroundTruthInstance& gt, IouKind kind) {
    switch (kind) {
        case IouKind::AABB:
            return iou(det.axis_box(), gt.aabb);
        case IouKind::OBB:
            return iou(det.det.box, gt.obb);
        case IouKind::Mask:
            if (!gt.mask) throw ValidationError("mask evaluation: ground truth instance without a mask");
            return det.mask ? mask_iou(*det.mask, *gt.mask) : 0.0;
    }
    return 0.0;
}

double average_precision(std::span<const DetectionRecord> dets, std::span<const GroundTruthInstance> gts,
                         double iou_threshold, const EvalConfig& cfg) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) throw ConfigError("eval: IoU threshold must lie in (0, 1)");
    const Prepared p = prepare(dets, gts, cfg.iou_kind);
    return ap_at(p, dets, gts, iou_threshold, cfg.class_agnostic);
}

ApCurve ap_curve(std::span<const DetectionRecord> dets, std::span<const GroundTruthInstance> gts,
                 const EvalConfig& cfg) {
    cfg.validate();
    const Prepared p = prepare(dets, gts, cfg.iou_kind);
    ApCurve curve;
    curve.thresholds = cfg.iou_thresholds;
    for (double t : cfg.iou_thresholds) curve.ap.push_back(ap_at(p, dets, gts, t, cfg.class_agnostic));
    curve.map = std::accumulate(curve.ap.begin(), curve.ap.end(), 0.0) / static_cast<double>(curve.ap.size());
    return curve;
}

double mean_average_precision(std::span<const DetectionRecord> dets, std::span<const GroundTruthInstance> gts,
                              const EvalConfig& cfg) {
    return ap_curve(dets, gts, cfg).map;
}

double mean_box_mask_iou(std::span<const GroundTruthInstance> gts, BoxKind kind) {
    std::map<int, std::pair<double, std::size_t>> per_class;
    for (const auto& gt : gts) {
        if (!gt.mask) throw ValidationError("mean_box_mask_iou: instance without a mask");
        if (gt.mask->empty()) continue;
        const OrientedBox box = kind == BoxKind::Axis ? smallest_aabb_box(*gt.mask) : smallest_obb(*gt.mask, true);
        const double v = mask_iou(*gt.mask, BinaryRegion::rasterize(box));
        auto& acc = per_class[gt.class_id];
        acc.first += v;
        acc.second += 1;
    }
    if (per_class.empty()) return 0.0;
    double total = 0.0;
    for (const auto& [cls, acc] : per_class) total += acc.first / static_cast<double>(acc.second);
    return total / static_cast<double>(per_class.size());
}

PerInstanceStats per_instance_stats(std::span<const DetectionRecord> dets, std::span<const GroundTruthInstance> gts,
                                    bool class_check, IouKind kind) {
    PerInstanceStats s;
    s.num_gt = gts.size();
    std::map<int, std::vector<std::size_t>> dets_by_image;
    for (std::size_t d = 0; d < dets.size(); ++d) dets_by_image[dets[d].image_id].push_back(d);

    if (kind == IouKind::Mask) {
        for (const auto& gt : gts) {
            if (!gt.mask) throw ValidationError("per_instance_stats: ground truth instance without a mask");
        }
    }

    std::vector<double> best(gts.size(), 0.0);
    std::vector<std::size_t> arg(gts.size(), dets.size());
    parallel_for(gts.size(), [&](std::size_t g) {
        auto it = dets_by_image.find(gts[g].image_id);
        if (it == dets_by_image.end()) return;
        for (std::size_t d : it->second) {
            const double v = pair_iou(dets[d], gts[g], kind);
            if (v > best[g]) {
                best[g] = v;
                arg[g] = d;
            }
        }
    });

    double sum_all = 0.0, sum_pos = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
        sum_all += best[g];
        if (best[g] > 0.0) {
            sum_pos += best[g];
            ++n_pos;
        }
        if (best[g] < 0.75) ++s.num_fn_iou_075;
        if (class_check && arg[g] < dets.size() && dets[arg[g]].det.class_id == gts[g].class_id) ++s.num_class_ok;
    }
    s.mean_iou_all = gts.empty() ? 0.0 : sum_all / static_cast<double>(gts.size());
    s.pos_empty = n_pos == 0;
    s.mean_iou_pos = n_pos == 0 ? 0.0 : sum_pos / static_cast<double>(n_pos);
    return s;
}

}  // namespace obox
