#include "obox/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>

#include "obox/errors.hpp"
#include "obox/parallel.hpp"
#include "obox/rng.hpp"
#include "obox/targets.hpp"

namespace obox {

void NoiseSpec::validate() const {
    for (double s : {center, length, angle}) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("noise: standard deviations must be finite and >= 0");
    }
}

namespace {

DetectionRecord simulate_one(const GroundTruthInstance& gt, const DatasetConfig& config, const NoiseSpec& noise,
                             uint64_t seed) {
    Rng rng(seed);
    const double mean_axis = 0.5 * (gt.obb.l1 + gt.obb.l2);
    BoxDeltas d;
    d.d_r = noise.center * rng.normal() / mean_axis;
    d.d_c = noise.center * rng.normal() / mean_axis;
    d.d_l1 = noise.length * rng.normal();
    d.d_l2 = noise.length * rng.normal();
    d.d_phi = noise.angle * rng.normal();
    OrientedBox box = decode(gt.obb, d, config.ignore_direction);
    box.l1 = std::max(box.l1, kMinSemiAxis);
    box.l2 = std::max(box.l2, kMinSemiAxis);

    DetectionRecord rec;
    rec.image_id = gt.image_id;
    rec.det = {box, std::clamp(ar_iou(box, gt.obb), 0.0, 1.0), gt.class_id};
    if (gt.mask && !gt.mask->empty()) {
        const MaskGrid probs = pool_mask_target(*gt.mask, gt.obb, kMaskTargetSize);
        const AxisAlignedBox ext = to_aabb(box);
        const int h = std::max(1, static_cast<int>(std::ceil(ext.r_max)) + 1);
        const int w = std::max(1, static_cast<int>(std::ceil(ext.c_max)) + 1);
        BinaryRegion mask = decode_mask(probs, box, h, w);
        if (!mask.empty()) {
            rec.aabb = mask.bounds();
            rec.mask = std::move(mask);
        }
    }
    return rec;
}

}  // namespace

std::vector<DetectionRecord> simulate_detections(std::span<const GroundTruthInstance> gts,
                                                 const DatasetConfig& config, const NoiseSpec& noise,
                                                 uint64_t seed) {
    noise.validate();
    std::vector<DetectionRecord> out(gts.size());
    std::vector<std::exception_ptr> errors(gts.size());
    parallel_for(gts.size(), [&](std::size_t i) {
        try {
            out[i] = simulate_one(gts[i], config, noise, Rng::derive(seed, i));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

std::vector<DetectionRecord> boxes_from_masks(std::vector<DetectionRecord> dets, const DatasetConfig& config) {
    std::vector<DetectionRecord> out;
    out.reserve(dets.size());
    for (DetectionRecord& d : dets) {
        if (!d.mask || d.mask->empty()) continue;
        d.det.box = gt_box_from_mask(*d.mask, config.class_is_oriented(d.det.class_id), config.ignore_direction);
        d.aabb = d.mask->bounds();
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<DetectionRecord> apply_ofm(std::vector<DetectionRecord> dets, const DatasetConfig& config) {
    for (DetectionRecord& d : dets) {
        if (!d.mask || !config.class_is_oriented(d.det.class_id)) continue;
        d.det.box = refine_orientation_from_mask(d.det.box, *d.mask, config.ignore_direction).box;
    }
    return dets;
}

std::vector<DetectionRecord> nms_per_image(const std::vector<DetectionRecord>& dets, const NmsConfig& cfg,
                                           NmsStats* stats) {
    cfg.validate();
    std::vector<int> order;
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        auto [it, inserted] = groups.try_emplace(dets[i].image_id);
        if (inserted) order.push_back(dets[i].image_id);
        it->second.push_back(i);
    }
    NmsStats total;
    std::vector<DetectionRecord> out;
    for (int image : order) {
        const auto& idx = groups[image];
        std::vector<Detection> plain;
        plain.reserve(idx.size());
        for (std::size_t i : idx) plain.push_back(dets[i].det);
        NmsStats s;
        for (std::size_t k : nms_indices(plain, cfg, &s)) out.push_back(dets[idx[k]]);
        total.input += s.input;
        total.after_score += s.after_score;
        total.after_pre_nms += s.after_pre_nms;
        total.after_class += s.after_class;
        total.after_agnostic += s.after_agnostic;
        total.output += s.output;
    }
    if (stats) *stats = total;
    return out;
}

std::vector<BinaryRegion> random_ellipses(std::size_t n, uint64_t seed) {
    Rng rng(seed);
    std::vector<BinaryRegion> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.uniform(10.0, 60.0);
        const double b = rng.uniform(10.0, 60.0);
        const double phi = rng.uniform(-kPi, kPi);
        const double cr = 64.0 + rng.uniform();
        const double cc = 64.0 + rng.uniform();
        const Point2 u = major_axis(phi);
        const Point2 v = minor_axis(phi);
        out.push_back(BinaryRegion::from_predicate(129, 129, [&](int r, int c) {
            const double dr = r - cr;
            const double dc = c - cc;
            const double x = (dr * u.r + dc * u.c) / a;
            const double y = (dr * v.r + dc * v.c) / b;
            return x * x + y * y <= 1.0;
        }));
    }
    return out;
}

RoundtripStats mask_roundtrip(std::span<const BinaryRegion> regions, BoxKind kind, int grid, double threshold) {
    if (grid < 1) throw ConfigError("mask_roundtrip: grid must be >= 1");
    constexpr int kMargin = 4;
    RoundtripStats s;
    s.iou.resize(regions.size());
    for (const auto& r : regions) {
        if (r.empty()) throw DomainError("mask_roundtrip: empty region");
    }
    parallel_for(regions.size(), [&](std::size_t i) {
        const AxisAlignedBox b = regions[i].bounds();
        const BinaryRegion region = regions[i].translate(kMargin - static_cast<int>(b.r_min),
                                                         kMargin - static_cast<int>(b.c_min));
        const OrientedBox box = kind == BoxKind::Axis ? smallest_aabb_box(region) : smallest_obb(region, true);
        const MaskGrid probs = pool_mask_target(region, box, grid);
        const int h = static_cast<int>(b.height()) + 2 * kMargin + 1;
        const int w = static_cast<int>(b.width()) + 2 * kMargin + 1;
        s.iou[i] = mask_iou(region, decode_mask(probs, box, h, w, threshold));
    });
    if (!s.iou.empty()) {
        double sum = 0.0;
        for (double v : s.iou) sum += v;
        s.mean = sum / static_cast<double>(s.iou.size());
        s.min = *std::min_element(s.iou.begin(), s.iou.end());
    }
    return s;
}

}  // namespace obox
