#include "obox/nms.hpp"

#include <algorithm>
#include <numeric>

#include "obox/errors.hpp"

namespace obox {

void NmsConfig::validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!(min_score >= 0.0 && min_score <= 1.0)) throw ConfigError("nms: min_score must lie in [0, 1]");
    if (!in_unit(iou_thresh_class)) throw ConfigError("nms: class IoU threshold must lie in (0, 1]");
    if (!in_unit(iou_thresh_agnostic)) throw ConfigError("nms: agnostic IoU threshold must lie in (0, 1]");
}

std::vector<std::size_t> nms_indices(const std::vector<Detection>& dets, const NmsConfig& cfg, NmsStats* stats) {
    cfg.validate();
    NmsStats st;
    st.input = dets.size();

    std::vector<std::size_t> order;
    order.reserve(dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (dets[i].score >= cfg.min_score) order.push_back(i);
    }
    st.after_score = order.size();
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
    if (order.size() > cfg.max_pre_nms) order.resize(cfg.max_pre_nms);
    st.after_pre_nms = order.size();

    std::vector<OrientedBox> boxes(dets.size());
    for (std::size_t i : order) boxes[i] = cfg.axis_aligned ? from_aabb(to_aabb(dets[i].box)) : dets[i].box;
    auto overlap = [&](std::size_t a, std::size_t b) { return iou(boxes[a], boxes[b]); };

    // Class-specific stage; threshold 1.0 can never be exceeded.
    std::vector<std::size_t> survivors;
    survivors.reserve(order.size());
    if (cfg.iou_thresh_class >= 1.0) {
        survivors = order;
    } else {
        for (std::size_t cand : order) {
            bool keep = true;
            for (std::size_t k : survivors) {
                if (dets[k].class_id == dets[cand].class_id && overlap(k, cand) > cfg.iou_thresh_class) {
                    keep = false;
                    break;
                }
            }
            if (keep) survivors.push_back(cand);
        }
    }
    st.after_class = survivors.size();

    std::vector<std::size_t> kept;
    kept.reserve(survivors.size());
    if (cfg.iou_thresh_agnostic >= 1.0) {
        kept = survivors;
    } else {
        for (std::size_t cand : survivors) {
            bool keep = true;
            for (std::size_t k : kept) {
                if (overlap(k, cand) > cfg.iou_thresh_agnostic) {
                    keep = false;
                    break;
                }
            }
            if (keep) kept.push_back(cand);
        }
    }
    st.after_agnostic = kept.size();
    if (kept.size() > cfg.max_post_nms) kept.resize(cfg.max_post_nms);
    st.output = kept.size();
    if (stats) *stats = st;
    return kept;
}

std::vector<Detection> nms(const std::vector<Detection>& dets, const NmsConfig& cfg, NmsStats* stats) {
    std::vector<Detection> out;
    for (std::size_t i : nms_indices(dets, cfg, stats)) out.push_back(dets[i]);
    return out;
}

}  // namespace obox
