#include "obox/obox.h"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <json.hpp>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "obox/anchors.hpp"
#include "obox/bench.hpp"
#include "obox/dataset.hpp"
#include "obox/errors.hpp"
#include "obox/eval.hpp"
#include "obox/pipeline.hpp"
#include "obox/roi.hpp"
#include "obox/schedule.hpp"
#include "obox/synth.hpp"
#include "obox/targets.hpp"

struct obox_dataset {
    obox::Dataset data;
};

struct obox_detections {
    std::vector<obox::DetectionRecord> records;
};

struct obox_anchors {
    std::vector<obox::AnchorLevel> levels;
    std::vector<obox::OrientedBox> flat;
};

struct obox_eval_result {
    obox::IouKind kind = obox::IouKind::Mask;
    bool agnostic = false;
    obox::ApCurve curve;
    obox::PerInstanceStats stats;
    bool has_box_mask_iou = false;
    double box_mask_iou_oriented = 0.0;
    double box_mask_iou_axis = 0.0;
    std::size_t num_detections = 0;
};

struct obox_dlw {
    obox::DlwConfig cfg;
    obox::DlwState state;
};

namespace {

thread_local std::string g_last_error;

class InvalidArgument : public obox::Error {
public:
    using Error::Error;
};

obox_status fail(obox_status status, const char* what) {
    g_last_error = what;
    return status;
}

template <class F>
obox_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return OBOX_OK;
    } catch (const InvalidArgument& e) {
        return fail(OBOX_ERR_INVALID_ARGUMENT, e.what());
    } catch (const obox::IndexError& e) {
        return fail(OBOX_ERR_INVALID_ARGUMENT, e.what());
    } catch (const obox::DomainError& e) {
        return fail(OBOX_ERR_DOMAIN, e.what());
    } catch (const obox::ParseError& e) {
        return fail(OBOX_ERR_PARSE, e.what());
    } catch (const obox::ValidationError& e) {
        return fail(OBOX_ERR_VALIDATION, e.what());
    } catch (const obox::ConfigError& e) {
        return fail(OBOX_ERR_CONFIG, e.what());
    } catch (const obox::IoError& e) {
        return fail(OBOX_ERR_IO, e.what());
    } catch (const obox::GenerationError& e) {
        return fail(OBOX_ERR_GENERATION, e.what());
    } catch (const std::bad_alloc&) {
        return fail(OBOX_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(OBOX_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(OBOX_ERR_INTERNAL, "unknown error");
    }
}

template <class T>
void require(const T* p, const char* name) {
    if (p == nullptr) throw InvalidArgument(std::string("null argument: ") + name);
}

obox::OrientedBox to_core(const obox_box& b) { return {b.r, b.c, b.l1, b.l2, b.phi}; }
obox_box to_c(const obox::OrientedBox& b) { return {b.r, b.c, b.l1, b.l2, b.phi}; }

obox::NmsConfig to_core(const obox_nms_config& c) {
    obox::NmsConfig n;
    n.min_score = c.min_score;
    n.iou_thresh_class = c.iou_class;
    n.iou_thresh_agnostic = c.iou_agnostic;
    n.max_pre_nms = c.max_pre;
    n.max_post_nms = c.max_post;
    n.axis_aligned = c.axis_aligned != 0;
    return n;
}

obox_nms_stats to_c(const obox::NmsStats& s) {
    return {s.input, s.after_score, s.after_pre_nms, s.after_class, s.after_agnostic, s.output};
}

obox::DlwConfig to_core(const obox_dlw_config& c) {
    obox::DlwConfig d;
    d.ilw_box = c.ilw_box;
    d.ilw_cls = c.ilw_cls;
    d.flw_box = c.flw_box;
    d.flw_cls = c.flw_cls;
    d.i_tl_rpn = c.i_tl_rpn;
    d.delta_tl_rpn = c.delta_tl_rpn;
    d.n_dlw = c.n_dlw;
    d.window = c.window;
    return d;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

const char* kind_name(obox::IouKind k) {
    switch (k) {
        case obox::IouKind::AABB:
            return "aabb";
        case obox::IouKind::OBB:
            return "obb";
        case obox::IouKind::Mask:
            return "mask";
    }
    return "?";
}

nlohmann::ordered_json metrics_json(const obox_eval_result& r) {
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["schema"] = 1;
    doc["kind"] = kind_name(r.kind);
    doc["class_agnostic"] = r.agnostic;
    doc["num_gt"] = r.stats.num_gt;
    doc["num_detections"] = r.num_detections;
    doc["mAP"] = r.curve.map;
    ordered_json per = ordered_json::array();
    for (std::size_t i = 0; i < r.curve.thresholds.size(); ++i) {
        per.push_back({{"threshold", r.curve.thresholds[i]}, {"ap", r.curve.ap[i]}});
    }
    doc["per_threshold"] = per;
    ordered_json bm;
    if (r.has_box_mask_iou) {
        bm["oriented"] = r.box_mask_iou_oriented;
        bm["axis"] = r.box_mask_iou_axis;
    } else {
        bm["oriented"] = nullptr;
        bm["axis"] = nullptr;
    }
    doc["mean_box_mask_iou"] = bm;
    ordered_json pi;
    pi["num_gt"] = r.stats.num_gt;
    pi["mean_iou_all"] = r.stats.mean_iou_all;
    if (r.stats.pos_empty) {
        pi["mean_iou_pos"] = nullptr;
    } else {
        pi["mean_iou_pos"] = r.stats.mean_iou_pos;
    }
    pi["num_fn_iou_075"] = r.stats.num_fn_iou_075;
    pi["num_class_ok"] = r.stats.num_class_ok;
    doc["per_instance"] = pi;
    return doc;
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

extern "C" {

const char* obox_last_error(void) { return g_last_error.c_str(); }

const char* obox_status_name(obox_status status) {
    switch (status) {
        case OBOX_OK:
            return "ok";
        case OBOX_ERR_INVALID_ARGUMENT:
            return "invalid argument";
        case OBOX_ERR_DOMAIN:
            return "domain error";
        case OBOX_ERR_PARSE:
            return "parse error";
        case OBOX_ERR_VALIDATION:
            return "validation error";
        case OBOX_ERR_CONFIG:
            return "configuration error";
        case OBOX_ERR_IO:
            return "I/O error";
        case OBOX_ERR_GENERATION:
            return "generation error";
        case OBOX_ERR_INTERNAL:
            return "internal error";
    }
    return "unknown status";
}

const char* obox_version(void) { return "1.0.0"; }

void obox_string_free(char* s) { std::free(s); }

obox_status obox_iou(const obox_box* a, const obox_box* b, double* out) {
    return guarded([&] {
        require(a, "a");
        require(b, "b");
        require(out, "out");
        obox::validate(to_core(*a));
        obox::validate(to_core(*b));
        *out = obox::iou(to_core(*a), to_core(*b));
    });
}

obox_status obox_ar_iou(const obox_box* a, const obox_box* b, double* out) {
    return guarded([&] {
        require(a, "a");
        require(b, "b");
        require(out, "out");
        obox::validate(to_core(*a));
        obox::validate(to_core(*b));
        *out = obox::ar_iou(to_core(*a), to_core(*b));
    });
}

obox_status obox_normalize_angle(double phi, int ignore_direction, double* out) {
    return guarded([&] {
        require(out, "out");
        *out = obox::normalize_angle(phi, ignore_direction != 0);
    });
}

obox_status obox_encode(const obox_box* anchor, const obox_box* gt, int ignore_direction, obox_deltas* out) {
    return guarded([&] {
        require(anchor, "anchor");
        require(gt, "gt");
        require(out, "out");
        const obox::BoxDeltas d = obox::encode(to_core(*anchor), to_core(*gt), ignore_direction != 0);
        *out = {d.d_r, d.d_c, d.d_l1, d.d_l2, d.d_phi};
    });
}

obox_status obox_decode(const obox_box* anchor, const obox_deltas* deltas, int ignore_direction, obox_box* out) {
    return guarded([&] {
        require(anchor, "anchor");
        require(deltas, "deltas");
        require(out, "out");
        const obox::BoxDeltas d{deltas->d_r, deltas->d_c, deltas->d_l1, deltas->d_l2, deltas->d_phi};
        *out = to_c(obox::decode(to_core(*anchor), d, ignore_direction != 0));
    });
}

obox_status obox_route_level(const obox_box* box, int min_level, int max_level, double canonical_scale,
                             int canonical_level, int* out) {
    return guarded([&] {
        require(box, "box");
        require(out, "out");
        *out = obox::route_level(to_core(*box), {min_level, max_level, canonical_scale, canonical_level});
    });
}

void obox_nms_config_default(obox_nms_config* cfg) {
    if (!cfg) return;
    const obox::NmsConfig d;
    *cfg = {d.min_score, d.iou_thresh_class, d.iou_thresh_agnostic, d.max_pre_nms, d.max_post_nms, 0};
}

obox_status obox_nms(const obox_box* boxes, const double* scores, const int* class_ids, size_t n,
                     const obox_nms_config* cfg, size_t* keep, size_t* num_keep, obox_nms_stats* stats) {
    return guarded([&] {
        require(cfg, "cfg");
        require(num_keep, "num_keep");
        if (n > 0) {
            require(boxes, "boxes");
            require(scores, "scores");
            require(class_ids, "class_ids");
            require(keep, "keep");
        }
        std::vector<obox::Detection> dets(n);
        for (size_t i = 0; i < n; ++i) dets[i] = {to_core(boxes[i]), scores[i], class_ids[i]};
        obox::NmsStats s;
        const auto kept = obox::nms_indices(dets, to_core(*cfg), &s);
        for (size_t i = 0; i < kept.size(); ++i) keep[i] = kept[i];
        *num_keep = kept.size();
        if (stats) *stats = to_c(s);
    });
}

obox_status obox_dataset_load(const char* path, obox_dataset** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new obox_dataset{obox::load_annotations(path)};
    });
}

obox_status obox_dataset_save(const obox_dataset* ds, const char* path) {
    return guarded([&] {
        require(ds, "ds");
        require(path, "path");
        obox::save_annotations(path, ds->data);
    });
}

void obox_dataset_free(obox_dataset* ds) { delete ds; }

size_t obox_dataset_size(const obox_dataset* ds) { return ds ? ds->data.instances.size() : 0; }

int obox_dataset_ignore_direction(const obox_dataset* ds) { return ds && ds->data.config.ignore_direction ? 1 : 0; }

size_t obox_dataset_warning_count(const obox_dataset* ds) { return ds ? ds->data.warnings.size() : 0; }

const char* obox_dataset_warning(const obox_dataset* ds, size_t i) {
    if (!ds || i >= ds->data.warnings.size()) return nullptr;
    return ds->data.warnings[i].c_str();
}

obox_status obox_dataset_get(const obox_dataset* ds, size_t i, int* image_id, int* class_id, obox_box* box,
                             int64_t* mask_area, int* mask_supervised) {
    return guarded([&] {
        require(ds, "ds");
        if (i >= ds->data.instances.size()) throw InvalidArgument("instance index out of range");
        const auto& gt = ds->data.instances[i];
        if (image_id) *image_id = gt.image_id;
        if (class_id) *class_id = gt.class_id;
        if (box) *box = to_c(gt.obb);
        if (mask_area) *mask_area = gt.mask ? gt.mask->area() : -1;
        if (mask_supervised) *mask_supervised = gt.mask_supervised ? 1 : 0;
    });
}

obox_status obox_dataset_subsample_masks(obox_dataset* ds, double fraction, uint64_t seed) {
    return guarded([&] {
        require(ds, "ds");
        ds->data.instances = obox::subsample_masks(std::move(ds->data.instances), fraction, seed);
    });
}

obox_status obox_dataset_mean_box_mask_iou(const obox_dataset* ds, int oriented, double* out) {
    return guarded([&] {
        require(ds, "ds");
        require(out, "out");
        *out = obox::mean_box_mask_iou(ds->data.instances,
                                       oriented ? obox::BoxKind::Oriented : obox::BoxKind::Axis);
    });
}

obox_status obox_detections_load(const char* path, obox_detections** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new obox_detections{obox::load_detections(path)};
    });
}

obox_status obox_detections_save(const obox_detections* dets, const char* path) {
    return guarded([&] {
        require(dets, "dets");
        require(path, "path");
        obox::save_detections(path, dets->records);
    });
}

obox_status obox_detections_create(const int* image_ids, const int* class_ids, const double* scores,
                                   const obox_box* boxes, size_t n, obox_detections** out) {
    return guarded([&] {
        require(out, "out");
        if (n > 0) {
            require(image_ids, "image_ids");
            require(class_ids, "class_ids");
            require(scores, "scores");
            require(boxes, "boxes");
        }
        auto d = std::make_unique<obox_detections>();
        d->records.resize(n);
        for (size_t i = 0; i < n; ++i) {
            obox::validate(to_core(boxes[i]));
            if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
                throw obox::ValidationError("detection " + std::to_string(i) + ": score outside [0, 1]");
            }
            d->records[i].image_id = image_ids[i];
            d->records[i].det = {to_core(boxes[i]), scores[i], class_ids[i]};
        }
        *out = d.release();
    });
}

void obox_detections_free(obox_detections* dets) { delete dets; }

size_t obox_detections_size(const obox_detections* dets) { return dets ? dets->records.size() : 0; }

obox_status obox_detections_get(const obox_detections* dets, size_t i, int* image_id, int* class_id, double* score,
                                obox_box* box, int64_t* mask_area) {
    return guarded([&] {
        require(dets, "dets");
        if (i >= dets->records.size()) throw InvalidArgument("detection index out of range");
        const auto& d = dets->records[i];
        if (image_id) *image_id = d.image_id;
        if (class_id) *class_id = d.det.class_id;
        if (score) *score = d.det.score;
        if (box) *box = to_c(d.det.box);
        if (mask_area) *mask_area = d.mask ? d.mask->area() : -1;
    });
}

obox_status obox_detections_nms(const obox_detections* in, const obox_nms_config* cfg, obox_detections** out,
                                obox_nms_stats* stats) {
    return guarded([&] {
        require(in, "in");
        require(cfg, "cfg");
        require(out, "out");
        obox::NmsStats s;
        auto kept = obox::nms_per_image(in->records, to_core(*cfg), &s);
        *out = new obox_detections{std::move(kept)};
        if (stats) *stats = to_c(s);
    });
}

obox_status obox_anchors_generate(const char* spec_path, int height, int width, obox_anchors** out) {
    return guarded([&] {
        require(out, "out");
        if (height < 1 || width < 1) throw InvalidArgument("image size must be positive");
        const obox::AnchorGridSpec spec = spec_path ? obox::load_anchor_spec(spec_path) : obox::AnchorGridSpec{};
        auto a = std::make_unique<obox_anchors>();
        a->levels = obox::generate_anchors(spec, height, width);
        a->flat = obox::flatten(a->levels);
        *out = a.release();
    });
}

obox_status obox_anchors_load(const char* path, obox_anchors** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        auto a = std::make_unique<obox_anchors>();
        a->levels = obox::load_anchors(path);
        a->flat = obox::flatten(a->levels);
        *out = a.release();
    });
}

obox_status obox_anchors_save(const obox_anchors* anchors, const char* path) {
    return guarded([&] {
        require(anchors, "anchors");
        require(path, "path");
        obox::save_anchors(path, anchors->levels);
    });
}

void obox_anchors_free(obox_anchors* anchors) { delete anchors; }

size_t obox_anchors_size(const obox_anchors* anchors) { return anchors ? anchors->flat.size() : 0; }

obox_status obox_anchors_get(const obox_anchors* anchors, size_t i, obox_box* box) {
    return guarded([&] {
        require(anchors, "anchors");
        require(box, "box");
        if (i >= anchors->flat.size()) throw InvalidArgument("anchor index out of range");
        *box = to_c(anchors->flat[i]);
    });
}

void obox_assign_config_default(obox_assign_config* cfg) {
    if (!cfg) return;
    const auto d = obox::AssignmentConfig::rpn();
    *cfg = {d.fg_pos_thresh, d.fg_neg_thresh, d.swb2bg ? 1 : 0, 0};
}

obox_status obox_assign_stats(const obox_dataset* gt, const obox_anchors* anchors, const obox_assign_config* cfg,
                              char** json_out) {
    return guarded([&] {
        require(gt, "gt");
        require(anchors, "anchors");
        require(cfg, "cfg");
        require(json_out, "json_out");
        obox::AssignmentConfig ac{cfg->fg_pos, cfg->fg_neg, cfg->swb2bg != 0};
        ac.validate();
        const auto metric = cfg->exact_iou ? obox::AssignmentMetric::ExactIoU : obox::AssignmentMetric::ArIoU;

        using nlohmann::ordered_json;
        ordered_json doc;
        doc["schema"] = 1;
        doc["fg_pos_thresh"] = ac.fg_pos_thresh;
        doc["fg_neg_thresh"] = ac.fg_neg_thresh;
        doc["swb2bg"] = ac.swb2bg;
        doc["metric"] = cfg->exact_iou ? "iou" : "ariou";
        doc["num_anchors"] = anchors->flat.size();
        ordered_json images = ordered_json::array();
        std::size_t tot_fg = 0, tot_bg = 0, tot_ign = 0, tot_gt = 0, tot_uncovered = 0;
        for (const auto& img : gt->data.config.images) {
            std::vector<obox::OrientedBox> boxes;
            for (const auto& inst : gt->data.instances) {
                if (inst.image_id == img.id) boxes.push_back(inst.obb);
            }
            const auto labels = obox::assign(anchors->flat, boxes, ac, metric);
            const auto counts = obox::count_labels(labels, boxes.size());
            std::size_t uncovered = 0;
            for (std::size_t g = 0; g < boxes.size(); ++g) {
                if (counts.per_gt_foreground[g] == 0) ++uncovered;
            }
            ordered_json entry;
            entry["image_id"] = img.id;
            entry["num_gt"] = boxes.size();
            entry["foreground"] = counts.foreground;
            entry["background"] = counts.background;
            entry["ignore"] = counts.ignore;
            entry["gt_without_foreground"] = uncovered;
            entry["per_gt_foreground"] = counts.per_gt_foreground;
            images.push_back(entry);
            tot_fg += counts.foreground;
            tot_bg += counts.background;
            tot_ign += counts.ignore;
            tot_gt += boxes.size();
            tot_uncovered += uncovered;
        }
        doc["images"] = images;
        doc["totals"] = {{"num_gt", tot_gt},
                         {"foreground", tot_fg},
                         {"background", tot_bg},
                         {"ignore", tot_ign},
                         {"gt_without_foreground", tot_uncovered}};
        *json_out = dup_string(doc.dump(2) + "\n");
    });
}

obox_status obox_evaluate(const obox_dataset* gt, const obox_detections* dets, const obox_eval_config* cfg,
                          obox_eval_result** out) {
    return guarded([&] {
        require(gt, "gt");
        require(dets, "dets");
        require(cfg, "cfg");
        require(out, "out");
        obox::EvalConfig ec;
        switch (cfg->kind) {
            case OBOX_IOU_AABB:
                ec.iou_kind = obox::IouKind::AABB;
                break;
            case OBOX_IOU_OBB:
                ec.iou_kind = obox::IouKind::OBB;
                break;
            case OBOX_IOU_MASK:
                ec.iou_kind = obox::IouKind::Mask;
                break;
            default:
                throw InvalidArgument("unknown IoU kind");
        }
        ec.class_agnostic = cfg->agnostic != 0;
        if (cfg->thresholds) ec.iou_thresholds.assign(cfg->thresholds, cfg->thresholds + cfg->num_thresholds);
        ec.validate();

        auto r = std::make_unique<obox_eval_result>();
        r->kind = ec.iou_kind;
        r->agnostic = ec.class_agnostic;
        r->num_detections = dets->records.size();
        const auto& gts = gt->data.instances;
        r->curve = obox::ap_curve(dets->records, gts, ec);
        r->stats = obox::per_instance_stats(dets->records, gts, true, ec.iou_kind);
        const bool all_masks = std::all_of(gts.begin(), gts.end(), [](const auto& g) { return g.mask.has_value(); });
        if (all_masks) {
            r->has_box_mask_iou = true;
            r->box_mask_iou_oriented = obox::mean_box_mask_iou(gts, obox::BoxKind::Oriented);
            r->box_mask_iou_axis = obox::mean_box_mask_iou(gts, obox::BoxKind::Axis);
        }
        *out = r.release();
    });
}

void obox_eval_result_free(obox_eval_result* r) { delete r; }

double obox_eval_map(const obox_eval_result* r) { return r ? r->curve.map : 0.0; }

size_t obox_eval_threshold_count(const obox_eval_result* r) { return r ? r->curve.thresholds.size() : 0; }

obox_status obox_eval_ap(const obox_eval_result* r, size_t i, double* threshold, double* ap) {
    return guarded([&] {
        require(r, "r");
        if (i >= r->curve.thresholds.size()) throw InvalidArgument("threshold index out of range");
        if (threshold) *threshold = r->curve.thresholds[i];
        if (ap) *ap = r->curve.ap[i];
    });
}

obox_status obox_eval_instance_stats(const obox_eval_result* r, obox_instance_stats* out) {
    return guarded([&] {
        require(r, "r");
        require(out, "out");
        const auto& s = r->stats;
        *out = {s.num_gt, s.mean_iou_all, s.mean_iou_pos, s.pos_empty ? 1 : 0, s.num_fn_iou_075, s.num_class_ok};
    });
}

obox_status obox_eval_write_json(const obox_eval_result* r, const char* path) {
    return guarded([&] {
        require(r, "r");
        require(path, "path");
        obox::write_text_file(path, metrics_json(*r).dump(2) + "\n");
    });
}

obox_status obox_eval_write_curve(const obox_eval_result* r, const char* path) {
    return guarded([&] {
        require(r, "r");
        require(path, "path");
        std::string csv = "threshold,ap\n";
        for (std::size_t i = 0; i < r->curve.thresholds.size(); ++i) {
            csv += format_double(r->curve.thresholds[i]) + "," + format_double(r->curve.ap[i]) + "\n";
        }
        obox::write_text_file(path, csv);
    });
}

obox_status obox_generate_dataset(const char* templates_path, const char* spec_path, int scenes, uint64_t seed,
                                  const char* out_dir) {
    return guarded([&] {
        require(templates_path, "templates_path");
        require(out_dir, "out_dir");
        if (scenes < 0) throw InvalidArgument("scene count must be >= 0");
        const auto library = obox::load_templates(templates_path);
        const obox::SceneSpec spec = spec_path ? obox::load_scene_spec(spec_path) : obox::SceneSpec{};
        obox::write_generated_dataset(obox::generate_dataset(library, spec, scenes, seed), out_dir);
    });
}

obox_status obox_simulate(const obox_dataset* gt, const obox_noise* noise, uint64_t seed, obox_detections** out) {
    return guarded([&] {
        require(gt, "gt");
        require(noise, "noise");
        require(out, "out");
        const obox::NoiseSpec n{noise->center, noise->length, noise->angle};
        *out = new obox_detections{obox::simulate_detections(gt->data.instances, gt->data.config, n, seed)};
    });
}

obox_status obox_refine_from_masks(const obox_detections* in, const obox_dataset* config, obox_refine_mode mode,
                                   obox_detections** out) {
    return guarded([&] {
        require(in, "in");
        require(config, "config");
        require(out, "out");
        std::vector<obox::DetectionRecord> recs = in->records;
        switch (mode) {
            case OBOX_REFINE_BFM:
                recs = obox::boxes_from_masks(std::move(recs), config->data.config);
                break;
            case OBOX_REFINE_OFM:
                recs = obox::apply_ofm(std::move(recs), config->data.config);
                break;
            default:
                throw InvalidArgument("unknown refinement mode");
        }
        *out = new obox_detections{std::move(recs)};
    });
}

obox_status obox_mask_roundtrip(const obox_dataset* gt, size_t num_ellipses, uint64_t seed, int oriented, int grid,
                                double threshold, obox_roundtrip_stats* out) {
    return guarded([&] {
        require(out, "out");
        std::vector<obox::BinaryRegion> regions;
        if (gt) {
            for (const auto& inst : gt->data.instances) {
                if (inst.mask && !inst.mask->empty()) regions.push_back(*inst.mask);
            }
        } else {
            regions = obox::random_ellipses(num_ellipses, seed);
        }
        const auto s = obox::mask_roundtrip(regions, oriented ? obox::BoxKind::Oriented : obox::BoxKind::Axis, grid,
                                            threshold);
        *out = {s.iou.size(), s.mean, s.min};
    });
}

obox_status obox_dlw_config_preset(const char* preset, obox_dlw_config* out) {
    return guarded([&] {
        require(preset, "preset");
        require(out, "out");
        obox::DlwConfig c;
        if (std::strcmp(preset, "screws") == 0) {
            c = obox::DlwConfig::screws();
        } else if (std::strcmp(preset, "d2s") == 0) {
            c = obox::DlwConfig::d2s();
        } else {
            throw obox::ConfigError(std::string("unknown preset '") + preset + "' (expected screws or d2s)");
        }
        *out = {c.ilw_box, c.ilw_cls, c.flw_box, c.flw_cls, c.i_tl_rpn, c.delta_tl_rpn, c.n_dlw, c.window};
    });
}

obox_status obox_dlw_create(const obox_dlw_config* cfg, obox_dlw** out) {
    return guarded([&] {
        require(cfg, "cfg");
        require(out, "out");
        const obox::DlwConfig c = to_core(*cfg);
        c.validate();
        *out = new obox_dlw{c, obox::DlwState::initial(c)};
    });
}

void obox_dlw_free(obox_dlw* dlw) { delete dlw; }

obox_status obox_dlw_observe(obox_dlw* dlw, double rpn_loss, int* triggered, obox_dlw_state* state) {
    return guarded([&] {
        require(dlw, "dlw");
        obox::DlwStep step = obox::observe(dlw->state, dlw->cfg, rpn_loss);
        dlw->state = std::move(step.state);
        if (triggered) *triggered = step.triggered ? 1 : 0;
        if (state) {
            *state = {dlw->state.lw_box, dlw->state.lw_cls, dlw->state.tl_rpn, dlw->state.i_dlw, step.running_mean};
        }
    });
}

obox_status obox_bench(const char* op, size_t n, uint64_t seed, double* seconds, double* ops_per_sec) {
    return guarded([&] {
        require(op, "op");
        const auto r = obox::run_bench(obox::parse_bench_op(op), n, seed);
        if (seconds) *seconds = r.seconds;
        if (ops_per_sec) *ops_per_sec = r.ops_per_sec;
    });
}

}  // extern "C"
