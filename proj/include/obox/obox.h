#ifndef OBOX_OBOX_H
#define OBOX_OBOX_H

#include <stddef.h>
#include <stdint.h>

#if defined(OBOX_BUILDING_LIBRARY)
#define OBOX_API __attribute__((visibility("default")))
#else
#define OBOX_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; the message of the last failure on the
 * calling thread is available from obox_last_error(). */
typedef enum obox_status {
    OBOX_OK = 0,
    OBOX_ERR_INVALID_ARGUMENT = 1,
    OBOX_ERR_DOMAIN = 2,
    OBOX_ERR_PARSE = 3,
    OBOX_ERR_VALIDATION = 4,
    OBOX_ERR_CONFIG = 5,
    OBOX_ERR_IO = 6,
    OBOX_ERR_GENERATION = 7,
    OBOX_ERR_INTERNAL = 8
} obox_status;

OBOX_API const char* obox_last_error(void);
OBOX_API const char* obox_status_name(obox_status status);
OBOX_API const char* obox_version(void);

/* Strings returned by the library are released with obox_string_free. */
OBOX_API void obox_string_free(char* s);

/* ---- geometry ---- */

/* Center (r, c), semi-axes (l1, l2) and angle phi of the l1-axis. */
typedef struct obox_box {
    double r, c, l1, l2, phi;
} obox_box;

typedef struct obox_deltas {
    double d_r, d_c, d_l1, d_l2, d_phi;
} obox_deltas;

OBOX_API obox_status obox_iou(const obox_box* a, const obox_box* b, double* out);
OBOX_API obox_status obox_ar_iou(const obox_box* a, const obox_box* b, double* out);
OBOX_API obox_status obox_normalize_angle(double phi, int ignore_direction, double* out);
OBOX_API obox_status obox_encode(const obox_box* anchor, const obox_box* gt, int ignore_direction, obox_deltas* out);
OBOX_API obox_status obox_decode(const obox_box* anchor, const obox_deltas* deltas, int ignore_direction,
                                 obox_box* out);
OBOX_API obox_status obox_route_level(const obox_box* box, int min_level, int max_level, double canonical_scale,
                                      int canonical_level, int* out);

/* ---- NMS ---- */

typedef struct obox_nms_config {
    double min_score;
    double iou_class;    /* 1.0 disables the class-specific stage */
    double iou_agnostic; /* 1.0 disables the class-agnostic stage */
    size_t max_pre;
    size_t max_post;
    int axis_aligned;
} obox_nms_config;

typedef struct obox_nms_stats {
    size_t input, after_score, after_pre_nms, after_class, after_agnostic, output;
} obox_nms_stats;

OBOX_API void obox_nms_config_default(obox_nms_config* cfg);

/* Kept indices in descending score order. keep must hold n entries. */
OBOX_API obox_status obox_nms(const obox_box* boxes, const double* scores, const int* class_ids, size_t n,
                              const obox_nms_config* cfg, size_t* keep, size_t* num_keep, obox_nms_stats* stats);

/* ---- annotations ---- */

typedef struct obox_dataset obox_dataset;

OBOX_API obox_status obox_dataset_load(const char* path, obox_dataset** out);
OBOX_API obox_status obox_dataset_save(const obox_dataset* ds, const char* path);
OBOX_API void obox_dataset_free(obox_dataset* ds);
OBOX_API size_t obox_dataset_size(const obox_dataset* ds);
OBOX_API int obox_dataset_ignore_direction(const obox_dataset* ds);
OBOX_API size_t obox_dataset_warning_count(const obox_dataset* ds);
OBOX_API const char* obox_dataset_warning(const obox_dataset* ds, size_t i);
/* mask_area is -1 for instances without a mask. */
OBOX_API obox_status obox_dataset_get(const obox_dataset* ds, size_t i, int* image_id, int* class_id, obox_box* box,
                                      int64_t* mask_area, int* mask_supervised);
OBOX_API obox_status obox_dataset_subsample_masks(obox_dataset* ds, double fraction, uint64_t seed);
/* oriented != 0: smallest oriented boxes; otherwise axis-aligned ones. */
OBOX_API obox_status obox_dataset_mean_box_mask_iou(const obox_dataset* ds, int oriented, double* out);

/* ---- detections ---- */

typedef struct obox_detections obox_detections;

OBOX_API obox_status obox_detections_load(const char* path, obox_detections** out);
OBOX_API obox_status obox_detections_save(const obox_detections* dets, const char* path);
OBOX_API obox_status obox_detections_create(const int* image_ids, const int* class_ids, const double* scores,
                                            const obox_box* boxes, size_t n, obox_detections** out);
OBOX_API void obox_detections_free(obox_detections* dets);
OBOX_API size_t obox_detections_size(const obox_detections* dets);
OBOX_API obox_status obox_detections_get(const obox_detections* dets, size_t i, int* image_id, int* class_id,
                                         double* score, obox_box* box, int64_t* mask_area);
/* Per-image NMS; stats are summed over images. stats may be NULL. */
OBOX_API obox_status obox_detections_nms(const obox_detections* in, const obox_nms_config* cfg,
                                         obox_detections** out, obox_nms_stats* stats);

/* ---- anchors and assignment ---- */

typedef struct obox_anchors obox_anchors;

/* spec_path may be NULL for the default grid. */
OBOX_API obox_status obox_anchors_generate(const char* spec_path, int height, int width, obox_anchors** out);
OBOX_API obox_status obox_anchors_load(const char* path, obox_anchors** out);
OBOX_API obox_status obox_anchors_save(const obox_anchors* anchors, const char* path);
OBOX_API void obox_anchors_free(obox_anchors* anchors);
OBOX_API size_t obox_anchors_size(const obox_anchors* anchors);
OBOX_API obox_status obox_anchors_get(const obox_anchors* anchors, size_t i, obox_box* box);

typedef struct obox_assign_config {
    double fg_pos;
    double fg_neg;
    int swb2bg;
    int exact_iou; /* 0: arIoU, otherwise exact IoU (axis-aligned baseline) */
} obox_assign_config;

OBOX_API void obox_assign_config_default(obox_assign_config* cfg);

/* Foreground/background/ignore counts per image and per GT, as JSON. */
OBOX_API obox_status obox_assign_stats(const obox_dataset* gt, const obox_anchors* anchors,
                                       const obox_assign_config* cfg, char** json_out);

/* ---- evaluation ---- */

typedef enum obox_iou_kind { OBOX_IOU_AABB = 0, OBOX_IOU_OBB = 1, OBOX_IOU_MASK = 2 } obox_iou_kind;

typedef struct obox_eval_config {
    obox_iou_kind kind;
    int agnostic;
    const double* thresholds; /* NULL: 0.50, 0.55, ..., 0.95 */
    size_t num_thresholds;
} obox_eval_config;

typedef struct obox_instance_stats {
    size_t num_gt;
    double mean_iou_all;
    double mean_iou_pos;
    int pos_empty;
    size_t num_fn_iou_075;
    size_t num_class_ok;
} obox_instance_stats;

typedef struct obox_eval_result obox_eval_result;

OBOX_API obox_status obox_evaluate(const obox_dataset* gt, const obox_detections* dets, const obox_eval_config* cfg,
                                   obox_eval_result** out);
OBOX_API void obox_eval_result_free(obox_eval_result* r);
OBOX_API double obox_eval_map(const obox_eval_result* r);
OBOX_API size_t obox_eval_threshold_count(const obox_eval_result* r);
OBOX_API obox_status obox_eval_ap(const obox_eval_result* r, size_t i, double* threshold, double* ap);
OBOX_API obox_status obox_eval_instance_stats(const obox_eval_result* r, obox_instance_stats* out);
/* Versioned metrics document ("schema": 1). */
OBOX_API obox_status obox_eval_write_json(const obox_eval_result* r, const char* path);
/* CSV with header "threshold,ap". */
OBOX_API obox_status obox_eval_write_curve(const obox_eval_result* r, const char* path);

/* ---- synthetic data and pipeline ---- */

OBOX_API obox_status obox_generate_dataset(const char* templates_path, const char* spec_path, int scenes,
                                           uint64_t seed, const char* out_dir);

typedef struct obox_noise {
    double center; /* pixels */
    double length; /* log scale */
    double angle;  /* radians */
} obox_noise;

OBOX_API obox_status obox_simulate(const obox_dataset* gt, const obox_noise* noise, uint64_t seed,
                                   obox_detections** out);

typedef enum obox_refine_mode { OBOX_REFINE_BFM = 0, OBOX_REFINE_OFM = 1 } obox_refine_mode;

/* The dataset supplies class orientation flags and the direction mode. */
OBOX_API obox_status obox_refine_from_masks(const obox_detections* in, const obox_dataset* config,
                                            obox_refine_mode mode, obox_detections** out);

typedef struct obox_roundtrip_stats {
    size_t count;
    double mean_iou;
    double min_iou;
} obox_roundtrip_stats;

/* Pool-and-decode round trip of the GT masks (gt != NULL) or of
 * num_ellipses random ellipses (gt == NULL). */
OBOX_API obox_status obox_mask_roundtrip(const obox_dataset* gt, size_t num_ellipses, uint64_t seed, int oriented,
                                         int grid, double threshold, obox_roundtrip_stats* out);

/* ---- dynamic loss weights ---- */

typedef struct obox_dlw_config {
    double ilw_box, ilw_cls, flw_box, flw_cls;
    double i_tl_rpn, delta_tl_rpn;
    int n_dlw;
    size_t window;
} obox_dlw_config;

typedef struct obox_dlw_state {
    double lw_box, lw_cls, tl_rpn;
    int i_dlw;
    double running_mean;
} obox_dlw_state;

/* preset: "screws" or "d2s". */
OBOX_API obox_status obox_dlw_config_preset(const char* preset, obox_dlw_config* out);

typedef struct obox_dlw obox_dlw;

OBOX_API obox_status obox_dlw_create(const obox_dlw_config* cfg, obox_dlw** out);
OBOX_API void obox_dlw_free(obox_dlw* dlw);
OBOX_API obox_status obox_dlw_observe(obox_dlw* dlw, double rpn_loss, int* triggered, obox_dlw_state* state);

/* ---- benchmark ---- */

/* op: "iou", "ariou", "nms" or "roipool". */
OBOX_API obox_status obox_bench(const char* op, size_t n, uint64_t seed, double* seconds, double* ops_per_sec);

#ifdef __cplusplus
}
#endif

#endif
