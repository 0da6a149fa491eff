#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "obox/obox.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitIo = 4;

struct Failure {
    int code;
    std::string message;
};

int exit_code(obox_status s) {
    switch (s) {
        case OBOX_OK:
            return kExitOk;
        case OBOX_ERR_INVALID_ARGUMENT:
        case OBOX_ERR_CONFIG:
            return kExitUsage;
        case OBOX_ERR_IO:
            return kExitIo;
        default:
            return kExitValidation;
    }
}

void check(obox_status s) {
    if (s != OBOX_OK) throw Failure{exit_code(s), std::string(obox_status_name(s)) + ": " + obox_last_error()};
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<obox_dataset, Deleter<obox_dataset, obox_dataset_free>>;
using Detections = std::unique_ptr<obox_detections, Deleter<obox_detections, obox_detections_free>>;
using Anchors = std::unique_ptr<obox_anchors, Deleter<obox_anchors, obox_anchors_free>>;
using EvalResult = std::unique_ptr<obox_eval_result, Deleter<obox_eval_result, obox_eval_result_free>>;
using Dlw = std::unique_ptr<obox_dlw, Deleter<obox_dlw, obox_dlw_free>>;

Dataset load_dataset(const std::string& path) {
    obox_dataset* ds = nullptr;
    check(obox_dataset_load(path.c_str(), &ds));
    Dataset out(ds);
    for (size_t i = 0; i < obox_dataset_warning_count(ds); ++i) {
        std::cerr << "warning: " << obox_dataset_warning(ds, i) << "\n";
    }
    return out;
}

Detections load_detections(const std::string& path) {
    obox_detections* d = nullptr;
    check(obox_detections_load(path.c_str(), &d));
    return Detections(d);
}

// "a:step:b" (inclusive range) or a comma-separated list.
std::vector<double> parse_thresholds(const std::string& text) {
    std::vector<double> out;
    auto bad = [&] { return Failure{kExitUsage, "invalid --thresholds '" + text + "'"}; };
    try {
        if (text.find(':') != std::string::npos) {
            std::vector<double> parts;
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
            if (parts.size() != 3 || !(parts[1] > 0)) throw bad();
            const auto steps = static_cast<long>(std::floor((parts[2] - parts[0]) / parts[1] + 1e-9));
            if (steps < 0 || steps > 10000) throw bad();
            for (long k = 0; k <= steps; ++k) {
                // Round to 1e-12 so 0.5 + 7 * 0.05 prints as 0.85.
                out.push_back(std::round((parts[0] + parts[1] * static_cast<double>(k)) * 1e12) / 1e12);
            }
        } else {
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
        }
    } catch (const std::logic_error&) {
        throw bad();
    }
    if (out.empty()) throw bad();
    return out;
}

void write_or_print(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f || !(f << text) || !f.flush()) throw Failure{kExitIo, "cannot write '" + path + "'"};
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Failure{kExitIo, "cannot write '" + path + "'"};
}

void print_nms_stats(const obox_nms_stats& s) {
    std::cout << "input=" << s.input << " after_score=" << s.after_score << " after_pre_nms=" << s.after_pre_nms
              << " after_class=" << s.after_class << " after_agnostic=" << s.after_agnostic << " output=" << s.output
              << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Oriented box toolkit: geometry, NMS, evaluation and synthetic data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(obox_version()));

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate detections against ground truth");
    std::string eval_gt, eval_det, eval_kind = "mask", eval_thresholds = "0.5:0.05:0.95", eval_out, eval_curve;
    bool eval_agnostic = false;
    eval->add_option("--gt", eval_gt, "Annotation file")->required();
    eval->add_option("--det", eval_det, "Detection file")->required();
    eval->add_option("--kind", eval_kind, "IoU kind")->check(CLI::IsMember({"aabb", "obb", "mask"}));
    eval->add_flag("--agnostic", eval_agnostic, "Ignore class labels when matching");
    eval->add_option("--thresholds", eval_thresholds, "start:step:stop or comma list");
    eval->add_option("--out", eval_out, "Metrics JSON");
    eval->add_option("--curve", eval_curve, "Per-threshold AP as CSV");

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
    std::string gen_templates, gen_spec, gen_out;
    int gen_scenes = 10;
    uint64_t gen_seed = 0;
    gen->add_option("--templates", gen_templates, "Template library")->required();
    gen->add_option("--spec", gen_spec, "Scene spec (defaults when omitted)");
    gen->add_option("--out-dir", gen_out, "Output directory")->required();
    gen->add_option("--scenes", gen_scenes, "Number of scenes")->check(CLI::NonNegativeNumber);
    gen->add_option("--seed", gen_seed, "Seed");

    // anchors
    auto* anchors = app.add_subcommand("anchors", "Generate an anchor grid");
    std::string anc_spec, anc_out;
    int anc_h = 0, anc_w = 0;
    anchors->add_option("--spec", anc_spec, "Anchor spec (defaults when omitted)");
    anchors->add_option("--height", anc_h, "Image height")->required()->check(CLI::PositiveNumber);
    anchors->add_option("--width", anc_w, "Image width")->required()->check(CLI::PositiveNumber);
    anchors->add_option("--out", anc_out, "Anchor file")->required();

    // assign-stats
    auto* assign = app.add_subcommand("assign-stats", "Anchor assignment statistics");
    std::string as_gt, as_anchors, as_metric = "ariou", as_out;
    obox_assign_config as_cfg;
    obox_assign_config_default(&as_cfg);
    bool as_swb2bg = false;
    assign->add_option("--gt", as_gt, "Annotation file")->required();
    assign->add_option("--anchors", as_anchors, "Anchor file")->required();
    assign->add_option("--fg-pos", as_cfg.fg_pos, "fgPosThresh");
    assign->add_option("--fg-neg", as_cfg.fg_neg, "fgNegThresh");
    assign->add_flag("--swb2bg", as_swb2bg, "Set weak boxes to background");
    assign->add_option("--metric", as_metric, "Overlap metric")->check(CLI::IsMember({"ariou", "iou"}));
    assign->add_option("--out", as_out, "JSON output (stdout when omitted)");

    // nms
    auto* nms = app.add_subcommand("nms", "Two-stage oriented NMS per image");
    std::string nms_det, nms_out;
    obox_nms_config nms_cfg;
    obox_nms_config_default(&nms_cfg);
    bool nms_axis = false;
    nms->add_option("--det", nms_det, "Detection file")->required();
    nms->add_option("--min-score", nms_cfg.min_score, "Score threshold");
    nms->add_option("--iou-class", nms_cfg.iou_class, "Class-specific IoU threshold (1.0 = off)");
    nms->add_option("--iou-agn", nms_cfg.iou_agnostic, "Class-agnostic IoU threshold (1.0 = off)");
    nms->add_option("--max-pre", nms_cfg.max_pre, "Candidates before suppression");
    nms->add_option("--max-post", nms_cfg.max_post, "Detections kept per image");
    nms->add_flag("--axis-aligned", nms_axis, "Compare enclosing axis-aligned boxes");
    nms->add_option("--out", nms_out, "Output detection file")->required();

    // simulate
    auto* sim = app.add_subcommand("simulate", "Learning-free detections from ground truth");
    std::string sim_gt, sim_out;
    std::optional<double> sim_sigma;
    double sim_center = 0.0, sim_length = 0.0, sim_angle = 0.0;
    uint64_t sim_seed = 0;
    sim->add_option("--gt", sim_gt, "Annotation file")->required();
    sim->add_option("--out", sim_out, "Detection file")->required();
    sim->add_option("--sigma", sim_sigma, "Sets all three noise levels");
    sim->add_option("--sigma-center", sim_center, "Center noise, pixels");
    sim->add_option("--sigma-length", sim_length, "Length noise, log scale");
    sim->add_option("--sigma-angle", sim_angle, "Angle noise, radians");
    sim->add_option("--seed", sim_seed, "Seed");

    // boxfrommask
    auto* bfm = app.add_subcommand("boxfrommask", "Recompute boxes (bfm) or angles (ofm) from masks");
    std::string bfm_gt, bfm_det, bfm_mode = "bfm", bfm_out;
    bfm->add_option("--gt", bfm_gt, "Annotation file supplying classes and direction mode")->required();
    bfm->add_option("--det", bfm_det, "Detection file")->required();
    bfm->add_option("--mode", bfm_mode, "bfm or ofm")->check(CLI::IsMember({"bfm", "ofm"}));
    bfm->add_option("--out", bfm_out, "Output detection file")->required();

    // roundtrip
    auto* rt = app.add_subcommand("roundtrip", "Mask pool/decode round trip");
    std::string rt_gt, rt_box = "both";
    size_t rt_ellipses = 200;
    uint64_t rt_seed = 0;
    int rt_grid = 28;
    double rt_threshold = 0.5;
    rt->add_option("--gt", rt_gt, "Annotation file (random ellipses when omitted)");
    rt->add_option("--ellipses", rt_ellipses, "Number of random ellipses");
    rt->add_option("--seed", rt_seed, "Seed");
    rt->add_option("--box", rt_box, "Box kind")->check(CLI::IsMember({"oriented", "axis", "both"}));
    rt->add_option("--grid", rt_grid, "Mask grid size")->check(CLI::PositiveNumber);
    rt->add_option("--threshold", rt_threshold, "Mask threshold");

    // dlw-sim
    auto* dlw = app.add_subcommand("dlw-sim", "Replay an RPN loss trace through the loss-weight schedule");
    std::string dlw_trace, dlw_preset = "screws", dlw_out;
    std::optional<double> ilw_box, ilw_cls, flw_box, flw_cls, i_tl, delta_tl;
    std::optional<int> n_dlw;
    std::optional<size_t> window;
    dlw->add_option("--trace", dlw_trace, "One loss per line")->required();
    dlw->add_option("--preset", dlw_preset, "Parameter preset")->check(CLI::IsMember({"screws", "d2s"}));
    dlw->add_option("--ilw-box", ilw_box, "Initial box loss weight");
    dlw->add_option("--ilw-cls", ilw_cls, "Initial class loss weight");
    dlw->add_option("--flw-box", flw_box, "Final box loss weight");
    dlw->add_option("--flw-cls", flw_cls, "Final class loss weight");
    dlw->add_option("--itl-rpn", i_tl, "Initial RPN loss threshold");
    dlw->add_option("--delta-tl-rpn", delta_tl, "Threshold decay factor");
    dlw->add_option("--n-dlw", n_dlw, "Number of updates");
    dlw->add_option("--window", window, "Running-mean window");
    dlw->add_option("--out", dlw_out, "CSV output (stdout when omitted)");

    // bench
    auto* bench = app.add_subcommand("bench", "Kernel throughput");
    std::string bench_op = "iou";
    size_t bench_n = 100000;
    uint64_t bench_seed = 0;
    bench->add_option("--op", bench_op, "Operation")->check(CLI::IsMember({"iou", "ariou", "nms", "roipool"}));
    bench->add_option("--n", bench_n, "Operations")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bench_seed, "Seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (eval->parsed()) {
            const Dataset gt = load_dataset(eval_gt);
            const Detections det = load_detections(eval_det);
            const std::vector<double> thr = parse_thresholds(eval_thresholds);
            obox_eval_config cfg{eval_kind == "aabb" ? OBOX_IOU_AABB : eval_kind == "obb" ? OBOX_IOU_OBB : OBOX_IOU_MASK,
                                 eval_agnostic ? 1 : 0, thr.data(), thr.size()};
            obox_eval_result* raw = nullptr;
            check(obox_evaluate(gt.get(), det.get(), &cfg, &raw));
            const EvalResult r(raw);
            if (!eval_out.empty()) check(obox_eval_write_json(r.get(), eval_out.c_str()));
            if (!eval_curve.empty()) check(obox_eval_write_curve(r.get(), eval_curve.c_str()));
            std::cout << "mAP=" << obox_eval_map(r.get()) << "\n";
        } else if (gen->parsed()) {
            check(obox_generate_dataset(gen_templates.c_str(), gen_spec.empty() ? nullptr : gen_spec.c_str(),
                                        gen_scenes, gen_seed, gen_out.c_str()));
        } else if (anchors->parsed()) {
            obox_anchors* raw = nullptr;
            check(obox_anchors_generate(anc_spec.empty() ? nullptr : anc_spec.c_str(), anc_h, anc_w, &raw));
            const Anchors a(raw);
            check(obox_anchors_save(a.get(), anc_out.c_str()));
            std::cout << "anchors=" << obox_anchors_size(a.get()) << "\n";
        } else if (assign->parsed()) {
            const Dataset gt = load_dataset(as_gt);
            obox_anchors* raw = nullptr;
            check(obox_anchors_load(as_anchors.c_str(), &raw));
            const Anchors a(raw);
            as_cfg.swb2bg = as_swb2bg ? 1 : 0;
            as_cfg.exact_iou = as_metric == "iou" ? 1 : 0;
            char* json = nullptr;
            check(obox_assign_stats(gt.get(), a.get(), &as_cfg, &json));
            const std::string text(json);
            obox_string_free(json);
            write_or_print(text, as_out);
        } else if (nms->parsed()) {
            const Detections det = load_detections(nms_det);
            nms_cfg.axis_aligned = nms_axis ? 1 : 0;
            obox_detections* raw = nullptr;
            obox_nms_stats stats{};
            check(obox_detections_nms(det.get(), &nms_cfg, &raw, &stats));
            const Detections kept(raw);
            check(obox_detections_save(kept.get(), nms_out.c_str()));
            print_nms_stats(stats);
        } else if (sim->parsed()) {
            const Dataset gt = load_dataset(sim_gt);
            obox_noise noise{sim_center, sim_length, sim_angle};
            if (sim_sigma) noise = {*sim_sigma, *sim_sigma, *sim_sigma};
            obox_detections* raw = nullptr;
            check(obox_simulate(gt.get(), &noise, sim_seed, &raw));
            const Detections det(raw);
            check(obox_detections_save(det.get(), sim_out.c_str()));
            std::cout << "detections=" << obox_detections_size(det.get()) << "\n";
        } else if (bfm->parsed()) {
            const Dataset gt = load_dataset(bfm_gt);
            const Detections det = load_detections(bfm_det);
            obox_detections* raw = nullptr;
            check(obox_refine_from_masks(det.get(), gt.get(), bfm_mode == "bfm" ? OBOX_REFINE_BFM : OBOX_REFINE_OFM,
                                         &raw));
            const Detections out(raw);
            check(obox_detections_save(out.get(), bfm_out.c_str()));
            std::cout << "detections=" << obox_detections_size(out.get()) << "\n";
        } else if (rt->parsed()) {
            Dataset gt;
            if (!rt_gt.empty()) gt = load_dataset(rt_gt);
            std::cout << "box,count,mean_iou,min_iou\n";
            for (const char* kind : {"oriented", "axis"}) {
                if (rt_box != "both" && rt_box != kind) continue;
                obox_roundtrip_stats s{};
                check(obox_mask_roundtrip(gt.get(), rt_ellipses, rt_seed, std::string(kind) == "oriented" ? 1 : 0,
                                          rt_grid, rt_threshold, &s));
                std::cout << kind << "," << s.count << "," << s.mean_iou << "," << s.min_iou << "\n";
            }
        } else if (dlw->parsed()) {
            obox_dlw_config cfg;
            check(obox_dlw_config_preset(dlw_preset.c_str(), &cfg));
            if (ilw_box) cfg.ilw_box = *ilw_box;
            if (ilw_cls) cfg.ilw_cls = *ilw_cls;
            if (flw_box) cfg.flw_box = *flw_box;
            if (flw_cls) cfg.flw_cls = *flw_cls;
            if (i_tl) cfg.i_tl_rpn = *i_tl;
            if (delta_tl) cfg.delta_tl_rpn = *delta_tl;
            if (n_dlw) cfg.n_dlw = *n_dlw;
            if (window) cfg.window = *window;
            obox_dlw* raw = nullptr;
            check(obox_dlw_create(&cfg, &raw));
            const Dlw sched(raw);
            std::ifstream trace(dlw_trace);
            if (!trace) throw Failure{kExitIo, "cannot read '" + dlw_trace + "'"};
            std::ostringstream csv;
            csv.precision(17);
            csv << "step,loss,running_mean,triggered,lw_box,lw_cls,tl_rpn,i_dlw\n";
            std::string line;
            size_t step = 0, line_no = 0;
            while (std::getline(trace, line)) {
                ++line_no;
                if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
                double loss = 0.0;
                try {
                    size_t used = 0;
                    loss = std::stod(line, &used);
                    if (line.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("");
                } catch (const std::logic_error&) {
                    throw Failure{kExitValidation, dlw_trace + ":" + std::to_string(line_no) + ": not a number"};
                }
                int triggered = 0;
                obox_dlw_state st{};
                check(obox_dlw_observe(sched.get(), loss, &triggered, &st));
                csv << step++ << "," << loss << "," << st.running_mean << "," << triggered << "," << st.lw_box << ","
                    << st.lw_cls << "," << st.tl_rpn << "," << st.i_dlw << "\n";
            }
            write_or_print(csv.str(), dlw_out);
        } else if (bench->parsed()) {
            double seconds = 0.0, ops = 0.0;
            check(obox_bench(bench_op.c_str(), bench_n, bench_seed, &seconds, &ops));
            std::cout << "op,n,seconds,ops_per_sec\n"
                      << bench_op << "," << bench_n << "," << seconds << "," << ops << "\n";
        }
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
