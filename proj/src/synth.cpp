#include "obox/synth.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <json.hpp>

#include "obox/errors.hpp"
#include "obox/parallel.hpp"
#include "obox/rng.hpp"

namespace obox {

using json = nlohmann::json;

BinaryRegion make_rectangle(int length, int width) {
    if (length < 1 || width < 1) throw ConfigError("make_rectangle: sides must be >= 1");
    std::vector<Run> runs;
    for (int r = 0; r < width; ++r) runs.push_back({r, 0, length});
    return BinaryRegion(std::move(runs));
}

BinaryRegion make_ellipse(double a, double b) {
    if (!(a > 0 && b > 0)) throw ConfigError("make_ellipse: semi-axes must be positive");
    const int ha = static_cast<int>(std::ceil(a));
    const int hb = static_cast<int>(std::ceil(b));
    return BinaryRegion::from_predicate(2 * hb + 1, 2 * ha + 1, [&](int r, int c) {
        const double y = (r - hb) / b;
        const double x = (c - ha) / a;
        return x * x + y * y <= 1.0;
    });
}

BinaryRegion make_disk(double radius) { return make_ellipse(radius, radius); }

BinaryRegion make_screw(int length, int width, double head_radius) {
    if (length < 1 || width < 1 || !(head_radius > 0)) throw ConfigError("make_screw: invalid dimensions");
    const int pad = static_cast<int>(std::ceil(head_radius));
    const int h = std::max(2 * pad + 1, width);
    const double mid = (h - 1) / 2.0;
    return BinaryRegion::from_predicate(h, length + pad, [&](int r, int c) {
        const bool in_bar = c >= pad && std::abs(r - mid) <= (width - 1) / 2.0;
        const double dr = r - mid;
        const double dc = c - pad;
        const bool in_head = dr * dr + dc * dc <= head_radius * head_radius;
        return in_bar || in_head;
    });
}

void SceneSpec::validate() const {
    if (height < 1 || width < 1) throw ConfigError("scene spec: image dimensions must be positive");
    if (min_count < 0 || max_count < min_count) throw ConfigError("scene spec: invalid instance count range");
    if (!(rotation_min <= rotation_max) || !std::isfinite(rotation_min) || !std::isfinite(rotation_max)) {
        throw ConfigError("scene spec: invalid rotation range");
    }
    if (!(scale_min > 0 && scale_min <= scale_max)) throw ConfigError("scene spec: invalid scale range");
    if (!(max_iou >= 0.0 && max_iou < 1.0)) throw ConfigError("scene spec: max_iou must lie in [0, 1)");
    if (max_retries < 1) throw ConfigError("scene spec: max_retries must be >= 1");
}

BinaryRegion transform_region(const BinaryRegion& region, double rotation, double scale) {
    if (region.empty()) throw DomainError("transform_region: empty template");
    const Moments m = moments(region);
    const double gr_int = std::floor(m.r0 + 0.5);
    const double gc_int = std::floor(m.c0 + 0.5);
    const AxisAlignedBox bb = region.bounds();
    const int h = static_cast<int>(bb.height()) + 1;
    const int w = static_cast<int>(bb.width()) + 1;
    const int r_off = static_cast<int>(bb.r_min);
    const int c_off = static_cast<int>(bb.c_min);
    const std::vector<uint8_t> dense = region.translate(-r_off, -c_off).to_mask(h, w);

    const double cs = std::cos(rotation);
    const double sn = std::sin(rotation);
    // Output pixel o sits at template position g_int + o before rotation.
    const double reach = std::hypot(bb.height() + 1, bb.width() + 1) * scale + 2.0;
    const int ext = static_cast<int>(std::ceil(reach));
    std::vector<Run> runs;
    for (int orow = -ext; orow <= ext; ++orow) {
        int start = 0;
        bool open = false;
        for (int ocol = -ext; ocol <= ext + 1; ++ocol) {
            bool on = false;
            if (ocol <= ext) {
                const double pr = (orow + gr_int - m.r0) / scale;
                const double pc = (ocol + gc_int - m.c0) / scale;
                // Inverse rotation in (row, column) coordinates.
                const double qr = m.r0 + pr * cs + pc * sn;
                const double qc = m.c0 - pr * sn + pc * cs;
                const long ir = static_cast<long>(std::floor(qr + 0.5)) - r_off;
                const long ic = static_cast<long>(std::floor(qc + 0.5)) - c_off;
                on = ir >= 0 && ic >= 0 && ir < h && ic < w && dense[static_cast<std::size_t>(ir) * w + ic] != 0;
            }
            if (on && !open) {
                start = ocol;
                open = true;
            } else if (!on && open) {
                runs.push_back({orow, start, ocol});
                open = false;
            }
        }
    }
    return BinaryRegion(std::move(runs));
}

Scene generate_scene(std::span<const TemplateInstance> templates, const DatasetConfig& config, const SceneSpec& spec,
                     uint64_t seed, int image_id) {
    spec.validate();
    if (templates.empty()) throw ConfigError("generate_scene: no templates");
    Rng rng(seed);
    const int count = static_cast<int>(rng.between(spec.min_count, spec.max_count));

    struct Placed {
        int class_id;
        BinaryRegion full;
    };
    std::vector<Placed> placed;
    for (int k = 0; k < count; ++k) {
        bool done = false;
        for (int attempt = 0; attempt < spec.max_retries && !done; ++attempt) {
            const TemplateInstance& t = templates[rng.below(templates.size())];
            const double rot = rng.uniform(spec.rotation_min, spec.rotation_max);
            const double scale = rng.uniform(spec.scale_min, spec.scale_max);
            const BinaryRegion shape = transform_region(t.region, rot, scale);
            if (shape.empty()) continue;
            const AxisAlignedBox bb = shape.bounds();
            const int lo_r = static_cast<int>(-bb.r_min);
            const int hi_r = static_cast<int>(spec.height - 1 - bb.r_max);
            const int lo_c = static_cast<int>(-bb.c_min);
            const int hi_c = static_cast<int>(spec.width - 1 - bb.c_max);
            if (lo_r > hi_r || lo_c > hi_c) continue;
            const int tr = static_cast<int>(rng.between(lo_r, hi_r));
            const int tc = static_cast<int>(rng.between(lo_c, hi_c));
            BinaryRegion candidate = shape.translate(tr, tc);
            const bool fits = std::all_of(placed.begin(), placed.end(), [&](const Placed& p) {
                return mask_iou(candidate, p.full) <= spec.max_iou;
            });
            if (!fits) continue;
            placed.push_back({t.class_id, std::move(candidate)});
            done = true;
        }
        if (!done) {
            throw GenerationError("could not place instance " + std::to_string(k + 1) + " of " +
                                  std::to_string(count) + " within " + std::to_string(spec.max_retries) +
                                  " retries (constraint: pairwise mask IoU <= " + std::to_string(spec.max_iou) +
                                  " inside a " + std::to_string(spec.height) + "x" + std::to_string(spec.width) +
                                  " image)");
        }
    }

    Scene scene;
    scene.height = spec.height;
    scene.width = spec.width;
    scene.label.assign(static_cast<std::size_t>(spec.height) * spec.width, 0);
    for (std::size_t i = 0; i < placed.size(); ++i) {
        BinaryRegion visible = placed[i].full;
        for (std::size_t j = i + 1; j < placed.size(); ++j) visible = visible.subtract(placed[j].full);
        if (visible.empty()) continue;
        GroundTruthInstance gt;
        gt.image_id = image_id;
        gt.class_id = placed[i].class_id;
        gt.obb = gt_box_from_mask(visible, config.class_is_oriented(gt.class_id), config.ignore_direction);
        gt.aabb = visible.bounds();
        gt.mask = std::move(visible);
        gt.mask_supervised = true;
        scene.instances.push_back(std::move(gt));
    }
    // Paint in z-order: later instances overwrite earlier ones.
    for (const Placed& p : placed) {
        const auto value = static_cast<uint8_t>(std::min(p.class_id + 1, 255));
        for (const Run& run : p.full.runs()) {
            for (int c = run.col_begin; c < run.col_end; ++c) {
                scene.label[static_cast<std::size_t>(run.row) * spec.width + c] = value;
            }
        }
    }
    return scene;
}

namespace {

int json_int(const json& obj, const char* key, int fallback, const std::string& ctx) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer()) throw ParseError(ctx + "." + key + ": expected an integer");
    return it->get<int>();
}

double json_num(const json& obj, const char* key, double fallback, const std::string& ctx) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number()) throw ParseError(ctx + "." + key + ": expected a number");
    return it->get<double>();
}

std::pair<double, double> json_range(const json& obj, const char* key, std::pair<double, double> fallback,
                                     const std::string& ctx) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
        throw ParseError(ctx + "." + key + ": expected [min, max]");
    }
    return {(*it)[0].get<double>(), (*it)[1].get<double>()};
}

json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(source + ": " + e.what());
    }
}

BinaryRegion template_shape(const json& shape, const std::string& ctx) {
    if (!shape.is_object()) throw ParseError(ctx + ": expected an object");
    auto type_it = shape.find("type");
    if (type_it == shape.end() || !type_it->is_string()) throw ParseError(ctx + ".type: expected a string");
    const std::string type = type_it->get<std::string>();
    if (type == "rectangle") {
        return make_rectangle(json_int(shape, "length", 40, ctx), json_int(shape, "width", 10, ctx));
    }
    if (type == "ellipse") return make_ellipse(json_num(shape, "a", 20, ctx), json_num(shape, "b", 10, ctx));
    if (type == "disk") return make_disk(json_num(shape, "radius", 10, ctx));
    if (type == "screw") {
        return make_screw(json_int(shape, "length", 60, ctx), json_int(shape, "width", 8, ctx),
                          json_num(shape, "head_radius", 8, ctx));
    }
    throw ParseError(ctx + ".type: unknown shape '" + type + "'");
}

}  // namespace

TemplateLibrary parse_templates(const std::string& text, const std::string& source) {
    const json doc = parse_json_text(text, source);
    if (!doc.is_object()) throw ParseError(source + ": top level must be an object");
    // Reuse the annotation parser for the shared header fields.
    json header = json::object();
    for (const char* key : {"schema", "ignore_direction", "classes"}) {
        if (doc.contains(key)) header[key] = doc[key];
    }
    header["instances"] = json::array();
    TemplateLibrary lib;
    lib.config = parse_annotations(header.dump(), source).config;

    auto list = doc.find("templates");
    if (list == doc.end() || !list->is_array() || list->empty()) {
        throw ParseError(source + ": templates must be a non-empty array");
    }
    for (std::size_t i = 0; i < list->size(); ++i) {
        const std::string ctx = source + ": templates[" + std::to_string(i) + "]";
        const json& t = (*list)[i];
        if (!t.is_object()) throw ParseError(ctx + ": expected an object");
        TemplateInstance inst;
        auto cls = t.find("class_id");
        if (cls == t.end() || !cls->is_number_integer()) throw ParseError(ctx + ".class_id: expected an integer");
        inst.class_id = cls->get<int>();
        if (!lib.config.classes.empty() && !lib.config.find_class(inst.class_id)) {
            throw ValidationError(ctx + ": unknown class_id " + std::to_string(inst.class_id));
        }
        inst.direction = json_num(t, "direction", 0.0, ctx);
        if (auto s = t.find("shape"); s != t.end()) {
            inst.region = template_shape(*s, ctx + ".shape");
        } else if (auto r = t.find("rle"); r != t.end()) {
            Rle rle;
            rle.height = json_int(*r, "h", 0, ctx + ".rle");
            rle.width = json_int(*r, "w", 0, ctx + ".rle");
            auto counts = r->find("counts");
            if (counts == r->end() || !counts->is_array()) throw ParseError(ctx + ".rle.counts: expected an array");
            for (const auto& c : *counts) {
                if (!c.is_number_integer() || c.get<int64_t>() < 0) {
                    throw ParseError(ctx + ".rle.counts: expected non-negative integers");
                }
                rle.counts.push_back(c.get<uint32_t>());
            }
            inst.region = rle_decode(rle);
        } else {
            throw ParseError(ctx + ": needs either 'shape' or 'rle'");
        }
        if (inst.region.empty()) throw ValidationError(ctx + ": empty template region");
        lib.templates.push_back(std::move(inst));
    }
    return lib;
}

TemplateLibrary load_templates(const std::filesystem::path& path) {
    return parse_templates(read_text_file(path), path.string());
}

SceneSpec parse_scene_spec(const std::string& text, const std::string& source) {
    const json doc = parse_json_text(text, source);
    if (!doc.is_object()) throw ParseError(source + ": top level must be an object");
    SceneSpec s;
    s.height = json_int(doc, "height", s.height, source);
    s.width = json_int(doc, "width", s.width, source);
    const auto count = json_range(doc, "count", {s.min_count, s.max_count}, source);
    s.min_count = static_cast<int>(count.first);
    s.max_count = static_cast<int>(count.second);
    const auto rot = json_range(doc, "rotation", {s.rotation_min, s.rotation_max}, source);
    s.rotation_min = rot.first;
    s.rotation_max = rot.second;
    const auto scale = json_range(doc, "scale", {s.scale_min, s.scale_max}, source);
    s.scale_min = scale.first;
    s.scale_max = scale.second;
    s.max_iou = json_num(doc, "max_iou", s.max_iou, source);
    s.max_retries = json_int(doc, "max_retries", s.max_retries, source);
    s.validate();
    return s;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
    return parse_scene_spec(read_text_file(path), path.string());
}

GeneratedDataset generate_dataset(const TemplateLibrary& library, const SceneSpec& spec, int count, uint64_t seed) {
    if (count < 0) throw ConfigError("generate_dataset: negative scene count");
    spec.validate();
    GeneratedDataset out;
    out.scenes.resize(static_cast<std::size_t>(count));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t k) {
        try {
            out.scenes[k] = generate_scene(library.templates, library.config, spec, Rng::derive(seed, k),
                                           static_cast<int>(k));
        } catch (...) {
            errors[k] = std::current_exception();
        }
    });
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    out.dataset.config = library.config;
    out.dataset.config.images.clear();
    for (int k = 0; k < count; ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "scene_%04d.pgm", k);
        out.dataset.config.images.push_back({k, spec.height, spec.width, name});
        for (const auto& gt : out.scenes[static_cast<std::size_t>(k)].instances) out.dataset.instances.push_back(gt);
    }
    return out;
}

std::string encode_pgm(std::span<const uint8_t> pixels, int height, int width) {
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
    return out;
}

void write_generated_dataset(const GeneratedDataset& generated, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
    save_annotations(out_dir / "annotations.json", generated.dataset);
    for (std::size_t k = 0; k < generated.scenes.size(); ++k) {
        const Scene& s = generated.scenes[k];
        write_text_file(out_dir / generated.dataset.config.images[k].file, encode_pgm(s.label, s.height, s.width));
    }
}

}  // namespace obox
