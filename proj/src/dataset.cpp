#include "obox/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "obox/errors.hpp"
#include "obox/rng.hpp"

namespace obox {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

constexpr double kEnclosureSlack = 0.5 + 1e-6;

std::string where(const std::string& source, const std::string& record) { return source + ": " + record; }

const json& field(const json& obj, const char* key, const std::string& ctx) {
    if (!obj.is_object()) throw ParseError(ctx + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(ctx + ": missing field '" + key + "'");
    return *it;
}

double number(const json& v, const std::string& ctx) {
    if (!v.is_number()) throw ParseError(ctx + ": expected a number");
    return v.get<double>();
}

int integer(const json& v, const std::string& ctx) {
    if (!v.is_number_integer()) throw ParseError(ctx + ": expected an integer");
    return v.get<int>();
}

bool boolean(const json& v, const std::string& ctx) {
    if (!v.is_boolean()) throw ParseError(ctx + ": expected a boolean");
    return v.get<bool>();
}

std::vector<double> numbers(const json& v, std::size_t n, const std::string& ctx) {
    if (!v.is_array() || (n != 0 && v.size() != n)) {
        throw ParseError(ctx + ": expected an array of " + (n ? std::to_string(n) + " " : std::string()) + "numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], ctx + "[" + std::to_string(i) + "]"));
    return out;
}

json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(source + ": " + e.what());
    }
}

OrientedBox parse_rbox(const json& v, const std::string& ctx) {
    const auto f = numbers(v, 5, ctx);
    OrientedBox b{f[0], f[1], f[2], f[3], f[4]};
    if (!is_valid(b)) throw ValidationError(ctx + ": rbox needs finite fields and positive l1, l2");
    return b;
}

AxisAlignedBox parse_bbox(const json& v, const std::string& ctx) {
    const auto f = numbers(v, 4, ctx);
    AxisAlignedBox b{f[0], f[1], f[2], f[3]};
    if (!std::all_of(f.begin(), f.end(), [](double x) { return std::isfinite(x); }) || b.r_min > b.r_max ||
        b.c_min > b.c_max) {
        throw ValidationError(ctx + ": bbox must be finite with r_min <= r_max and c_min <= c_max");
    }
    return b;
}

BinaryRegion parse_rle(const json& v, const std::string& ctx) {
    Rle rle;
    rle.height = integer(field(v, "h", ctx), ctx + ".h");
    rle.width = integer(field(v, "w", ctx), ctx + ".w");
    if (rle.height < 0 || rle.width < 0) throw ParseError(ctx + ": negative mask dimensions");
    const json& counts = field(v, "counts", ctx);
    if (!counts.is_array()) throw ParseError(ctx + ".counts: expected an array");
    for (const auto& c : counts) {
        if (!c.is_number_unsigned() && !(c.is_number_integer() && c.get<int64_t>() >= 0)) {
            throw ParseError(ctx + ".counts: expected non-negative integers");
        }
        rle.counts.push_back(c.get<uint32_t>());
    }
    BinaryRegion region;
    try {
        region = rle_decode(rle);
    } catch (const ParseError& e) {
        throw ParseError(ctx + ": " + e.what());
    }
    if (auto it = v.find("area"); it != v.end()) {
        if (integer(*it, ctx + ".area") != region.area()) {
            throw ValidationError(ctx + ": stored area does not match the decoded pixel count");
        }
    }
    return region;
}

ordered_json rle_json(const BinaryRegion& region, int h, int w) {
    const Rle rle = rle_encode(region, h, w);
    ordered_json j;
    j["h"] = rle.height;
    j["w"] = rle.width;
    j["area"] = region.area();
    j["counts"] = rle.counts;
    return j;
}

// Smallest canvas anchored at the origin that holds the region.
std::pair<int, int> canvas_for(const BinaryRegion& region) {
    if (region.empty()) return {0, 0};
    const AxisAlignedBox b = region.bounds();
    return {static_cast<int>(b.r_max) + 1, static_cast<int>(b.c_max) + 1};
}

void check_enclosure(const BinaryRegion& mask, const OrientedBox& obb, const AxisAlignedBox& aabb,
                     const std::string& ctx) {
    for (const Run& run : mask.runs()) {
        for (int c : {run.col_begin, run.col_end - 1}) {
            const Point2 p{double(run.row), double(c)};
            if (p.r < aabb.r_min - kEnclosureSlack || p.r > aabb.r_max + kEnclosureSlack ||
                p.c < aabb.c_min - kEnclosureSlack || p.c > aabb.c_max + kEnclosureSlack) {
                throw ValidationError(ctx + ": mask pixel outside bbox");
            }
            if (!contains(obb, p, kEnclosureSlack)) throw ValidationError(ctx + ": mask pixel outside rbox");
        }
    }
}

// Objects in arrays go one per line; everything else compact.
std::string dump_document(const ordered_json& doc) {
    std::ostringstream os;
    os << "{\n";
    std::size_t i = 0;
    for (auto it = doc.begin(); it != doc.end(); ++it, ++i) {
        os << "  " << ordered_json(it.key()).dump() << ": ";
        const auto& v = it.value();
        if (v.is_array() && !v.empty() && (v.front().is_object() || v.front().is_array())) {
            os << "[\n";
            for (std::size_t k = 0; k < v.size(); ++k) {
                os << "    " << v[k].dump() << (k + 1 < v.size() ? ",\n" : "\n");
            }
            os << "  ]";
        } else {
            os << v.dump();
        }
        os << (i + 1 < doc.size() ? ",\n" : "\n");
    }
    os << "}\n";
    return os.str();
}

void check_schema(const json& doc, const std::string& source) {
    if (!doc.is_object()) throw ParseError(source + ": top level must be an object");
    if (auto it = doc.find("schema"); it != doc.end()) {
        if (integer(*it, source + ": schema") != kSchemaVersion) {
            throw ParseError(source + ": unsupported schema version " + it->dump());
        }
    }
}

}  // namespace

const ClassMeta* DatasetConfig::find_class(int id) const {
    for (const auto& c : classes) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

const ImageInfo* DatasetConfig::find_image(int id) const {
    for (const auto& im : images) {
        if (im.id == id) return &im;
    }
    return nullptr;
}

bool DatasetConfig::class_is_oriented(int id) const {
    const ClassMeta* c = find_class(id);
    return c == nullptr || c->is_oriented;
}

Rle rle_encode(const BinaryRegion& region, int height, int width) {
    if (height < 0 || width < 0) throw ValidationError("rle_encode: negative dimensions");
    if (!region.empty()) {
        const AxisAlignedBox b = region.bounds();
        if (b.r_min < 0 || b.c_min < 0 || b.r_max >= height || b.c_max >= width) {
            throw ValidationError("rle_encode: region extends outside the " + std::to_string(height) + "x" +
                                  std::to_string(width) + " canvas");
        }
    }
    const std::vector<uint8_t> dense = region.to_mask(height, width);
    Rle rle{height, width, {}};
    uint8_t current = 0;
    uint32_t run = 0;
    for (int c = 0; c < width; ++c) {
        for (int r = 0; r < height; ++r) {
            const uint8_t v = dense[static_cast<std::size_t>(r) * width + c];
            if (v != current) {
                rle.counts.push_back(run);
                run = 0;
                current = v;
            }
            ++run;
        }
    }
    rle.counts.push_back(run);
    return rle;
}

BinaryRegion rle_decode(const Rle& rle) {
    const uint64_t total = static_cast<uint64_t>(rle.height) * static_cast<uint64_t>(rle.width);
    const uint64_t sum = std::accumulate(rle.counts.begin(), rle.counts.end(), uint64_t{0});
    if (sum != total) {
        throw ParseError("RLE counts sum to " + std::to_string(sum) + " but the mask has " + std::to_string(total) +
                         " pixels");
    }
    std::vector<uint8_t> dense(total, 0);
    uint64_t pos = 0;
    for (std::size_t i = 0; i < rle.counts.size(); ++i) {
        if (i % 2 == 1) {
            for (uint64_t k = pos; k < pos + rle.counts[i]; ++k) {
                const uint64_t c = k / rle.height;
                const uint64_t r = k % rle.height;
                dense[r * rle.width + c] = 1;
            }
        }
        pos += rle.counts[i];
    }
    return BinaryRegion::from_mask(rle.height, rle.width, dense);
}

Dataset parse_annotations(const std::string& text, const std::string& source) {
    const json doc = parse_json(text, source);
    check_schema(doc, source);
    Dataset ds;
    if (auto it = doc.find("ignore_direction"); it != doc.end()) {
        ds.config.ignore_direction = boolean(*it, source + ": ignore_direction");
    }
    if (auto it = doc.find("classes"); it != doc.end()) {
        if (!it->is_array()) throw ParseError(source + ": classes must be an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string ctx = where(source, "classes[" + std::to_string(i) + "]");
            const json& c = (*it)[i];
            ClassMeta meta;
            meta.id = integer(field(c, "id", ctx), ctx + ".id");
            if (auto n = c.find("name"); n != c.end()) {
                if (!n->is_string()) throw ParseError(ctx + ".name: expected a string");
                meta.name = n->get<std::string>();
            }
            if (auto o = c.find("oriented"); o != c.end()) meta.is_oriented = boolean(*o, ctx + ".oriented");
            if (ds.config.find_class(meta.id)) throw ValidationError(ctx + ": duplicate class id");
            ds.config.classes.push_back(meta);
        }
    }
    if (auto it = doc.find("images"); it != doc.end()) {
        if (!it->is_array()) throw ParseError(source + ": images must be an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string ctx = where(source, "images[" + std::to_string(i) + "]");
            const json& im = (*it)[i];
            ImageInfo info;
            info.id = integer(field(im, "id", ctx), ctx + ".id");
            info.height = integer(field(im, "height", ctx), ctx + ".height");
            info.width = integer(field(im, "width", ctx), ctx + ".width");
            if (auto f = im.find("file"); f != im.end()) {
                if (!f->is_string()) throw ParseError(ctx + ".file: expected a string");
                info.file = f->get<std::string>();
            }
            if (info.height <= 0 || info.width <= 0) throw ValidationError(ctx + ": image dimensions must be positive");
            if (ds.config.find_image(info.id)) throw ValidationError(ctx + ": duplicate image id");
            ds.config.images.push_back(info);
        }
    }
    const json& instances = field(doc, "instances", source);
    if (!instances.is_array()) throw ParseError(source + ": instances must be an array");
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const std::string ctx = where(source, "instances[" + std::to_string(i) + "]");
        const json& v = instances[i];
        GroundTruthInstance gt;
        gt.image_id = integer(field(v, "image_id", ctx), ctx + ".image_id");
        gt.class_id = integer(field(v, "class_id", ctx), ctx + ".class_id");
        gt.obb = parse_rbox(field(v, "rbox", ctx), ctx + ".rbox");
        gt.aabb = parse_bbox(field(v, "bbox", ctx), ctx + ".bbox");
        const double canonical = normalize_angle(gt.obb.phi, ds.config.ignore_direction);
        if (canonical != gt.obb.phi) {
            if (std::abs(canonical - gt.obb.phi) > 1e-12) {
                ds.warnings.push_back(ctx + ": rbox angle " + std::to_string(gt.obb.phi) +
                                      " re-canonicalized to " + std::to_string(canonical));
            }
            gt.obb.phi = canonical;
        }
        if (!ds.config.classes.empty() && !ds.config.find_class(gt.class_id)) {
            throw ValidationError(ctx + ": unknown class_id " + std::to_string(gt.class_id));
        }
        if (!ds.config.images.empty() && !ds.config.find_image(gt.image_id)) {
            throw ValidationError(ctx + ": unknown image_id " + std::to_string(gt.image_id));
        }
        if (auto r = v.find("rle"); r != v.end() && !r->is_null()) {
            gt.mask = parse_rle(*r, ctx + ".rle");
            check_enclosure(*gt.mask, gt.obb, gt.aabb, ctx);
        }
        gt.mask_supervised = gt.mask.has_value();
        if (auto s = v.find("mask_supervised"); s != v.end()) {
            gt.mask_supervised = boolean(*s, ctx + ".mask_supervised");
            if (gt.mask_supervised && !gt.mask) throw ValidationError(ctx + ": mask_supervised without a mask");
        }
        ds.instances.push_back(std::move(gt));
    }
    return ds;
}

std::string serialize_annotations(const Dataset& ds) {
    ordered_json doc;
    doc["schema"] = kSchemaVersion;
    doc["ignore_direction"] = ds.config.ignore_direction;
    doc["classes"] = ordered_json::array();
    for (const auto& c : ds.config.classes) {
        doc["classes"].push_back({{"id", c.id}, {"name", c.name}, {"oriented", c.is_oriented}});
    }
    doc["images"] = ordered_json::array();
    for (const auto& im : ds.config.images) {
        doc["images"].push_back({{"id", im.id}, {"height", im.height}, {"width", im.width}, {"file", im.file}});
    }
    doc["instances"] = ordered_json::array();
    for (const auto& gt : ds.instances) {
        ordered_json v;
        v["image_id"] = gt.image_id;
        v["class_id"] = gt.class_id;
        v["rbox"] = {gt.obb.r, gt.obb.c, gt.obb.l1, gt.obb.l2, gt.obb.phi};
        v["bbox"] = {gt.aabb.r_min, gt.aabb.c_min, gt.aabb.r_max, gt.aabb.c_max};
        v["mask_supervised"] = gt.mask_supervised;
        if (gt.mask) {
            auto [h, w] = canvas_for(*gt.mask);
            if (const ImageInfo* im = ds.config.find_image(gt.image_id)) {
                h = im->height;
                w = im->width;
            }
            v["rle"] = rle_json(*gt.mask, h, w);
        }
        doc["instances"].push_back(std::move(v));
    }
    return dump_document(doc);
}

Dataset load_annotations(const std::filesystem::path& path) {
    return parse_annotations(read_text_file(path), path.string());
}

void save_annotations(const std::filesystem::path& path, const Dataset& dataset) {
    write_text_file(path, serialize_annotations(dataset));
}

std::vector<DetectionRecord> parse_detections(const std::string& text, const std::string& source) {
    const json doc = parse_json(text, source);
    check_schema(doc, source);
    const json& list = field(doc, "detections", source);
    if (!list.is_array()) throw ParseError(source + ": detections must be an array");
    std::vector<DetectionRecord> out;
    out.reserve(list.size());
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string ctx = where(source, "detections[" + std::to_string(i) + "]");
        const json& v = list[i];
        DetectionRecord d;
        d.image_id = integer(field(v, "image_id", ctx), ctx + ".image_id");
        d.det.class_id = integer(field(v, "class_id", ctx), ctx + ".class_id");
        d.det.score = number(field(v, "score", ctx), ctx + ".score");
        if (!(d.det.score >= 0.0 && d.det.score <= 1.0)) throw ValidationError(ctx + ": score outside [0, 1]");
        if (d.det.class_id < 0) throw ValidationError(ctx + ": negative class_id");
        d.det.box = parse_rbox(field(v, "rbox", ctx), ctx + ".rbox");
        if (auto b = v.find("bbox"); b != v.end() && !b->is_null()) d.aabb = parse_bbox(*b, ctx + ".bbox");
        if (auto r = v.find("rle"); r != v.end() && !r->is_null()) d.mask = parse_rle(*r, ctx + ".rle");
        out.push_back(std::move(d));
    }
    return out;
}

std::string serialize_detections(const std::vector<DetectionRecord>& dets) {
    ordered_json doc;
    doc["schema"] = kSchemaVersion;
    doc["detections"] = ordered_json::array();
    for (std::size_t i = 0; i < dets.size(); ++i) {
        const auto& d = dets[i];
        if (!(d.det.score >= 0.0 && d.det.score <= 1.0)) {
            throw ValidationError("detections[" + std::to_string(i) + "]: score outside [0, 1]");
        }
        validate(d.det.box);
        ordered_json v;
        v["image_id"] = d.image_id;
        v["class_id"] = d.det.class_id;
        v["score"] = d.det.score;
        v["rbox"] = {d.det.box.r, d.det.box.c, d.det.box.l1, d.det.box.l2, d.det.box.phi};
        if (d.aabb) v["bbox"] = {d.aabb->r_min, d.aabb->c_min, d.aabb->r_max, d.aabb->c_max};
        if (d.mask) {
            const auto [h, w] = canvas_for(*d.mask);
            v["rle"] = rle_json(*d.mask, h, w);
        }
        doc["detections"].push_back(std::move(v));
    }
    return dump_document(doc);
}

std::vector<DetectionRecord> load_detections(const std::filesystem::path& path) {
    return parse_detections(read_text_file(path), path.string());
}

void save_detections(const std::filesystem::path& path, const std::vector<DetectionRecord>& dets) {
    write_text_file(path, serialize_detections(dets));
}

AnchorGridSpec parse_anchor_spec(const std::string& text, const std::string& source) {
    const json doc = parse_json(text, source);
    if (!doc.is_object()) throw ParseError(source + ": anchor spec must be an object");
    AnchorGridSpec spec;
    if (auto it = doc.find("min_level"); it != doc.end()) spec.min_level = integer(*it, source + ": min_level");
    if (auto it = doc.find("max_level"); it != doc.end()) spec.max_level = integer(*it, source + ": max_level");
    if (auto it = doc.find("base_scale"); it != doc.end()) spec.base_scale = number(*it, source + ": base_scale");
    if (auto it = doc.find("num_subscales"); it != doc.end()) {
        spec.num_subscales = integer(*it, source + ": num_subscales");
    }
    if (auto it = doc.find("aspect_ratios"); it != doc.end()) {
        spec.aspect_ratios = numbers(*it, 0, source + ": aspect_ratios");
    }
    if (auto it = doc.find("angles"); it != doc.end()) spec.angles = numbers(*it, 0, source + ": angles");
    if (auto it = doc.find("ignore_direction"); it != doc.end()) {
        spec.ignore_direction = boolean(*it, source + ": ignore_direction");
    }
    spec.validate();
    return spec;
}

AnchorGridSpec load_anchor_spec(const std::filesystem::path& path) {
    return parse_anchor_spec(read_text_file(path), path.string());
}

std::string serialize_anchors(const std::vector<AnchorLevel>& levels) {
    ordered_json doc;
    doc["schema"] = kSchemaVersion;
    doc["levels"] = ordered_json::array();
    for (const auto& lv : levels) {
        ordered_json l;
        l["level"] = lv.level;
        l["stride"] = lv.stride;
        l["boxes"] = ordered_json::array();
        for (const auto& b : lv.boxes) l["boxes"].push_back({b.r, b.c, b.l1, b.l2, b.phi});
        doc["levels"].push_back(std::move(l));
    }
    return dump_document(doc);
}

std::vector<AnchorLevel> load_anchors(const std::filesystem::path& path) {
    const std::string source = path.string();
    const json doc = parse_json(read_text_file(path), source);
    check_schema(doc, source);
    const json& levels = field(doc, "levels", source);
    if (!levels.is_array()) throw ParseError(source + ": levels must be an array");
    std::vector<AnchorLevel> out;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const std::string ctx = where(source, "levels[" + std::to_string(i) + "]");
        AnchorLevel lv;
        lv.level = integer(field(levels[i], "level", ctx), ctx + ".level");
        lv.stride = number(field(levels[i], "stride", ctx), ctx + ".stride");
        const json& boxes = field(levels[i], "boxes", ctx);
        if (!boxes.is_array()) throw ParseError(ctx + ".boxes: expected an array");
        for (std::size_t k = 0; k < boxes.size(); ++k) {
            lv.boxes.push_back(parse_rbox(boxes[k], ctx + ".boxes[" + std::to_string(k) + "]"));
        }
        out.push_back(std::move(lv));
    }
    return out;
}

void save_anchors(const std::filesystem::path& path, const std::vector<AnchorLevel>& levels) {
    write_text_file(path, serialize_anchors(levels));
}

std::vector<GroundTruthInstance> subsample_masks(std::vector<GroundTruthInstance> instances, double fraction,
                                                 uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("subsample_masks: fraction must lie in [0, 1]");
    std::vector<std::size_t> with_mask;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        instances[i].mask_supervised = false;
        if (instances[i].mask) with_mask.push_back(i);
    }
    const std::size_t n = with_mask.size();
    // The 1e-9 guards against products such as 0.1 * 30 landing just above an integer.
    const auto keep = std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(fraction * n - 1e-9)));
    Rng rng(seed);
    for (std::size_t i = 0; i < keep; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(with_mask[i], with_mask[j]);
        instances[with_mask[i]].mask_supervised = true;
    }
    return instances;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << text;
        out.flush();
        if (!out) throw IoError("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

}  // namespace obox
