#include "obox/roi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "obox/errors.hpp"

namespace obox {

namespace {

// Bilinear interpolation of `get` with zero outside [0, h) x [0, w).
template <typename Get>
double bilinear_zero(double r, double c, int h, int w, Get&& get) {
    const double rf = std::floor(r);
    const double cf = std::floor(c);
    const double fr = r - rf;
    const double fc = c - cf;
    const long r0 = static_cast<long>(rf);
    const long c0 = static_cast<long>(cf);
    auto px = [&](long rr, long cc) -> double {
        if (rr < 0 || cc < 0 || rr >= h || cc >= w) return 0.0;
        return get(static_cast<int>(rr), static_cast<int>(cc));
    };
    return (1 - fr) * ((1 - fc) * px(r0, c0) + fc * px(r0, c0 + 1)) +
           fr * ((1 - fc) * px(r0 + 1, c0) + fc * px(r0 + 1, c0 + 1));
}

}  // namespace

FeatureMap::FeatureMap(int channels, int height, int width, double fill)
    : channels(channels), height(height), width(width),
      data(static_cast<std::size_t>(channels) * height * width, fill) {}

double FeatureMap::sample(int ch, double r, double c) const {
    return bilinear_zero(r, c, height, width, [&](int rr, int cc) { return at(ch, rr, cc); });
}

double MaskGrid::mean() const {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

Point2 grid_cell_center(const OrientedBox& box, int out_h, int out_w, int i, int j) {
    const Point2 u = major_axis(box.phi);
    const Point2 w = minor_axis(box.phi);
    const double x = -box.l1 + (j + 0.5) * (2.0 * box.l1 / out_w);
    const double y = -box.l2 + (i + 0.5) * (2.0 * box.l2 / out_h);
    return {box.r + x * u.r + y * w.r, box.c + x * u.c + y * w.c};
}

FeatureMap roi_pool(const FeatureMap& fm, const OrientedBox& box, int out_h, int out_w) {
    validate(box);
    if (out_h < 1 || out_w < 1) throw ConfigError("roi_pool: output dimensions must be >= 1");
    FeatureMap out(fm.channels, out_h, out_w);
    for (int i = 0; i < out_h; ++i) {
        for (int j = 0; j < out_w; ++j) {
            const Point2 p = grid_cell_center(box, out_h, out_w, i, j);
            for (int ch = 0; ch < fm.channels; ++ch) out.at(ch, i, j) = fm.sample(ch, p.r, p.c);
        }
    }
    return out;
}

FeatureMap paint_masks(std::span<const BinaryRegion> masks, int height, int width) {
    FeatureMap fm(static_cast<int>(masks.size()), height, width);
    for (std::size_t ch = 0; ch < masks.size(); ++ch) {
        for (const Run& run : masks[ch].runs()) {
            if (run.row < 0 || run.row >= height) continue;
            for (int c = std::max(run.col_begin, 0); c < std::min(run.col_end, width); ++c) {
                fm.at(static_cast<int>(ch), run.row, c) = 1.0;
            }
        }
    }
    return fm;
}

MaskGrid pool_mask_target(const FeatureMap& gt_masks, int channel, const OrientedBox& box, int grid) {
    if (channel < 0 || channel >= gt_masks.channels) {
        throw IndexError("pool_mask_target: channel " + std::to_string(channel) + " out of range [0, " +
                         std::to_string(gt_masks.channels) + ")");
    }
    validate(box);
    MaskGrid out(grid);
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const Point2 p = grid_cell_center(box, grid, grid, i, j);
            out.at(i, j) = std::clamp(gt_masks.sample(channel, p.r, p.c), 0.0, 1.0);
        }
    }
    return out;
}

MaskGrid pool_mask_target(const BinaryRegion& mask, const OrientedBox& box, int grid) {
    validate(box);
    MaskGrid out(grid);
    if (mask.empty()) return out;
    const AxisAlignedBox bb = mask.bounds();
    // Crop to the mask's bounding box (plus a border) and sample densely from it.
    const int r_off = static_cast<int>(bb.r_min) - 1;
    const int c_off = static_cast<int>(bb.c_min) - 1;
    const int h = static_cast<int>(bb.height()) + 3;
    const int w = static_cast<int>(bb.width()) + 3;
    const std::vector<uint8_t> dense = mask.translate(-r_off, -c_off).to_mask(h, w);
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const Point2 p = grid_cell_center(box, grid, grid, i, j);
            const double v = bilinear_zero(p.r - r_off, p.c - c_off, h, w, [&](int rr, int cc) {
                return static_cast<double>(dense[static_cast<std::size_t>(rr) * w + cc]);
            });
            out.at(i, j) = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

BinaryRegion decode_mask(const MaskGrid& probs, const OrientedBox& box, int image_h, int image_w, double threshold) {
    validate(box);
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("decode_mask: threshold must lie in (0, 1)");
    if (probs.size < 1 || probs.values.size() != static_cast<std::size_t>(probs.size) * probs.size) {
        throw ConfigError("decode_mask: malformed probability grid");
    }
    const int m = probs.size;
    const Point2 u = major_axis(box.phi);
    const Point2 w = minor_axis(box.phi);
    const BinaryRegion inside = BinaryRegion::rasterize(box, image_h, image_w);

    auto prob_at = [&](double gi, double gj) {
        gi = std::clamp(gi, 0.0, double(m - 1));
        gj = std::clamp(gj, 0.0, double(m - 1));
        const int i0 = std::min(static_cast<int>(gi), m - 1);
        const int j0 = std::min(static_cast<int>(gj), m - 1);
        const int i1 = std::min(i0 + 1, m - 1);
        const int j1 = std::min(j0 + 1, m - 1);
        const double fi = gi - i0;
        const double fj = gj - j0;
        return (1 - fi) * ((1 - fj) * probs.at(i0, j0) + fj * probs.at(i0, j1)) +
               fi * ((1 - fj) * probs.at(i1, j0) + fj * probs.at(i1, j1));
    };

    std::vector<Run> runs;
    for (const Run& run : inside.runs()) {
        int start = -1;
        for (int c = run.col_begin; c < run.col_end; ++c) {
            const double dr = run.row - box.r;
            const double dc = c - box.c;
            const double x = dr * u.r + dc * u.c;
            const double y = dr * w.r + dc * w.c;
            const double gj = (x + box.l1) / (2.0 * box.l1) * m - 0.5;
            const double gi = (y + box.l2) / (2.0 * box.l2) * m - 0.5;
            const bool on = prob_at(gi, gj) >= threshold;
            if (on && start < 0) start = c;
            if (!on && start >= 0) {
                runs.push_back({run.row, start, c});
                start = -1;
            }
        }
        if (start >= 0) runs.push_back({run.row, start, run.col_end});
    }
    return BinaryRegion(std::move(runs));
}

void RoiRouting::validate() const {
    if (!(roi_min_level <= canonical_level && canonical_level <= roi_max_level)) {
        throw ConfigError("roi routing: require roi_min_level <= canonical_level <= roi_max_level");
    }
    if (!(canonical_scale > 0.0)) throw ConfigError("roi routing: canonical_scale must be positive");
}

int route_level(const OrientedBox& box, const RoiRouting& routing) {
    routing.validate();
    validate(box);
    const double ratio = std::sqrt(box.area()) / routing.canonical_scale;
    const int level = routing.canonical_level + static_cast<int>(std::floor(std::log2(ratio)));
    return std::clamp(level, routing.roi_min_level, routing.roi_max_level);
}

}  // namespace obox
