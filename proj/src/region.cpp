#include "obox/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "obox/errors.hpp"

namespace obox {

namespace {

using i128 = __int128;

// Sum of c^2 for c in [b, e).
i128 sum_sq(int64_t b, int64_t e) {
    auto p = [](i128 n) { return n * (n + 1) * (2 * n + 1) / 6; };
    return p(e - 1) - p(b - 1);
}

// Sum of c for c in [b, e).
i128 sum_lin(int64_t b, int64_t e) { return static_cast<i128>(b + e - 1) * (e - b) / 2; }

void require_nonempty(const BinaryRegion& region, const char* what) {
    if (region.empty()) throw DomainError(std::string(what) + ": empty region");
}

// Every pixel center that can be extreme for a linear functional: run endpoints.
template <typename F>
void for_each_extreme_pixel(const BinaryRegion& region, F&& f) {
    for (const Run& run : region.runs()) {
        f(static_cast<double>(run.row), static_cast<double>(run.col_begin));
        if (run.col_end - 1 != run.col_begin) {
            f(static_cast<double>(run.row), static_cast<double>(run.col_end - 1));
        }
    }
}

inline double cross(Point2 o, Point2 a, Point2 b) {
    return (a.r - o.r) * (b.c - o.c) - (a.c - o.c) * (b.r - o.r);
}

OrientedBox make_box(Point2 origin, Point2 e, Point2 n, double x_min, double x_max, double y_min,
                     double y_max, bool ignore_direction) {
    const double xm = 0.5 * (x_min + x_max);
    const double ym = 0.5 * (y_min + y_max);
    OrientedBox box;
    box.r = origin.r + e.r * xm + n.r * ym;
    box.c = origin.c + e.c * xm + n.c * ym;
    const double half_e = 0.5 * (x_max - x_min);
    const double half_n = 0.5 * (y_max - y_min);
    if (half_e >= half_n) {
        box.l1 = half_e;
        box.l2 = half_n;
        box.phi = std::atan2(-e.r, e.c);
    } else {
        box.l1 = half_n;
        box.l2 = half_e;
        box.phi = std::atan2(-n.r, n.c);
    }
    box.l1 = std::max(box.l1, kMinSemiAxis);
    box.l2 = std::max(box.l2, kMinSemiAxis);
    box.phi = normalize_angle(box.phi, ignore_direction);
    return box;
}

}  // namespace

BinaryRegion::BinaryRegion(std::vector<Run> runs) {
    std::erase_if(runs, [](const Run& r) { return r.col_end <= r.col_begin; });
    std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) {
        return a.row != b.row ? a.row < b.row : a.col_begin < b.col_begin;
    });
    for (const Run& run : runs) {
        if (!runs_.empty() && runs_.back().row == run.row && run.col_begin <= runs_.back().col_end) {
            runs_.back().col_end = std::max(runs_.back().col_end, run.col_end);
        } else {
            runs_.push_back(run);
        }
    }
    for (const Run& run : runs_) area_ += run.length();
}

BinaryRegion BinaryRegion::from_predicate(int height, int width,
                                          const std::function<bool(int, int)>& pred) {
    std::vector<Run> runs;
    for (int r = 0; r < height; ++r) {
        int c = 0;
        while (c < width) {
            while (c < width && !pred(r, c)) ++c;
            const int start = c;
            while (c < width && pred(r, c)) ++c;
            if (c > start) runs.push_back({r, start, c});
        }
    }
    return BinaryRegion(std::move(runs));
}

BinaryRegion BinaryRegion::from_mask(int height, int width, std::span<const uint8_t> mask) {
    if (mask.size() != static_cast<size_t>(height) * static_cast<size_t>(width)) {
        throw DomainError("from_mask: mask size does not match dimensions");
    }
    return from_predicate(height, width, [&](int r, int c) {
        return mask[static_cast<size_t>(r) * width + c] != 0;
    });
}

BinaryRegion BinaryRegion::rasterize(const OrientedBox& box, int image_height, int image_width) {
    validate(box);
    constexpr double eps = 1e-9;
    const AxisAlignedBox bb = to_aabb(box);
    int r0 = static_cast<int>(std::ceil(bb.r_min - eps));
    int r1 = static_cast<int>(std::floor(bb.r_max + eps));
    if (image_height >= 0) {
        r0 = std::max(r0, 0);
        r1 = std::min(r1, image_height - 1);
    }
    const Point2 u = major_axis(box.phi);
    const Point2 w = minor_axis(box.phi);
    std::vector<Run> runs;
    for (int r = r0; r <= r1; ++r) {
        const double dr = r - box.r;
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        // |dr*a.r + dc*a.c| <= half  ->  interval in dc
        auto slab = [&](Point2 a, double half) {
            const double base = dr * a.r;
            if (std::abs(a.c) < 1e-15) {
                if (std::abs(base) > half) { lo = 1.0; hi = 0.0; }
                return;
            }
            double t0 = (-half - base) / a.c;
            double t1 = (half - base) / a.c;
            if (t0 > t1) std::swap(t0, t1);
            lo = std::max(lo, t0);
            hi = std::min(hi, t1);
        };
        slab(u, box.l1 + eps);
        slab(w, box.l2 + eps);
        if (lo > hi) continue;
        int c0 = static_cast<int>(std::ceil(box.c + lo - eps));
        int c1 = static_cast<int>(std::floor(box.c + hi + eps));
        // The eps-widened interval may admit one extra column; confirm the ends.
        while (c0 <= c1 && !obox::contains(box, {double(r), double(c0)}, 2 * eps)) ++c0;
        while (c1 >= c0 && !obox::contains(box, {double(r), double(c1)}, 2 * eps)) --c1;
        if (image_width >= 0) {
            c0 = std::max(c0, 0);
            c1 = std::min(c1, image_width - 1);
        }
        if (c0 <= c1) runs.push_back({r, c0, c1 + 1});
    }
    return BinaryRegion(std::move(runs));
}

bool BinaryRegion::contains(int row, int col) const {
    auto it = std::upper_bound(runs_.begin(), runs_.end(), Run{row, col, col},
                               [](const Run& a, const Run& b) {
                                   return a.row != b.row ? a.row < b.row : a.col_begin < b.col_begin;
                               });
    if (it == runs_.begin()) return false;
    --it;
    return it->row == row && col >= it->col_begin && col < it->col_end;
}

AxisAlignedBox BinaryRegion::bounds() const {
    require_nonempty(*this, "bounds");
    int c_min = std::numeric_limits<int>::max();
    int c_max = std::numeric_limits<int>::min();
    for (const Run& run : runs_) {
        c_min = std::min(c_min, run.col_begin);
        c_max = std::max(c_max, run.col_end - 1);
    }
    return {double(runs_.front().row), double(c_min), double(runs_.back().row), double(c_max)};
}

std::vector<uint8_t> BinaryRegion::to_mask(int height, int width) const {
    std::vector<uint8_t> mask(static_cast<size_t>(height) * width, 0);
    for (const Run& run : runs_) {
        if (run.row < 0 || run.row >= height) continue;
        const int b = std::max(run.col_begin, 0);
        const int e = std::min(run.col_end, width);
        for (int c = b; c < e; ++c) mask[static_cast<size_t>(run.row) * width + c] = 1;
    }
    return mask;
}

BinaryRegion BinaryRegion::intersect(const BinaryRegion& other) const {
    std::vector<Run> out;
    size_t i = 0, j = 0;
    const auto& a = runs_;
    const auto& b = other.runs_;
    while (i < a.size() && j < b.size()) {
        if (a[i].row != b[j].row) {
            (a[i].row < b[j].row) ? ++i : ++j;
            continue;
        }
        const int lo = std::max(a[i].col_begin, b[j].col_begin);
        const int hi = std::min(a[i].col_end, b[j].col_end);
        if (lo < hi) out.push_back({a[i].row, lo, hi});
        (a[i].col_end < b[j].col_end) ? ++i : ++j;
    }
    return BinaryRegion(std::move(out));
}

BinaryRegion BinaryRegion::subtract(const BinaryRegion& other) const {
    std::vector<Run> out;
    size_t j = 0;
    const auto& b = other.runs_;
    for (const Run& run : runs_) {
        while (j < b.size() && (b[j].row < run.row || (b[j].row == run.row && b[j].col_end <= run.col_begin))) ++j;
        int cursor = run.col_begin;
        for (size_t k = j; k < b.size() && b[k].row == run.row && b[k].col_begin < run.col_end; ++k) {
            if (b[k].col_begin > cursor) out.push_back({run.row, cursor, b[k].col_begin});
            cursor = std::max(cursor, b[k].col_end);
        }
        if (cursor < run.col_end) out.push_back({run.row, cursor, run.col_end});
    }
    return BinaryRegion(std::move(out));
}

BinaryRegion BinaryRegion::translate(int d_row, int d_col) const {
    std::vector<Run> out(runs_.begin(), runs_.end());
    for (Run& run : out) {
        run.row += d_row;
        run.col_begin += d_col;
        run.col_end += d_col;
    }
    return BinaryRegion(std::move(out));
}

int64_t intersection_area(const BinaryRegion& a, const BinaryRegion& b) {
    const auto ra = a.runs();
    const auto rb = b.runs();
    size_t i = 0, j = 0;
    int64_t total = 0;
    while (i < ra.size() && j < rb.size()) {
        if (ra[i].row != rb[j].row) {
            (ra[i].row < rb[j].row) ? ++i : ++j;
            continue;
        }
        const int lo = std::max(ra[i].col_begin, rb[j].col_begin);
        const int hi = std::min(ra[i].col_end, rb[j].col_end);
        if (lo < hi) total += hi - lo;
        (ra[i].col_end < rb[j].col_end) ? ++i : ++j;
    }
    return total;
}

double mask_iou(const BinaryRegion& a, const BinaryRegion& b) {
    const int64_t inter = intersection_area(a, b);
    const int64_t uni = a.area() + b.area() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

Moments moments(const BinaryRegion& region) {
    require_nonempty(region, "moments");
    i128 n = 0, sr = 0, sc = 0, srr = 0, scc = 0, src = 0;
    for (const Run& run : region.runs()) {
        const i128 k = run.length();
        const i128 r = run.row;
        const i128 lin = sum_lin(run.col_begin, run.col_end);
        n += k;
        sr += r * k;
        srr += r * r * k;
        sc += lin;
        scc += sum_sq(run.col_begin, run.col_end);
        src += r * lin;
    }
    Moments m;
    m.n = static_cast<int64_t>(n);
    const long double nd = static_cast<long double>(n);
    m.r0 = static_cast<double>(static_cast<long double>(sr) / nd);
    m.c0 = static_cast<double>(static_cast<long double>(sc) / nd);
    m.m20 = static_cast<double>(static_cast<long double>(n * srr - sr * sr) / nd);
    m.m02 = static_cast<double>(static_cast<long double>(n * scc - sc * sc) / nd);
    m.m11 = static_cast<double>(static_cast<long double>(n * src - sr * sc) / nd);
    return m;
}

OrientationResult orientation(const BinaryRegion& region) {
    const Moments m = moments(region);
    if (m.m20 == 0.0 && m.m02 == 0.0 && m.m11 == 0.0) return {0.0, true};
    double phi = -0.5 * std::atan2(2.0 * m.m11, m.m02 - m.m20);
    if (phi <= -kPi / 2) phi += kPi;
    return {phi, false};
}

Point2 farthest_pixel(const BinaryRegion& region) {
    const Moments m = moments(region);
    Point2 best{};
    double best_d = -1.0;
    for_each_extreme_pixel(region, [&](double r, double c) {
        const double d = (r - m.r0) * (r - m.r0) + (c - m.c0) * (c - m.c0);
        if (d > best_d) {
            best_d = d;
            best = {r, c};
        }
    });
    return best;
}

double correct_direction(const BinaryRegion& region, double phi) {
    const Moments m = moments(region);
    const Point2 p = farthest_pixel(region);
    const Point2 u = major_axis(phi);
    const double dot = u.r * (p.r - m.r0) + u.c * (p.c - m.c0);
    return normalize_angle(dot < 0.0 ? phi + kPi : phi, false);
}

OrientedBox smallest_oriented_box_at(const BinaryRegion& region, double phi) {
    require_nonempty(region, "smallest_oriented_box_at");
    if (!std::isfinite(phi)) throw DomainError("smallest_oriented_box_at: non-finite angle");
    const Point2 u = major_axis(phi);
    const Point2 w = minor_axis(phi);
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for_each_extreme_pixel(region, [&](double r, double c) {
        const double x = r * u.r + c * u.c;
        const double y = r * w.r + c * w.c;
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
    });
    const double xm = 0.5 * (x_min + x_max);
    const double ym = 0.5 * (y_min + y_max);
    return {xm * u.r + ym * w.r, xm * u.c + ym * w.c, std::max(0.5 * (x_max - x_min), kMinSemiAxis),
            std::max(0.5 * (y_max - y_min), kMinSemiAxis), phi};
}

std::vector<Point2> convex_hull(const BinaryRegion& region) {
    std::vector<Point2> pts;
    for_each_extreme_pixel(region, [&](double r, double c) { pts.push_back({r, c}); });
    std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.r != b.r ? a.r < b.r : a.c < b.c; });
    pts.erase(std::unique(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.r == b.r && a.c == b.c; }),
              pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point2> hull(2 * pts.size());
    size_t k = 0;
    for (const Point2& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    const size_t lower = k + 1;
    for (size_t i = pts.size() - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

OrientedBox smallest_obb(const BinaryRegion& region, bool ignore_direction) {
    require_nonempty(region, "smallest_obb");
    const std::vector<Point2> hull = convex_hull(region);
    const size_t n = hull.size();
    if (n == 1) {
        return {hull[0].r, hull[0].c, kMinSemiAxis, kMinSemiAxis, 0.0};
    }
    if (n == 2) {
        Point2 e{hull[1].r - hull[0].r, hull[1].c - hull[0].c};
        const double len = std::hypot(e.r, e.c);
        e = {e.r / len, e.c / len};
        return make_box(hull[0], e, {-e.c, e.r}, 0.0, len, 0.0, 0.0, ignore_direction);
    }

    auto dot = [](Point2 a, Point2 b) { return a.r * b.r + a.c * b.c; };
    auto at = [&](size_t i) { return hull[i % n]; };

    double best_area = std::numeric_limits<double>::infinity();
    OrientedBox best;
    // Caliper indices: farthest along the edge, farthest from the edge, and
    // farthest against the edge. All advance monotonically around the hull.
    size_t j = 1, k = 1, m = 1;
    for (size_t i = 0; i < n; ++i) {
        const Point2 p = hull[i];
        Point2 e{at(i + 1).r - p.r, at(i + 1).c - p.c};
        const double len = std::hypot(e.r, e.c);
        e = {e.r / len, e.c / len};
        const Point2 nrm{-e.c, e.r};  // points into the hull
        auto proj = [&](size_t idx) { return dot({at(idx).r - p.r, at(idx).c - p.c}, e); };
        auto height = [&](size_t idx) { return dot({at(idx).r - p.r, at(idx).c - p.c}, nrm); };

        if (i == 0) j = 1;
        if (j < i + 1) j = i + 1;
        for (size_t guard = 0; guard < n && proj(j + 1) >= proj(j); ++guard) ++j;
        if (i == 0) k = j;
        if (k < j) k = j;
        for (size_t guard = 0; guard < n && height(k + 1) >= height(k); ++guard) ++k;
        if (i == 0) m = k;
        if (m < k) m = k;
        for (size_t guard = 0; guard < n && proj(m + 1) <= proj(m); ++guard) ++m;

        const double x_max = proj(j);
        const double x_min = std::min(0.0, proj(m));
        const double h = height(k);
        const double area = (x_max - x_min) * h;
        if (area < best_area - 1e-9) {
            best_area = area;
            best = make_box(p, e, nrm, x_min, x_max, 0.0, h, ignore_direction);
        }
    }
    return best;
}

OrientedBox smallest_aabb_box(const BinaryRegion& region) {
    const AxisAlignedBox bb = region.bounds();
    return {0.5 * (bb.r_min + bb.r_max), 0.5 * (bb.c_min + bb.c_max),
            std::max(0.5 * bb.width(), kMinSemiAxis), std::max(0.5 * bb.height(), kMinSemiAxis), 0.0};
}

OrientedBox gt_box_from_mask(const BinaryRegion& region, bool class_is_oriented, bool ignore_direction) {
    require_nonempty(region, "gt_box_from_mask");
    if (!class_is_oriented) return smallest_aabb_box(region);
    if (ignore_direction) return smallest_obb(region, true);
    const OrientationResult o = orientation(region);
    return smallest_oriented_box_at(region, correct_direction(region, o.phi));
}

RefineResult refine_orientation_from_mask(const OrientedBox& box, const BinaryRegion& region,
                                          bool ignore_direction) {
    if (region.empty()) return {box, false};
    const OrientationResult o = orientation(region);
    if (o.degenerate) return {box, false};
    OrientedBox out = box;
    // The moment angle describes the major axis; keep l1/l2 attached to the box.
    double phi = o.phi + (box.l1 < box.l2 ? kPi / 2 : 0.0);
    if (ignore_direction) {
        out.phi = normalize_angle(phi, true);
    } else if (box.l1 >= box.l2) {
        out.phi = correct_direction(region, phi);
    } else {
        // Head/tail is only defined along the major axis; take the variant closest to the box.
        const double flipped = normalize_angle(phi + kPi, false);
        phi = normalize_angle(phi, false);
        auto dist = [&](double a) { return std::abs(normalize_angle(a - box.phi, false)); };
        out.phi = dist(phi) <= dist(flipped) ? phi : flipped;
    }
    return {out, true};
}

}  // namespace obox
