#include "obox/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "obox/errors.hpp"

namespace obox {

namespace {

// Intersection areas below this are treated as empty.
constexpr double kMinIntersectionArea = 1e-12;

// Fixed-capacity polygon; clipping a quad by four half-planes yields at most 8 vertices.
struct Polygon {
    std::array<Point2, 12> pts{};
    int n = 0;
};

inline double cross(Point2 a, Point2 b) { return a.r * b.c - a.c * b.r; }
inline Point2 sub(Point2 a, Point2 b) { return {a.r - b.r, a.c - b.c}; }

// Signed side of p relative to the directed edge a->b; positive is inside for
// a counterclockwise (on screen) polygon.
inline double side(Point2 a, Point2 b, Point2 p) { return cross(sub(b, a), sub(p, a)); }

void clip(const Polygon& in, Point2 a, Point2 b, Polygon& out) {
    out.n = 0;
    if (in.n == 0) return;
    Point2 s = in.pts[in.n - 1];
    double ds = side(a, b, s);
    for (int i = 0; i < in.n; ++i) {
        const Point2 e = in.pts[i];
        const double de = side(a, b, e);
        const bool e_in = de >= 0.0;
        const bool s_in = ds >= 0.0;
        if (e_in != s_in) {
            const double t = ds / (ds - de);
            out.pts[out.n++] = {s.r + t * (e.r - s.r), s.c + t * (e.c - s.c)};
        }
        if (e_in) out.pts[out.n++] = e;
        s = e;
        ds = de;
    }
}

double shoelace(const Polygon& p) {
    double acc = 0.0;
    for (int i = 0; i < p.n; ++i) {
        const Point2 a = p.pts[i];
        const Point2 b = p.pts[(i + 1) % p.n];
        acc += cross(a, b);
    }
    return 0.5 * acc;
}

}  // namespace

bool is_valid(const OrientedBox& box) {
    return std::isfinite(box.r) && std::isfinite(box.c) && std::isfinite(box.l1) &&
           std::isfinite(box.l2) && std::isfinite(box.phi) && box.l1 > 0.0 && box.l2 > 0.0;
}

void validate(const OrientedBox& box) {
    if (!is_valid(box)) {
        throw DomainError("invalid oriented box (" + std::to_string(box.r) + ", " +
                          std::to_string(box.c) + ", " + std::to_string(box.l1) + ", " +
                          std::to_string(box.l2) + ", " + std::to_string(box.phi) +
                          "): fields must be finite and semi-axes positive");
    }
}

Point2 major_axis(double phi) { return {-std::sin(phi), std::cos(phi)}; }

Point2 minor_axis(double phi) { return {std::cos(phi), std::sin(phi)}; }

double normalize_angle(double phi, bool ignore_direction) {
    if (!std::isfinite(phi)) throw DomainError("normalize_angle: non-finite angle");
    if (ignore_direction) {
        double x = std::fmod(phi, kPi);
        if (x > kPi / 2) x -= kPi;
        if (x <= -kPi / 2) x += kPi;
        return x;
    }
    double x = std::fmod(phi, 2.0 * kPi);
    if (x > kPi) x -= 2.0 * kPi;
    if (x <= -kPi) x += 2.0 * kPi;
    return x;
}

std::array<Point2, 4> corners(const OrientedBox& box) {
    const double cs = std::cos(box.phi);
    const double sn = std::sin(box.phi);
    // l1-axis u = (-sn, cs); l2-axis v = (-cs, -sn), both in (row, column).
    const double ur = -sn * box.l1, uc = cs * box.l1;
    const double vr = -cs * box.l2, vc = -sn * box.l2;
    return {{
        {box.r + ur + vr, box.c + uc + vc},
        {box.r - ur + vr, box.c - uc + vc},
        {box.r - ur - vr, box.c - uc - vc},
        {box.r + ur - vr, box.c + uc - vc},
    }};
}

AxisAlignedBox to_aabb(const OrientedBox& box) {
    const double hr = std::abs(std::sin(box.phi)) * box.l1 + std::abs(std::cos(box.phi)) * box.l2;
    const double hc = std::abs(std::cos(box.phi)) * box.l1 + std::abs(std::sin(box.phi)) * box.l2;
    return {box.r - hr, box.c - hc, box.r + hr, box.c + hc};
}

OrientedBox from_aabb(const AxisAlignedBox& box) {
    return {0.5 * (box.r_min + box.r_max), 0.5 * (box.c_min + box.c_max), 0.5 * box.width(),
            0.5 * box.height(), 0.0};
}

double intersection_area(const OrientedBox& a, const OrientedBox& b) {
    const double dr = a.r - b.r;
    const double dc = a.c - b.c;
    const double reach = std::sqrt(a.l1 * a.l1 + a.l2 * a.l2) + std::sqrt(b.l1 * b.l1 + b.l2 * b.l2);
    if (dr * dr + dc * dc >= reach * reach) return 0.0;

    const auto qa = corners(a);
    const auto qb = corners(b);
    Polygon p0, p1;
    for (int i = 0; i < 4; ++i) p0.pts[i] = qa[i];
    p0.n = 4;
    Polygon* cur = &p0;
    Polygon* nxt = &p1;
    for (int i = 0; i < 4 && cur->n > 0; ++i) {
        clip(*cur, qb[i], qb[(i + 1) % 4], *nxt);
        std::swap(cur, nxt);
    }
    if (cur->n < 3) return 0.0;
    const double area = std::abs(shoelace(*cur));
    return area < kMinIntersectionArea ? 0.0 : area;
}

double iou(const OrientedBox& a, const OrientedBox& b) {
    const double inter = intersection_area(a, b);
    if (inter <= 0.0) return 0.0;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double iou(const AxisAlignedBox& a, const AxisAlignedBox& b) {
    const double h = std::min(a.r_max, b.r_max) - std::max(a.r_min, b.r_min);
    const double w = std::min(a.c_max, b.c_max) - std::max(a.c_min, b.c_min);
    if (h <= 0.0 || w <= 0.0) return 0.0;
    const double inter = h * w;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double ar_iou(const OrientedBox& anchor, const OrientedBox& gt) {
    const double gate = std::max(0.0, std::cos(anchor.phi - gt.phi));
    if (gate == 0.0) return 0.0;
    OrientedBox rotated = anchor;
    rotated.phi = gt.phi;
    return gate * iou(rotated, gt);
}

bool contains(const OrientedBox& box, Point2 p, double eps) {
    const Point2 u = major_axis(box.phi);
    const Point2 w = minor_axis(box.phi);
    const double dr = p.r - box.r;
    const double dc = p.c - box.c;
    const double x = dr * u.r + dc * u.c;
    const double y = dr * w.r + dc * w.c;
    return std::abs(x) <= box.l1 + eps && std::abs(y) <= box.l2 + eps;
}

}  // namespace obox
