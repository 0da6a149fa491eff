#pragma once

#include <array>
#include <numbers>

namespace obox {

inline constexpr double kPi = std::numbers::pi;

/// Subpixel point in image coordinates. The row axis points down, the column
/// axis points right.
struct Point2 {
    double r = 0.0;
    double c = 0.0;
};

/// Axis-aligned box given by its extreme row/column coordinates.
struct AxisAlignedBox {
    double r_min = 0.0;
    double c_min = 0.0;
    double r_max = 0.0;
    double c_max = 0.0;

    double height() const { return r_max - r_min; }
    double width() const { return c_max - c_min; }
    double area() const { return height() * width(); }
};

/// Five-parameter oriented box.
///
/// (r, c) is the center, l1 and l2 are semi-axis lengths and phi is the angle
/// between the positive column axis and the l1-axis, measured in the
/// mathematically positive sense as seen on screen (counterclockwise with the
/// row axis pointing down). The l1-axis direction in (row, column) coordinates
/// is therefore (-sin phi, cos phi). l1 >= l2 is not required.
struct OrientedBox {
    double r = 0.0;
    double c = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    double phi = 0.0;

    double area() const { return 4.0 * l1 * l2; }
};

/// Throws DomainError unless every field is finite and both semi-axes are positive.
void validate(const OrientedBox& box);
bool is_valid(const OrientedBox& box);

/// Unit vector of the l1-axis, in (row, column) coordinates.
Point2 major_axis(double phi);
/// Unit vector of the l2-axis direction used for pooled grid rows; together with
/// major_axis it forms a right-handed frame matching (column, row) for phi = 0.
Point2 minor_axis(double phi);

/// Reduces phi to (-pi/2, pi/2] (ignore_direction) or (-pi, pi].
/// Throws DomainError for non-finite input.
double normalize_angle(double phi, bool ignore_direction);

/// Corner points, counterclockwise on screen, starting at the (+l1, +l2) corner
/// in the box frame.
std::array<Point2, 4> corners(const OrientedBox& box);

AxisAlignedBox to_aabb(const OrientedBox& box);

/// The same rectangle expressed as an oriented box with phi = 0.
OrientedBox from_aabb(const AxisAlignedBox& box);

/// Intersection area of two oriented boxes (Sutherland-Hodgman clipping).
double intersection_area(const OrientedBox& a, const OrientedBox& b);

/// Exact intersection over union of two oriented boxes.
double iou(const OrientedBox& a, const OrientedBox& b);

/// Intersection over union of two axis-aligned boxes (continuous areas).
double iou(const AxisAlignedBox& a, const AxisAlignedBox& b);

/// Angle-related IoU: max(0, cos(phi_a - phi_b)) * IoU(a with phi_b, b).
/// `anchor` plays the role of A, `gt` of B; not symmetric.
double ar_iou(const OrientedBox& anchor, const OrientedBox& gt);

/// True if the point lies inside the closed box, with slack `eps` along both axes.
bool contains(const OrientedBox& box, Point2 p, double eps = 1e-9);

}  // namespace obox
