#pragma once

#include "obox/geometry.hpp"

namespace obox {

/// Regression targets of a box relative to an anchor.
///
/// Center offsets are normalized by the anchor's mean semi-axis
/// (l1 + l2) / 2, lengths are natural-log ratios, and the angle residual is
/// reduced modulo pi into (-pi/2, pi/2].
struct BoxDeltas {
    double d_r = 0.0;
    double d_c = 0.0;
    double d_l1 = 0.0;
    double d_l2 = 0.0;
    double d_phi = 0.0;
};

/// Throws DomainError on invalid boxes.
BoxDeltas encode(const OrientedBox& anchor, const OrientedBox& gt, bool ignore_direction);

/// Inverse of encode; the output angle is canonicalized. Throws DomainError when
/// the result is not a valid box (non-finite deltas, exp overflow).
OrientedBox decode(const OrientedBox& anchor, const BoxDeltas& deltas, bool ignore_direction);

}  // namespace obox
