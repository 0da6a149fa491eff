#include "obox/targets.hpp"

#include <cmath>

#include "obox/errors.hpp"

namespace obox {

BoxDeltas encode(const OrientedBox& anchor, const OrientedBox& gt, bool /*ignore_direction*/) {
    validate(anchor);
    validate(gt);
    const double mean_len = 0.5 * (anchor.l1 + anchor.l2);
    BoxDeltas d;
    d.d_r = (gt.r - anchor.r) / mean_len;
    d.d_c = (gt.c - anchor.c) / mean_len;
    d.d_l1 = std::log(gt.l1 / anchor.l1);
    d.d_l2 = std::log(gt.l2 / anchor.l2);
    // The residual is taken modulo pi in both direction modes.
    d.d_phi = normalize_angle(gt.phi - anchor.phi, true);
    return d;
}

OrientedBox decode(const OrientedBox& anchor, const BoxDeltas& deltas, bool ignore_direction) {
    validate(anchor);
    if (!std::isfinite(deltas.d_r) || !std::isfinite(deltas.d_c) || !std::isfinite(deltas.d_l1) ||
        !std::isfinite(deltas.d_l2) || !std::isfinite(deltas.d_phi)) {
        throw DomainError("decode: non-finite deltas");
    }
    const double mean_len = 0.5 * (anchor.l1 + anchor.l2);
    OrientedBox box;
    box.r = anchor.r + deltas.d_r * mean_len;
    box.c = anchor.c + deltas.d_c * mean_len;
    box.l1 = anchor.l1 * std::exp(deltas.d_l1);
    box.l2 = anchor.l2 * std::exp(deltas.d_l2);
    if (!std::isfinite(box.l1) || !std::isfinite(box.l2) || box.l1 <= 0.0 || box.l2 <= 0.0) {
        throw DomainError("decode: length delta overflows");
    }
    box.phi = normalize_angle(anchor.phi + deltas.d_phi, ignore_direction);
    validate(box);
    return box;
}

}  // namespace obox
