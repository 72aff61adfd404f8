#pragma once

#include <vector>

#include "semeq/dataset.hpp"

namespace semeq {

// A planar polyline with strictly increasing x. For EQ curves x is
// log10(band center in Hz) and y is the gain in dB.
struct Curve2D {
    std::vector<double> x;
    std::vector<double> y;
    std::size_t size() const { return x.size(); }
};

Curve2D curve_from_eq(const EqCurve& curve);

// Partial Curve Mapping distance between a reference curve and a candidate.
//
// Both curves are translated and scaled by the reference's x/y extents
// (an axis with zero extent is scaled by 1). The curve with the smaller
// total arc length slides along the longer one: for every trial offset
// taken from the longer curve's vertex arc lengths (such that the short
// curve still fits), each short-curve vertex at arc length s is matched
// with the point at arc length offset+s on the long curve, and the
// distances are integrated over arc length with the trapezoid rule. The
// smallest such area is the distance. The reference argument is the
// normalization anchor, so the order of arguments matters and is kept
// fixed across all experiments (reference = human ground truth).
double pcm_distance(const Curve2D& reference, const Curve2D& candidate);

// Mean absolute gain difference across the 40 bands, in dB. Both curves
// must share the same band grid.
double mae_db(const EqCurve& a, const EqCurve& b);

// Same value on the normalized [0,1] scale (dB value divided by 8).
double mae_normalized(const EqCurve& a, const EqCurve& b);

} // namespace semeq
