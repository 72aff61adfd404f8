#include "semeq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semeq/errors.hpp"

namespace semeq {

Curve2D curve_from_eq(const EqCurve& curve) {
    Curve2D c;
    c.x.reserve(kNumBands);
    c.y.reserve(kNumBands);
    for (std::size_t i = 0; i < kNumBands; ++i) {
        c.x.push_back(std::log10(curve.band_centers_hz[i]));
        c.y.push_back(curve.gains_db[i]);
    }
    return c;
}

namespace {

struct ScaledCurve {
    std::vector<double> x, y;
    std::vector<double> cum; // cumulative arc length, cum[0] = 0
    double length = 0.0;
};

void validate(const Curve2D& c, const char* which) {
    if (c.x.size() != c.y.size() || c.x.size() < 2) {
        throw ArgumentError(std::string("pcm_distance: ") + which +
                            " curve needs >= 2 points with matching x/y");
    }
    for (std::size_t i = 0; i < c.x.size(); ++i) {
        if (!std::isfinite(c.x[i]) || !std::isfinite(c.y[i])) {
            throw NumericError(std::string("pcm_distance: ") + which +
                               " curve has a non-finite coordinate");
        }
    }
}

ScaledCurve scale_by_reference(const Curve2D& c, double x0, double xs,
                               double y0, double ys) {
    ScaledCurve s;
    s.x.resize(c.size());
    s.y.resize(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        s.x[i] = (c.x[i] - x0) / xs;
        s.y[i] = (c.y[i] - y0) / ys;
    }
    s.cum.resize(c.size());
    s.cum[0] = 0.0;
    for (std::size_t i = 1; i < c.size(); ++i) {
        double dx = s.x[i] - s.x[i - 1];
        double dy = s.y[i] - s.y[i - 1];
        s.cum[i] = s.cum[i - 1] + std::hypot(dx, dy);
    }
    s.length = s.cum.back();
    return s;
}

// Point on the polyline at arc length t (clamped to the ends).
void point_at(const ScaledCurve& c, double t, double& px, double& py) {
    if (t <= 0.0) {
        px = c.x.front();
        py = c.y.front();
        return;
    }
    if (t >= c.length) {
        px = c.x.back();
        py = c.y.back();
        return;
    }
    auto it = std::upper_bound(c.cum.begin(), c.cum.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - c.cum.begin());
    std::size_t lo = hi - 1;
    double seg = c.cum[hi] - c.cum[lo];
    double u = seg > 0.0 ? (t - c.cum[lo]) / seg : 0.0;
    px = c.x[lo] + u * (c.x[hi] - c.x[lo]);
    py = c.y[lo] + u * (c.y[hi] - c.y[lo]);
}

double area_at_offset(const ScaledCurve& shrt, const ScaledCurve& lng,
                      double offset) {
    double area = 0.0;
    double prev_d = 0.0;
    for (std::size_t j = 0; j < shrt.x.size(); ++j) {
        double px, py;
        point_at(lng, offset + shrt.cum[j], px, py);
        double d = std::hypot(shrt.x[j] - px, shrt.y[j] - py);
        if (j > 0) {
            area += 0.5 * (prev_d + d) * (shrt.cum[j] - shrt.cum[j - 1]);
        }
        prev_d = d;
    }
    return area;
}

} // namespace

double pcm_distance(const Curve2D& reference, const Curve2D& candidate) {
    validate(reference, "reference");
    validate(candidate, "candidate");

    double xmin = reference.x[0], xmax = reference.x[0];
    double ymin = reference.y[0], ymax = reference.y[0];
    for (std::size_t i = 1; i < reference.size(); ++i) {
        xmin = std::min(xmin, reference.x[i]);
        xmax = std::max(xmax, reference.x[i]);
        ymin = std::min(ymin, reference.y[i]);
        ymax = std::max(ymax, reference.y[i]);
    }
    // zero-extent axes scale by 1 so flat curves stay well defined
    double xs = (xmax > xmin) ? (xmax - xmin) : 1.0;
    double ys = (ymax > ymin) ? (ymax - ymin) : 1.0;

    ScaledCurve ref = scale_by_reference(reference, xmin, xs, ymin, ys);
    ScaledCurve cand = scale_by_reference(candidate, xmin, xs, ymin, ys);

    const ScaledCurve& shrt = (cand.length <= ref.length) ? cand : ref;
    const ScaledCurve& lng = (cand.length <= ref.length) ? ref : cand;

    const double slack = lng.length - shrt.length;
    const double eps = 1e-12 * std::max(1.0, lng.length);

    double best = std::numeric_limits<double>::infinity();
    for (double offset : lng.cum) {
        if (offset > slack + eps) break;
        best = std::min(best, area_at_offset(shrt, lng, std::min(offset, slack)));
    }
    return best;
}

double mae_db(const EqCurve& a, const EqCurve& b) {
    for (std::size_t i = 0; i < kNumBands; ++i) {
        if (a.band_centers_hz[i] != b.band_centers_hz[i]) {
            throw ArgumentError("mae_db: band grids differ at band " +
                                std::to_string(i));
        }
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < kNumBands; ++i) {
        sum += std::abs(a.gains_db[i] - b.gains_db[i]);
    }
    return sum / static_cast<double>(kNumBands);
}

double mae_normalized(const EqCurve& a, const EqCurve& b) {
    return mae_db(a, b) / 8.0;
}

} // namespace semeq
