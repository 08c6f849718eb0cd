#include "mdual/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace mdual {

bool contains(const Region& region, const Vec& x, double tol) {
    for (const auto& h : region)
        if (dot(h.a, x) < h.b - tol) return false;
    return true;
}

std::vector<std::array<double, 2>> clip_polygon(const std::vector<std::array<double, 2>>& poly,
                                                const Halfspace& h) {
    std::vector<std::array<double, 2>> out;
    const std::size_t m = poly.size();
    if (m == 0) return out;
    auto val = [&](const std::array<double, 2>& p) { return h.a[0] * p[0] + h.a[1] * p[1] - h.b; };
    for (std::size_t i = 0; i < m; ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % m];
        double vp = val(p), vq = val(q);
        if (vp >= 0) out.push_back(p);
        if ((vp >= 0) != (vq >= 0)) {
            double t = vp / (vp - vq);
            out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
        }
    }
    return out;
}

double polygon_area(const std::vector<std::array<double, 2>>& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        s += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * std::abs(s);
}

double overlap_fraction(const Region& region, const Vec& lo, const Vec& hi) {
    const std::size_t n = lo.size();
    std::vector<std::size_t> axes;
    for (std::size_t k = 0; k < n; ++k)
        if (hi[k] > lo[k]) axes.push_back(k);

    if (axes.empty()) return contains(region, lo) ? 1.0 : 0.0;

    if (axes.size() == 1) {
        // Segment lo + t (hi - lo), t in [0, 1].
        const Vec d = sub(hi, lo);
        double t0 = 0.0, t1 = 1.0;
        for (const auto& h : region) {
            double a = dot(h.a, d);
            double c = h.b - dot(h.a, lo);  // need a t >= c
            if (a == 0.0) {
                if (c > 0.0) return 0.0;
            } else if (a > 0.0) {
                t0 = std::max(t0, c / a);
            } else {
                t1 = std::min(t1, c / a);
            }
            if (t0 >= t1) return 0.0;
        }
        return t1 - t0;
    }

    if (n == 2) {
        std::vector<std::array<double, 2>> poly = {
            {lo[0], lo[1]}, {hi[0], lo[1]}, {hi[0], hi[1]}, {lo[0], hi[1]}};
        const double area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
        for (const auto& h : region) {
            poly = clip_polygon(poly, h);
            if (poly.size() < 3) return 0.0;
        }
        return std::clamp(polygon_area(poly) / area, 0.0, 1.0);
    }

    Vec mid(n);
    for (std::size_t k = 0; k < n; ++k) mid[k] = 0.5 * (lo[k] + hi[k]);
    return contains(region, mid) ? 1.0 : 0.0;
}

}  // namespace mdual
