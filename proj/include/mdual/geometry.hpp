#pragma once

#include <array>
#include <vector>

#include "mdual/allocation.hpp"

namespace mdual {

// a.x >= b
struct Halfspace {
    Vec a;
    double b = 0.0;
};

using Region = std::vector<Halfspace>;

bool contains(const Region& region, const Vec& x, double tol = 0.0);

// Fraction of the box [lo, hi] lying in the region.  Degenerate axes are allowed, so
// the box may be a point, a segment or a rectangle.  Segments (any n) and rectangles
// (n = 2) are clipped exactly; boxes of higher dimension use their midpoint.
double overlap_fraction(const Region& region, const Vec& lo, const Vec& hi);

// Sutherland-Hodgman clip of a planar polygon against a half plane.
std::vector<std::array<double, 2>> clip_polygon(const std::vector<std::array<double, 2>>& poly,
                                                const Halfspace& h);

double polygon_area(const std::vector<std::array<double, 2>>& poly);

}  // namespace mdual
