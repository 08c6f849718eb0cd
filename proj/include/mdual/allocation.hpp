#pragma once

#include <cstddef>
#include <vector>

namespace mdual {

using Vec = std::vector<double>;

constexpr double kDefaultTol = 1e-9;

double dot(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);

// Feasible allocations S, stored by vertex list.  With hull == true S is the
// convex hull of the vertices, otherwise S is exactly the vertex set.
struct AllocationSet {
    std::vector<Vec> vertices;
    bool hull = true;

    AllocationSet() = default;
    AllocationSet(std::vector<Vec> vertices_, bool hull_);

    std::size_t dim() const { return vertices.front().size(); }
    std::size_t size() const { return vertices.size(); }
};

// sup over S of s.d.  Attained at a vertex in both the hull and the finite case.
double support_value(const AllocationSet& S, const Vec& d);

// l_S(x, y) = support_value(S, x - y).
double ell(const AllocationSet& S, const Vec& x, const Vec& y);

// Indices of all vertices within tol of the support value in direction d.
std::vector<std::size_t> argmax_vertices(const AllocationSet& S, const Vec& d,
                                         double tol = kDefaultTol);

enum class Exposure {
    unique,  // s must be the only maximizer for some sampled direction
    tied     // s may share the maximum with other vertices
};

// Sampling test for membership of s in exp(S).  s must be one of the vertices.
bool is_exposed(const AllocationSet& S, const Vec& s, const std::vector<Vec>& direction_samples,
                double tol = kDefaultTol, Exposure mode = Exposure::unique);

// Precomputed v.x for every vertex, so l_S(x, y) = max_k (px[k] - py[k]).
struct Projected {
    std::vector<double> values;  // row-major, points x vertices
    std::size_t nv = 0;

    const double* row(std::size_t i) const { return values.data() + i * nv; }
};

Projected project(const AllocationSet& S, const std::vector<Vec>& points);

inline double ell_projected(const double* px, const double* py, std::size_t nv) {
    double best = px[0] - py[0];
    for (std::size_t k = 1; k < nv; ++k) {
        double v = px[k] - py[k];
        if (v > best) best = v;
    }
    return best;
}

}  // namespace mdual
