#include "mdual/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdual/error.hpp"

namespace mdual {

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vec sub(const Vec& a, const Vec& b) {
    Vec d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

AllocationSet::AllocationSet(std::vector<Vec> vertices_, bool hull_)
    : vertices(std::move(vertices_)), hull(hull_) {
    if (vertices.empty()) throw InputError("allocation set has no vertices");
    const std::size_t n = vertices.front().size();
    if (n == 0) throw InputError("allocation vertices have dimension 0");
    for (const auto& v : vertices) {
        if (v.size() != n) throw InputError("allocation vertices differ in dimension");
        for (double c : v)
            if (!std::isfinite(c)) throw InputError("allocation vertex has a non-finite coordinate");
    }
}

static void check_dim(const AllocationSet& S, const Vec& d) {
    if (d.size() != S.dim())
        throw InputError("direction has dimension " + std::to_string(d.size()) + ", expected " +
                         std::to_string(S.dim()));
}

double support_value(const AllocationSet& S, const Vec& d) {
    check_dim(S, d);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : S.vertices) best = std::max(best, dot(v, d));
    return best;
}

double ell(const AllocationSet& S, const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw InputError("ell: point dimensions differ");
    return support_value(S, sub(x, y));
}

std::vector<std::size_t> argmax_vertices(const AllocationSet& S, const Vec& d, double tol) {
    if (tol < 0) throw InputError("argmax_vertices: negative tolerance");
    const double h = support_value(S, d);
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < S.size(); ++k)
        if (dot(S.vertices[k], d) >= h - tol) out.push_back(k);
    return out;
}

bool is_exposed(const AllocationSet& S, const Vec& s, const std::vector<Vec>& direction_samples,
                double tol, Exposure mode) {
    check_dim(S, s);
    std::size_t idx = S.size();
    for (std::size_t k = 0; k < S.size(); ++k) {
        bool same = true;
        for (std::size_t i = 0; i < s.size(); ++i) same = same && std::abs(S.vertices[k][i] - s[i]) <= tol;
        if (same) {
            idx = k;
            break;
        }
    }
    if (idx == S.size()) throw InputError("is_exposed: s is not a vertex of S");

    for (const auto& d : direction_samples) {
        auto winners = argmax_vertices(S, d, tol);
        // Duplicate copies of s in the vertex list do not count as competitors.
        std::size_t others = 0;
        bool hit = false;
        for (auto k : winners) {
            bool same = true;
            for (std::size_t i = 0; i < s.size(); ++i)
                same = same && std::abs(S.vertices[k][i] - s[i]) <= tol;
            if (same)
                hit = true;
            else
                ++others;
        }
        if (hit && (mode == Exposure::tied || others == 0)) return true;
    }
    return false;
}

Projected project(const AllocationSet& S, const std::vector<Vec>& points) {
    Projected p;
    p.nv = S.size();
    p.values.resize(points.size() * p.nv);
    for (std::size_t i = 0; i < points.size(); ++i) {
        check_dim(S, points[i]);
        for (std::size_t k = 0; k < p.nv; ++k) p.values[i * p.nv + k] = dot(S.vertices[k], points[i]);
    }
    return p;
}

}  // namespace mdual
