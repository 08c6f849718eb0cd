#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "mdual/allocation.hpp"
#include "mdual/error.hpp"

using namespace mdual;

namespace {

AllocationSet simplex() { return AllocationSet({{0, 0}, {1, 0}, {0, 1}}, true); }
AllocationSet deterministic() { return AllocationSet({{0, 0}, {1, 0}, {0, 1}, {1, 1}}, false); }

std::vector<Vec> grid_directions(int k) {
    std::vector<Vec> out;
    for (int i = 0; i <= k; ++i)
        for (int j = 0; j <= k; ++j) out.push_back({-1.0 + 2.0 * i / k, -1.0 + 2.0 * j / k});
    return out;
}

}  // namespace

TEST_CASE("support value examples") {
    CHECK(support_value(simplex(), {0.5, -0.2}) == doctest::Approx(0.5));
    CHECK(support_value(simplex(), {0.0, 0.0}) == 0.0);
    CHECK(support_value(deterministic(), {0.3, 0.4}) == doctest::Approx(0.7));
    CHECK(ell(simplex(), {0.9, 0.1}, {0.4, 0.3}) == doctest::Approx(0.5));
}

TEST_CASE("dimension mismatch and empty sets are input errors") {
    CHECK_THROWS_AS(support_value(simplex(), {1.0}), InputError);
    CHECK_THROWS_AS(argmax_vertices(simplex(), {1.0, 2.0, 3.0}), InputError);
    CHECK_THROWS_AS(AllocationSet({}, true), InputError);
    CHECK_THROWS_AS(AllocationSet({{0, 0}, {1}}, true), InputError);
}

TEST_CASE("argmax vertices") {
    CHECK(argmax_vertices(simplex(), {1, 1}) == std::vector<std::size_t>{1, 2});
    CHECK(argmax_vertices(simplex(), {1, 0}) == std::vector<std::size_t>{1});
    CHECK(argmax_vertices(deterministic(), {1, 1}) == std::vector<std::size_t>{3});
}

TEST_CASE("exposure") {
    const auto dirs = grid_directions(20);
    CHECK(is_exposed(simplex(), {1, 0}, dirs));
    CHECK(is_exposed(simplex(), {0, 0}, {{-1, -1}}));

    AllocationSet segment({{0, 0}, {2, 0}, {1, 0}}, true);
    CHECK_FALSE(is_exposed(segment, {1, 0}, dirs));
    CHECK(is_exposed(segment, {1, 0}, dirs, 1e-9, Exposure::tied));

    CHECK_THROWS_AS(is_exposed(simplex(), {0.5, 0.5}, dirs), InputError);
}

TEST_CASE("projected cost matches l_S") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    const AllocationSet S({{0, 0}, {1, 0}, {0, 1}, {1.3, 1.3}}, true);
    std::vector<Vec> xs, ys;
    for (int i = 0; i < 50; ++i) {
        xs.push_back({u(rng), u(rng)});
        ys.push_back({u(rng), u(rng)});
    }
    const Projected px = project(S, xs), py = project(S, ys);
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < ys.size(); ++j)
            CHECK(ell_projected(px.row(i), py.row(j), px.nv) == doctest::Approx(ell(S, xs[i], ys[j])).epsilon(1e-14));
}

TEST_CASE("triangle inequality, homogeneity and hull invariance on random sets") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> lam(0.0, 5.0);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 1 + trial % 3;
        std::vector<Vec> verts(2 + trial % 4, Vec(n));
        for (auto& v : verts)
            for (auto& c : v) c = u(rng);
        const AllocationSet hull(verts, true), finite(verts, false);
        Vec x(n), y(n), z(n);
        for (std::size_t k = 0; k < n; ++k) {
            x[k] = u(rng);
            y[k] = u(rng);
            z[k] = u(rng);
        }
        CHECK(ell(hull, x, y) + ell(hull, y, z) >= ell(hull, x, z) - 1e-12);
        const double l = lam(rng);
        Vec d = sub(x, y), ld = d;
        for (auto& c : ld) c *= l;
        CHECK(std::abs(support_value(hull, ld) - l * support_value(hull, d)) <= 1e-12);
        CHECK(support_value(hull, d) == support_value(finite, d));
    }
}
