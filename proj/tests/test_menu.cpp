#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "mdual/config.hpp"
#include "mdual/error.hpp"
#include "mdual/menu.hpp"

using namespace mdual;

namespace {

const double kRoot3 = 1.0 / std::sqrt(3.0);

Menu at_most_one(double p) { return with_zero_option({{{1, 0}, p}, {{0, 1}, p}}); }

SignedMeasure uniform2(int r) { return transform(DensitySpec::uniform({0, 0}, {1, 1}), {0, 0}, r); }

Menu random_menu(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Option> opts;
    const int k = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < k; ++i) {
        double a = u(rng), b = u(rng) * (1 - a);
        opts.push_back({{a, b}, 1.5 * u(rng)});
    }
    return with_zero_option(opts);
}

}  // namespace

TEST_CASE("utility examples") {
    const Utility a = utility(at_most_one(kRoot3), {0.9, 0.2});
    CHECK(a.value == doctest::Approx(0.9 - kRoot3));
    CHECK(a.winner == 1);
    const Utility z = utility(at_most_one(kRoot3), {0, 0});
    CHECK(z.value == 0.0);
    CHECK(z.winner == 0);

    const Menu exactly = with_zero_option({{{1, 0}, 1.0 / 3}, {{0, 1}, 0.0}});
    const Utility e = utility(exactly, {0.5, 0.1});
    CHECK(e.value == doctest::Approx(1.0 / 6));
    CHECK(e.winner == 1);
}

TEST_CASE("ties go to the larger s.x, then the lower index") {
    // At x = (0.5, 0.5) with price 0.5 both items give utility 0 and tie with the zero
    // option; the items have larger s.x, and (1, 0) has the lower index.
    CHECK(utility(at_most_one(0.5), {0.5, 0.5}).winner == 1);
}

TEST_CASE("menu validation") {
    const AllocationSet S({{0, 0}, {1, 0}, {0, 1}}, true);
    CHECK_NOTHROW(validate(at_most_one(0.5), S));
    CHECK_NOTHROW(validate(with_zero_option({{{0.5, 0.5}, 0.7}}), S));
    CHECK_THROWS_AS(validate(with_zero_option({{{1, 1}, 1.0}}), S), InputError);
    const AllocationSet D({{0, 0}, {1, 0}, {0, 1}, {1, 1}}, false);
    CHECK_THROWS_AS(validate(with_zero_option({{{1, 0.5}, 1.0}}), D), InputError);
}

TEST_CASE("u is convex, winners are subgradients and u is l_S-Lipschitz") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const AllocationSet S({{0, 0}, {1, 0}, {0, 1}}, true);
    for (int t = 0; t < 2000; ++t) {
        const Menu m = random_menu(rng);
        const Vec x{u(rng), u(rng)}, y{u(rng), u(rng)};
        const double l = u(rng);
        const Vec z{l * x[0] + (1 - l) * y[0], l * x[1] + (1 - l) * y[1]};
        const Utility ux = utility(m, x), uy = utility(m, y);
        CHECK(utility(m, z).value <= l * ux.value + (1 - l) * uy.value + 1e-12);
        CHECK(uy.value >= ux.value + dot(m.options[ux.winner].allocation, sub(y, x)) - 1e-12);
        CHECK(ux.value - uy.value <= ell(S, x, y) + 1e-12);
        CHECK(ux.value >= 0.0);
    }
}

TEST_CASE("cell measures") {
    SUBCASE("at-most-one at 1/sqrt(3) integrates to zero in every cell") {
        const CellReport rep = cell_measures(at_most_one(kRoot3), uniform2(128));
        REQUIRE(rep.cells.size() == 3);
        for (const auto& c : rep.cells) CHECK(std::abs(c.measure) <= 2e-2);
    }
    SUBCASE("exactly-one: boundary mass 2/3 in the (1, 0) cell") {
        const Menu m{{{{1, 0}, 1.0 / 3}, {{0, 1}, 0.0}}};
        const CellReport rep = cell_measures(m, uniform2(128));
        CHECK(rep.cells[0].interior == doctest::Approx(-2.0 / 3).epsilon(2e-2));
        CHECK(rep.cells[0].boundary == doctest::Approx(2.0 / 3).epsilon(2e-2));
    }
    SUBCASE("zero menu") {
        const SignedMeasure mu = uniform2(32);
        const CellReport rep = cell_measures(Menu{{Option{{0, 0}, 0.0, true}}}, mu);
        REQUIRE(rep.cells.size() == 1);
        CHECK(rep.cells[0].measure == doctest::Approx(total_mass(mu)));
    }
    SUBCASE("cells partition the measure") {
        std::mt19937_64 rng(8);
        const SignedMeasure mu = transform(DensitySpec::exponential({2, 1}, 8), {0, 0}, 32);
        for (int t = 0; t < 50; ++t) {
            const Menu m = random_menu(rng);
            for (CellAssignment a : {CellAssignment::fractional, CellAssignment::midpoint}) {
                const CellReport rep = cell_measures(m, mu, a);
                double s = 0;
                for (const auto& c : rep.cells) s += c.measure;
                CHECK(std::abs(s - total_mass(mu)) <= 1e-8);
            }
        }
    }
}

TEST_CASE("revenue through the measure") {
    CHECK(revenue_via_measure(at_most_one(kRoot3), uniform2(128)) ==
          doctest::Approx(2.0 / (3.0 * std::sqrt(3.0))).epsilon(1e-3));
    CHECK(std::abs(revenue_via_measure(Menu{{Option{{0, 0}, 0.0, true}}}, uniform2(16))) < 1e-15);
    const SignedMeasure single = transform(DensitySpec::uniform({0}, {1}), {0}, 256);
    CHECK(revenue_via_measure(with_zero_option({{{1}, 0.5}}), single) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("monte carlo revenue") {
    const DensitySpec f = DensitySpec::uniform({0, 0}, {1, 1});
    const MonteCarloEstimate zero = revenue_direct(Menu{{Option{{0, 0}, 0.0, true}}}, f, 1000, 1);
    CHECK(zero.mean == 0.0);
    CHECK(zero.stderr_ == 0.0);

    const MonteCarloEstimate a = revenue_direct(at_most_one(kRoot3), f, 1000000, 42);
    CHECK(std::abs(a.mean - 2.0 / (3.0 * std::sqrt(3.0))) <= 3 * a.stderr_);
    const MonteCarloEstimate b = revenue_direct(at_most_one(kRoot3), f, 1000000, 42);
    CHECK(a.mean == b.mean);

    const Menu bundle = with_zero_option({{{2, 2}, std::sqrt(8.0 / 3.0)}});
    const MonteCarloEstimate c = revenue_direct(bundle, f, 1000000, 7);
    CHECK(std::abs(c.mean - revenue_via_measure(bundle, uniform2(128))) <= 4 * c.stderr_);

    CHECK_THROWS(revenue_direct(at_most_one(0.5), f, 0, 1));
}

TEST_CASE("calibration") {
    SUBCASE("at-most-one") {
        const CalibrationResult r = calibrate_prices(at_most_one(0.4), uniform2(64));
        CHECK(r.menu.options[1].price == doctest::Approx(kRoot3).epsilon(1e-4));
        CHECK(r.menu.options[2].price == doctest::Approx(kRoot3).epsilon(1e-4));
        CHECK(r.menu.options[0].price == 0.0);
        for (double res : r.residuals) CHECK(std::abs(res) <= 1e-9);
    }
    SUBCASE("exactly-one with the free option pinned") {
        Menu m{{{{1, 0}, 0.3}, {{0, 1}, 0.0, true}}};
        const CalibrationResult r = calibrate_prices(m, uniform2(64));
        CHECK(r.menu.options[0].price == doctest::Approx(1.0 / 3).epsilon(1e-4));
        CHECK(r.menu.options[1].price == 0.0);
    }
    SUBCASE("duplicate options: one copy takes the whole cell") {
        const CalibrationResult r = calibrate_prices(with_zero_option({{{1, 0}, 0.3}, {{1, 0}, 0.3}}), uniform2(32));
        for (double res : r.residuals) CHECK(std::abs(res) <= 1e-9);
        CHECK(std::min(r.menu.options[1].price, r.menu.options[2].price) == doctest::Approx(0.5).epsilon(1e-3));
    }
    SUBCASE("iteration budget exhausted") {
        CalibrationOptions opts;
        opts.max_iterations = 0;
        try {
            calibrate_prices(at_most_one(0.05), uniform2(32), opts);
            FAIL("expected a convergence error");
        } catch (const ConvergenceError& e) {
            CHECK_FALSE(e.trace.empty());
        }
    }
    SUBCASE("first-order stationarity of revenue") {
        const SignedMeasure mu = uniform2(128);
        const CalibrationResult r = calibrate_prices(at_most_one(0.5), mu);
        const double base = revenue_via_measure(r.menu, mu);
        const double d = 1e-3;
        for (std::size_t k : {1u, 2u})
            for (double s : {-d, d}) {
                std::vector<double> p = r.menu.prices();
                p[k] += s;
                CHECK(revenue_via_measure(with_prices(r.menu, p), mu) - base <= 10 * d * d);
            }
    }
}

TEST_CASE("richardson extrapolation removes the leading error term") {
    // p(h) = 1 + 3 h^2 sampled at h = 1/64 and 1/128.
    auto p = [](double r) { return 1.0 + 3.0 / (r * r); };
    const auto e = richardson({p(64)}, {p(128)}, 64, 128, 2.0);
    CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-14));
    const auto lin = richardson({1.0 + 2.0 / 64}, {1.0 + 2.0 / 128}, 64, 128, 1.0);
    CHECK(lin[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("cells csv lists each option") {
    const Menu m = at_most_one(kRoot3);
    std::ostringstream os;
    write_cells_csv(os, m, cell_measures(m, uniform2(16)));
    const std::string s = os.str();
    CHECK(std::count(s.begin(), s.end(), '\n') == 4);
}
