#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mdual/certify.hpp"
#include "mdual/config.hpp"
#include "mdual/error.hpp"

using namespace mdual;

namespace {

const double kRoot3 = 1.0 / std::sqrt(3.0);

SignedMeasure uniform2(int r) { return transform(DensitySpec::uniform({0, 0}, {1, 1}), {0, 0}, r); }

// Halfspace a.x >= b
Region half(Vec a, double b) { return {Halfspace{std::move(a), b}}; }

CertificateReport certify_preset(const std::string& name, const Menu& menu, std::vector<int> ladder) {
    const InstanceConfig cfg = preset(name);
    CertifyOptions opts;
    opts.tol = cfg.tol;
    opts.cell_tol = cfg.cell_tol;
    return certify_menu(menu, instance_factory(cfg), cfg.S, ladder, opts);
}

}  // namespace

TEST_CASE("one dimensional stochastic dominance") {
    CHECK(stochastic_dominance_1d({{1.0, 1.0}}, {{0.0, 1.0}}));
    CHECK_FALSE(stochastic_dominance_1d({{0.0, 1.0}}, {{1.0, 1.0}}));
    const std::vector<std::pair<double, double>> nu = {{0.1, 0.2}, {0.5, 0.3}, {0.7, 0.5}};
    CHECK(stochastic_dominance_1d(nu, nu));
    CHECK_THROWS_AS(stochastic_dominance_1d({{1.0, 1.0}}, {{0.0, 0.5}}), InputError);
}

TEST_CASE("matching condition for the right cell of the at-most-one menu") {
    const SignedMeasure mu = uniform2(64);
    const Menu menu = with_zero_option({{{1, 0}, kRoot3}, {{0, 1}, kRoot3}});
    MatchingCondition c;
    c.mu = &mu;
    c.cell = option_region(menu, 1);
    c.boundary = half({1, 0}, 1.0);
    c.A = [](double a) { return half({0, -1}, -a); };  // x2 <= a
    c.B = [](double a) { return half({0, -1}, -a); };
    c.a_lo = 0.0;
    c.a_hi = 1.0;
    const MatchingReport rep = check_matching_condition(c, 101);
    CHECK(rep.pass);
    for (std::size_t k = 0; k < rep.a.size(); ++k) {
        const double a = rep.a[k];
        const double expect = a <= kRoot3 ? 3 * (1 - kRoot3) * a : 1 - 1.5 * (1 - a) * (1 - a);
        CHECK(rep.minus_mass[k] == doctest::Approx(expect).epsilon(1e-9));
        CHECK(rep.plus_mass[k] == doctest::Approx(a).epsilon(1e-9));
    }

    SUBCASE("doubling the boundary mass fails") {
        c.plus_scale = 2.0;
        CHECK_FALSE(check_matching_condition(c, 101).pass);
    }
    SUBCASE("extra negative mass in the cell never breaks a pass") {
        SignedMeasure more = mu;
        more.add_atom({0.9, 0.05}, -0.1);
        more.add_atom({0.95, 0.9}, -0.2);
        c.mu = &more;
        const MatchingReport r2 = check_matching_condition(c, 101);
        CHECK(r2.pass);
        CHECK(r2.worst >= rep.worst);
    }
}

TEST_CASE("matching condition for the (1, 0) cell of the exactly-one menu") {
    const SignedMeasure mu = uniform2(64);
    const Menu menu{{{{1, 0}, 1.0 / 3}, {{0, 1}, 0.0}}};
    MatchingCondition c;
    c.mu = &mu;
    c.cell = option_region(menu, 0);
    c.boundary = {Halfspace{{1, 0}, 1.0}, Halfspace{{1, -1}, 1.0 / 3}};
    // With b = 2/3 - a: boundary points above height a against the cell part right of 1/3 + a.
    c.A = [](double b) { return half({1, 0}, 1.0 - b); };
    c.B = [](double b) { return half({0, 1}, 2.0 / 3 - b); };
    c.a_lo = 0.0;
    c.a_hi = 2.0 / 3;
    const MatchingReport rep = check_matching_condition(c, 91);
    CHECK(rep.pass);
    for (std::size_t k = 0; k < rep.a.size(); ++k) {
        const double a = 2.0 / 3 - rep.a[k];
        CHECK(rep.minus_mass[k] == doctest::Approx(2.0 / 3 - 1.5 * a * a).epsilon(1e-9));
        CHECK(rep.plus_mass[k] == doctest::Approx(2.0 / 3 - a).epsilon(1e-9));
    }

    SUBCASE("shrinking B is rejected") {
        c.B = [](double b) { return half({0, 1}, b); };
        CHECK_THROWS_AS(check_matching_condition(c, 91), StructuralError);
    }
}

TEST_CASE("certify the at-most-one and bundle menus") {
    const CertificateReport a = certify_preset("at-most-one", with_zero_option({{{1, 0}, kRoot3}, {{0, 1}, kRoot3}}), {16, 32, 64});
    CHECK(a.verdict == Verdict::certified_at_grid);
    CHECK(a.relative_gap <= 0.02);
    CHECK(a.gap_nonincreasing);
    for (const auto& e : a.ladder) {
        CHECK(e.gap >= -1e-8);
        CHECK(e.lp_residual <= 1e-9);
    }
    CHECK(a.gap == doctest::Approx(a.dual - a.primal));

    const CertificateReport b =
        certify_preset("bundle-alpha", with_zero_option({{{2, 2}, std::sqrt(8.0 / 3.0)}}), {16, 32, 64});
    CHECK(b.verdict == Verdict::certified_at_grid);
}

TEST_CASE("perturbed prices do not certify") {
    struct Case {
        std::string name;
        bool verdict_changes;
    };
    // Expo revenue is flat near the optimum: a 0.05 shift costs well under the 2% tolerance
    // and under the coarse-grid bias, so there only the sign of the gap is checked.
    for (const Case& cs : {Case{"at-most-one", true}, Case{"exactly-one", true}, Case{"bundle-alpha", true},
                           Case{"deterministic-expo", false}}) {
        CAPTURE(cs.name);
        const InstanceConfig cfg = preset(cs.name);
        const CalibrationSummary cal = calibrate_instance(cfg);
        const CertificateReport base = certify_preset(cs.name, cal.menu, {16, 32});
        for (std::size_t k = 0; k < cal.menu.options.size(); ++k) {
            if (cal.menu.options[k].pinned) continue;
            for (double d : {-0.05, 0.05}) {
                CAPTURE(k);
                CAPTURE(d);
                std::vector<double> p = cal.menu.prices();
                p[k] += d;
                const CertificateReport rep = certify_preset(cs.name, with_prices(cal.menu, p), {16, 32});
                CHECK(rep.gap > 0);
                if (cs.verdict_changes) {
                    CHECK(rep.verdict != Verdict::certified_at_grid);
                    CHECK(rep.gap > base.gap);
                }
            }
        }
    }
}

TEST_CASE("mispricing far from the optimum is refuted") {
    const CertificateReport r =
        certify_preset("bundle-alpha", with_zero_option({{{2, 2}, 1.2}}), {16, 32});
    CHECK(r.verdict == Verdict::refuted);
}

TEST_CASE("exponential item-one profiles") {
    const InstanceConfig cfg = preset("deterministic-expo");
    const ExpoProfiles pr = deterministic_expo_profiles(cfg.density, 0.929020, 1.227881);
    CHECK(pr.pos1.size() == 512);
    CHECK(pr.neg1.size() == 512);
    CHECK(pr.dominance);
    CHECK(pr.x1_star == doctest::Approx((2 - 1.227881) / (2 - 1)).epsilon(1e-9));
    CHECK(pr.factor >= 1.0);
}

TEST_CASE("ladders must ascend") {
    const InstanceConfig cfg = preset("at-most-one");
    CHECK_THROWS_AS(certify_menu(cfg.menu, instance_factory(cfg), cfg.S, {32, 16}), InputError);
    CHECK_THROWS_AS(certify_menu(cfg.menu, instance_factory(cfg), cfg.S, {}), InputError);
}
