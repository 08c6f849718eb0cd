#include "mdual/certify.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "mdual/error.hpp"

namespace mdual {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::certified_at_grid: return "certified-at-grid";
        case Verdict::inconclusive: return "inconclusive";
        case Verdict::refuted: return "refuted";
    }
    return "?";
}

CertificateReport certify_menu(const Menu& menu, const MeasureFactory& mf, const AllocationSet& S,
                               const std::vector<int>& resolutions, const CertifyOptions& opts) {
    if (resolutions.empty()) throw InputError("certify_menu: no resolutions");
    for (std::size_t k = 1; k < resolutions.size(); ++k)
        if (resolutions[k] <= resolutions[k - 1]) throw InputError("certify_menu: resolutions must ascend");
    validate(menu, S);

    CertificateReport rep;
    rep.tol = opts.tol;
    for (int r : resolutions) {
        const auto t0 = std::chrono::steady_clock::now();
        LadderEntry e;
        e.resolution = r;
        SignedMeasure mu = mf.measure(r);
        SignedMeasure dual_mu = mf.dual_measure ? mf.dual_measure(mu) : mu;

        auto cells = cell_measures(menu, mu);
        rep.cell_residuals.clear();
        for (const auto& c : cells.cells) {
            rep.cell_residuals.push_back(c.measure);
            e.max_cell_residual = std::max(e.max_cell_residual, std::abs(c.measure));
        }

        TransportInstance inst = discretize_dual(dual_mu, S);
        TransportPlan plan = solve(inst, opts.solver);
        e.sources = inst.sources.size();
        e.sinks = inst.sinks.size();
        e.pivots = plan.pivots;
        e.plan_cost = plan.cost;
        e.lp_residual = std::abs(plan.cost - plan.dual);
        e.revenue = revenue_via_measure(menu, mu);
        e.gap = duality_gap(menu, plan, mu);
        e.relative_gap = e.revenue > 0 ? e.gap / e.revenue : e.gap;

        double wsum = 0.0, ssum = 0.0;
        for (const auto& f : plan.flows) {
            const auto& x = inst.sources[f.source];
            const auto& y = inst.sinks[f.sink];
            double s = inst.cost(f.source, f.sink) - (utility(menu, x).value - utility(menu, y).value);
            e.max_slackness = std::max(e.max_slackness, s);
            ssum += f.weight * s;
            wsum += f.weight;
        }
        e.mean_slackness = wsum > 0 ? ssum / wsum : 0.0;
        e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (e.gap < -1e-8) rep.weak_duality_ok = false;
        rep.ladder.push_back(e);
        rep.measure = std::move(mu);
        rep.cells = std::move(cells);
        rep.instance = std::move(inst);
        rep.plan = std::move(plan);
    }

    const LadderEntry& fin = rep.ladder.back();
    rep.primal = fin.revenue;
    rep.dual = fin.plan_cost;
    rep.gap = fin.gap;
    rep.relative_gap = fin.relative_gap;
    rep.max_slackness = fin.max_slackness;
    for (std::size_t k = 1; k < rep.ladder.size(); ++k)
        if (rep.ladder[k].relative_gap > rep.ladder[k - 1].relative_gap + 1e-9) rep.gap_nonincreasing = false;

    rep.extrapolated_gap = fin.relative_gap;
    if (rep.ladder.size() >= 2) {
        const LadderEntry& prev = rep.ladder[rep.ladder.size() - 2];
        const double ratio = double(fin.resolution) / double(prev.resolution);
        rep.extrapolated_gap = fin.relative_gap + (fin.relative_gap - prev.relative_gap) / (ratio - 1.0);
    }

    const bool residuals_ok = fin.max_cell_residual <= opts.cell_tol;
    if (fin.relative_gap <= opts.tol && rep.gap_nonincreasing && residuals_ok && rep.weak_duality_ok)
        rep.verdict = Verdict::certified_at_grid;
    else if (!residuals_ok || (fin.relative_gap > opts.tol && rep.extrapolated_gap > opts.tol))
        rep.verdict = Verdict::refuted;
    else
        rep.verdict = Verdict::inconclusive;
    return rep;
}

void write_report(std::ostream& os, const Menu& menu, const CertificateReport& rep) {
    char buf[512];
    os << "menu\n";
    for (std::size_t k = 0; k < menu.options.size(); ++k) {
        os << "  option " << k << "  s = (";
        for (std::size_t i = 0; i < menu.options[k].allocation.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%.6g", i ? ", " : "", menu.options[k].allocation[i]);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, ")  price = %.9f\n", menu.options[k].price);
        os << buf;
    }
    os << "ladder\n";
    std::snprintf(buf, sizeof buf, "  %6s %12s %12s %12s %10s %10s %10s %7s %7s %8s\n", "r", "revenue", "dual",
                  "gap", "rel_gap", "cell_res", "max_slack", "src", "snk", "sec");
    os << buf;
    for (const auto& e : rep.ladder) {
        std::snprintf(buf, sizeof buf, "  %6d %12.9f %12.9f %12.3e %10.3e %10.3e %10.3e %7zu %7zu %8.2f\n",
                      e.resolution, e.revenue, e.plan_cost, e.gap, e.relative_gap, e.max_cell_residual,
                      e.max_slackness, e.sources, e.sinks, e.seconds);
        os << buf;
    }
    std::snprintf(buf, sizeof buf,
                  "primal %.9f\ndual %.9f\ngap %.3e\nrelative_gap %.4e (tol %.3g)\nextrapolated_gap %.4e\n"
                  "gap_nonincreasing %s\nweak_duality %s\nverdict %s\n",
                  rep.primal, rep.dual, rep.gap, rep.relative_gap, rep.tol, rep.extrapolated_gap,
                  rep.gap_nonincreasing ? "yes" : "no", rep.weak_duality_ok ? "ok" : "violated",
                  to_string(rep.verdict));
    os << buf;
}

bool stochastic_dominance_1d(const std::vector<std::pair<double, double>>& nu_plus,
                             const std::vector<std::pair<double, double>>& nu_minus) {
    double tp = 0.0, tm = 0.0, scale = 0.0;
    for (const auto& [x, w] : nu_plus) {
        if (w < 0) throw InputError("stochastic_dominance_1d: negative weight");
        tp += w;
    }
    for (const auto& [x, w] : nu_minus) {
        if (w < 0) throw InputError("stochastic_dominance_1d: negative weight");
        tm += w;
    }
    if (std::abs(tp - tm) > 1e-10) throw InputError("stochastic_dominance_1d: totals differ");
    scale = std::max(tp, tm);

    // Merge both supports and compare cumulative distributions from the bottom.
    std::vector<std::pair<double, double>> ev;
    for (const auto& [x, w] : nu_plus) ev.emplace_back(x, w);
    for (const auto& [x, w] : nu_minus) ev.emplace_back(x, -w);
    std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    double diff = 0.0;  // F_plus - F_minus
    for (std::size_t i = 0; i < ev.size();) {
        std::size_t j = i;
        while (j < ev.size() && ev[j].first == ev[i].first) diff += ev[j++].second;
        if (diff > 1e-12 * std::max(1.0, scale)) return false;
        i = j;
    }
    return true;
}

MatchingReport check_matching_condition(const MatchingCondition& cond, int a_samples) {
    if (!cond.mu) throw InputError("check_matching_condition: no measure");
    if (a_samples < 2) throw InputError("check_matching_condition: need at least two samples");
    const SignedMeasure& mu = *cond.mu;
    MatchingReport rep;
    rep.worst = std::numeric_limits<double>::infinity();

    auto joined = [](const Region& a, const Region& b) {
        Region r = a;
        r.insert(r.end(), b.begin(), b.end());
        return r;
    };

    Region prev_b;
    for (int k = 0; k < a_samples; ++k) {
        const double a = cond.a_lo + (cond.a_hi - cond.a_lo) * k / (a_samples - 1);
        const Region Aa = joined(cond.cell, cond.A(a));
        const Region Bb = cond.B(a);
        const Region Ba = joined(cond.boundary, Bb);
        double minus = 0.0, plus = 0.0;
        for (const auto& p : mu.pieces) {
            if (p.weight < 0)
                minus += -p.weight * overlap_fraction(Aa, p.lo, p.hi);
            else if (p.weight > 0)
                plus += p.weight * overlap_fraction(Ba, p.lo, p.hi);
        }
        plus *= cond.plus_scale;

        if (k > 0) {
            // B(a) must grow with a.
            for (const auto& p : mu.pieces) {
                if (p.weight <= 0 || overlap_fraction(cond.boundary, p.lo, p.hi) == 0.0) continue;
                if (overlap_fraction(prev_b, p.lo, p.hi) > overlap_fraction(Bb, p.lo, p.hi) + 1e-12)
                    throw StructuralError("check_matching_condition: B(a) is not nested");
            }
        }
        prev_b = Bb;

        rep.a.push_back(a);
        rep.minus_mass.push_back(minus);
        rep.plus_mass.push_back(plus);
        rep.worst = std::min(rep.worst, minus - plus);
        if (minus - plus < -1e-6) rep.pass = false;
    }
    return rep;
}

namespace {

struct Factor1d {
    double lam, M, Z;
    Factor1d(double l, double m) : lam(l), M(m), Z(-std::expm1(-l * m)) {}
    double pdf(double t) const { return (t < 0 || t > M) ? 0.0 : lam * std::exp(-lam * t) / Z; }
    double e0(double a, double b) const { return (std::exp(-lam * a) - std::exp(-lam * b)) / Z; }
    double e1(double a, double b) const {
        auto F = [&](double t) { return -(t + 1.0 / lam) * std::exp(-lam * t); };
        return (F(b) - F(a)) / Z;
    }
};

}  // namespace

ExpoProfiles deterministic_expo_profiles(const DensitySpec& f, double p1, double p12, int samples) {
    if (f.kind != DensityKind::exponential_product || f.dim() != 2)
        throw UnsupportedError("deterministic_expo_profiles: two-item exponential densities only");
    if (samples < 2) throw InputError("deterministic_expo_profiles: too few samples");
    const double l1 = f.rates[0], l2 = f.rates[1], M = f.truncation();
    if (l1 == l2) throw InputError("deterministic_expo_profiles: rates must differ");
    Factor1d f1(l1, M), f2(l2, M);
    const double d = p12 - p1;
    if (!(d > 0) || !(p1 > 0)) throw InputError("deterministic_expo_profiles: need 0 < p1 < p12");

    // Net mass of the horizontal line at height x2 to the right of x1 = p1, including
    // the truncation facet x1 = M.
    auto net = [&](double x2) {
        return f2.pdf(x2) * (l1 * f1.e1(p1, M) + (l2 * x2 - 3.0) * f1.e0(p1, M) + M * f1.pdf(M));
    };
    // Negative mass on the vertical line x1 below l1 x1 + l2 x2 = 2.
    auto neg = [&](double x1) {
        double top = std::min((2.0 - l1 * x1) / l2, d);
        if (top <= 0) return 0.0;
        return -f1.pdf(x1) * ((l1 * x1 - 3.0) * f2.e0(0.0, top) + l2 * f2.e1(0.0, top));
    };

    ExpoProfiles out;
    const double dz_pos = d / samples;
    for (int k = 0; k < samples; ++k) {
        double z = (k + 0.5) * dz_pos;
        double w = std::max(0.0, net(d - z)) * dz_pos;
        out.pos1.emplace_back(z, w);
        out.pos_total += w;
    }
    const double zneg = std::max(0.0, 2.0 / l1 - p1);
    const double dz_neg = zneg / samples;
    for (int k = 0; k < samples; ++k) {
        double z = (k + 0.5) * dz_neg;
        double w = std::max(0.0, neg(p1 + z)) * dz_neg;
        out.neg1.emplace_back(z, w);
        out.neg_total += w;
    }
    if (out.neg_total > 0) {
        const double scale = out.pos_total / out.neg_total;
        auto matched = out.neg1;
        for (auto& [z, w] : matched) w *= scale;
        double t = 0.0;
        for (auto& [z, w] : matched) t += w;
        matched.back().second += out.pos_total - t;
        out.dominance = stochastic_dominance_1d(out.pos1, matched);
    }

    out.x1_star = (2.0 - l2 * p12) / (l1 - l2);
    out.x2_star = p12 - out.x1_star;
    auto g = [&](double x1, double x2) { return f1.pdf(x1) * f2.pdf(x2) * (l1 * x1 + l2 * x2 - 3.0); };
    using boost::math::quadrature::gauss_kronrod;
    out.line_mass = gauss_kronrod<double, 61>::integrate(
        [&](double t) { return std::abs(g(t, p12 - t)); }, 0.0, std::max(0.0, out.x1_star), 10, 1e-12);

    out.max_neg_density = 0.0;
    const int fine = 8 * samples;
    for (int k = 0; k <= fine; ++k) out.max_neg_density = std::max(out.max_neg_density, neg(p1 + zneg * k / fine));
    out.factor = out.max_neg_density > 0 ? out.line_mass / out.max_neg_density : 0.0;
    return out;
}

}  // namespace mdual
