#include "mdual/menu.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>

#include "mdual/error.hpp"

namespace mdual {

std::vector<double> Menu::prices() const {
    std::vector<double> p;
    for (const auto& o : options) p.push_back(o.price);
    return p;
}

static bool is_zero_vec(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](double c) { return c == 0.0; });
}

static bool in_set(const AllocationSet& S, const Vec& s, double tol) {
    if (!S.hull) {
        for (const auto& v : S.vertices) {
            bool same = true;
            for (std::size_t i = 0; i < s.size(); ++i) same = same && std::abs(v[i] - s[i]) <= tol;
            if (same) return true;
        }
        return false;
    }
    // Hull membership: s.d <= h_S(d) along every direction normal to a vertex pair and
    // along the coordinate axes.  Exact for n <= 2.
    const std::size_t n = s.size();
    std::vector<Vec> dirs;
    for (std::size_t k = 0; k < n; ++k) {
        Vec e(n, 0.0);
        e[k] = 1.0;
        dirs.push_back(e);
        e[k] = -1.0;
        dirs.push_back(e);
    }
    if (n == 2) {
        for (std::size_t a = 0; a < S.size(); ++a)
            for (std::size_t b = a + 1; b < S.size(); ++b) {
                Vec d = {S.vertices[b][1] - S.vertices[a][1], S.vertices[a][0] - S.vertices[b][0]};
                dirs.push_back(d);
                dirs.push_back({-d[0], -d[1]});
            }
    }
    for (const auto& d : dirs)
        if (dot(s, d) > support_value(S, d) + tol) return false;
    return true;
}

void validate(const Menu& menu, const AllocationSet& S) {
    if (menu.options.empty()) throw InputError("menu has no options");
    bool ir = false;
    for (const auto& o : menu.options) {
        if (o.allocation.size() != S.dim()) throw InputError("menu option has the wrong dimension");
        if (!std::isfinite(o.price)) throw InputError("menu price is not finite");
        for (double c : o.allocation)
            if (!std::isfinite(c)) throw InputError("menu allocation is not finite");
        if (!in_set(S, o.allocation, 1e-9)) throw InputError("menu allocation is not in S");
        bool nonneg = std::all_of(o.allocation.begin(), o.allocation.end(), [](double c) { return c >= 0; });
        if (nonneg && o.price <= 0.0) ir = true;
    }
    if (!ir) throw InputError("menu has no option guaranteeing nonnegative utility");
}

Menu with_zero_option(const std::vector<Option>& shape) {
    if (shape.empty()) throw InputError("menu shape is empty");
    Menu m;
    m.options.push_back({Vec(shape.front().allocation.size(), 0.0), 0.0, true});
    for (const auto& o : shape) m.options.push_back(o);
    return m;
}

Menu with_prices(const Menu& menu, const std::vector<double>& prices) {
    if (prices.size() != menu.options.size()) throw InputError("price vector has the wrong length");
    Menu m = menu;
    for (std::size_t k = 0; k < prices.size(); ++k) m.options[k].price = prices[k];
    return m;
}

Utility utility(const Menu& menu, const Vec& x) {
    Utility best;
    double best_sx = 0.0;
    for (std::size_t k = 0; k < menu.options.size(); ++k) {
        const double sx = dot(menu.options[k].allocation, x);
        const double v = sx - menu.options[k].price;
        if (k == 0 || v > best.value || (v == best.value && sx > best_sx)) {
            best.value = v;
            best.winner = k;
            best_sx = sx;
        }
    }
    return best;
}

Region option_region(const Menu& menu, std::size_t k) {
    Region r;
    const auto& ok = menu.options[k];
    for (std::size_t j = 0; j < menu.options.size(); ++j) {
        if (j == k) continue;
        const auto& oj = menu.options[j];
        Halfspace h;
        h.a = sub(ok.allocation, oj.allocation);
        h.b = ok.price - oj.price;
        // Identical allocations: the cheaper option dominates everywhere.
        if (is_zero_vec(h.a)) {
            if (h.b > 0 || (h.b == 0 && j < k)) {
                h.a.assign(h.a.size(), 0.0);
                h.b = 1.0;  // infeasible
            } else {
                continue;
            }
        }
        r.push_back(std::move(h));
    }
    return r;
}

CellReport cell_measures(const Menu& menu, const SignedMeasure& mu, CellAssignment mode) {
    const std::size_t K = menu.options.size();
    CellReport rep;
    rep.cells.assign(K, {});
    rep.winner.resize(mu.pieces.size());
    std::vector<Region> regions(K);
    for (std::size_t k = 0; k < K; ++k) regions[k] = option_region(menu, k);

    std::vector<double> frac(K);
    std::vector<double> straddle_abs(K, 0.0), total_abs(K, 0.0);
    for (std::size_t i = 0; i < mu.pieces.size(); ++i) {
        const Piece& p = mu.pieces[i];
        const std::size_t w = utility(menu, p.point).winner;
        rep.winner[i] = w;
        std::fill(frac.begin(), frac.end(), 0.0);

        bool split = false;
        if (mode == CellAssignment::midpoint || p.kind == PieceKind::atom) {
            frac[w] = 1.0;
        } else {
            std::vector<std::size_t> axes;
            for (std::size_t k = 0; k < mu.n; ++k)
                if (p.hi[k] > p.lo[k]) axes.push_back(k);
            bool same = true;
            Vec c(mu.n);
            for (std::size_t mask = 0; mask < (std::size_t(1) << axes.size()) && same; ++mask) {
                c = p.lo;
                for (std::size_t b = 0; b < axes.size(); ++b)
                    if (mask >> b & 1) c[axes[b]] = p.hi[axes[b]];
                same = utility(menu, c).winner == w;
            }
            if (same) {
                frac[w] = 1.0;
            } else {
                double s = 0.0;
                for (std::size_t k = 0; k < K; ++k) s += frac[k] = overlap_fraction(regions[k], p.lo, p.hi);
                if (s > 0) {
                    for (auto& v : frac) v /= s;
                } else {
                    frac[w] = 1.0;
                }
                split = true;
            }
        }
        for (std::size_t k = 0; k < K; ++k) {
            if (frac[k] == 0.0) continue;
            const double v = frac[k] * p.weight;
            CellEntry& e = rep.cells[k];
            e.measure += v;
            if (p.kind == PieceKind::atom)
                e.atom += v;
            else if (p.kind == PieceKind::interior)
                e.interior += v;
            else
                e.boundary += v;
            ++e.pieces;
            total_abs[k] += std::abs(v);
            if (split) straddle_abs[k] += std::abs(v);
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        rep.cells[k].straddle_fraction = total_abs[k] > 0 ? straddle_abs[k] / total_abs[k] : 0.0;
        rep.total += rep.cells[k].measure;
    }
    return rep;
}

double revenue_via_measure(const Menu& menu, const SignedMeasure& mu) {
    return integrate(mu, [&](const Vec& x) { return utility(menu, x).value; });
}

MonteCarloEstimate revenue_direct(const Menu& menu, const DensitySpec& f, std::uint64_t samples,
                                  std::uint64_t seed) {
    if (samples < 1) throw InputError("revenue_direct: need at least one sample");
    std::mt19937_64 rng(seed);
    double mean = 0.0, m2 = 0.0;
    for (std::uint64_t i = 1; i <= samples; ++i) {
        const Vec x = sample_type(f, rng);
        const double pay = menu.options[utility(menu, x).winner].price;
        const double d = pay - mean;
        mean += d / double(i);
        m2 += d * (pay - mean);
    }
    MonteCarloEstimate e;
    e.mean = mean;
    e.samples = samples;
    e.stderr_ = samples > 1 ? std::sqrt(m2 / double(samples - 1) / double(samples)) : 0.0;
    return e;
}

CalibrationResult calibrate_prices(const Menu& initial, const SignedMeasure& mu, const CalibrationOptions& opts) {
    std::vector<std::size_t> free;
    for (std::size_t k = 0; k < initial.options.size(); ++k) {
        const auto& o = initial.options[k];
        if (o.pinned) continue;
        if (is_zero_vec(o.allocation) && o.price == 0.0) continue;
        free.push_back(k);
    }
    CalibrationResult res;
    res.menu = initial;
    if (free.empty()) {
        res.residuals.clear();
        for (const auto& c : cell_measures(initial, mu, opts.assignment).cells) res.residuals.push_back(c.measure);
        return res;
    }
    const std::size_t m = free.size();

    auto residual = [&](const Menu& menu) {
        auto rep = cell_measures(menu, mu, opts.assignment);
        Eigen::VectorXd F(m);
        for (std::size_t i = 0; i < m; ++i) F[i] = rep.cells[free[i]].measure;
        return F;
    };
    auto shifted = [&](const Menu& menu, const Eigen::VectorXd& dp) {
        Menu out = menu;
        for (std::size_t i = 0; i < m; ++i) out.options[free[i]].price += dp[i];
        return out;
    };

    std::ostringstream trace;
    trace.precision(12);
    Menu cur = initial;
    Eigen::VectorXd F = residual(cur);
    for (int it = 0;; ++it) {
        trace << "iter " << it << " prices";
        for (auto k : free) trace << ' ' << cur.options[k].price;
        trace << " |F|=" << F.cwiseAbs().maxCoeff() << '\n';
        if (F.cwiseAbs().maxCoeff() <= opts.tol) {
            res.iterations = it;
            break;
        }
        if (it >= opts.max_iterations)
            throw ConvergenceError("calibration did not converge in " + std::to_string(opts.max_iterations) +
                                       " iterations",
                                   trace.str());

        Eigen::MatrixXd J(m, m);
        for (std::size_t j = 0; j < m; ++j) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
            e[j] = opts.fd_step;
            J.col(j) = (residual(shifted(cur, e)) - residual(shifted(cur, -e))) / (2 * opts.fd_step);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        lu.setThreshold(1e-12);
        if (lu.rank() < static_cast<Eigen::Index>(m))
            throw ConvergenceError("calibration Jacobian is singular", trace.str());
        Eigen::VectorXd step = lu.solve(-F);

        const double f0 = F.norm();
        double t = 1.0;
        bool accepted = false;
        for (int k = 0; k < 40; ++k, t *= 0.5) {
            Menu trial = shifted(cur, t * step);
            Eigen::VectorXd Ft = residual(trial);
            if (Ft.norm() < (1.0 - 1e-4 * t) * f0) {
                cur = std::move(trial);
                F = Ft;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // Newton direction stalls when |F| is at rounding level already.
            if (F.cwiseAbs().maxCoeff() <= 100 * opts.tol) {
                res.iterations = it;
                break;
            }
            throw ConvergenceError("calibration line search stalled", trace.str());
        }
    }
    res.menu = cur;
    res.trace = trace.str();
    for (const auto& c : cell_measures(cur, mu, opts.assignment).cells) res.residuals.push_back(c.measure);
    return res;
}

std::vector<double> richardson(const std::vector<double>& coarse, const std::vector<double>& fine,
                               double r_coarse, double r_fine, double order) {
    if (coarse.size() != fine.size()) throw InputError("richardson: length mismatch");
    const double denom = std::pow(r_fine / r_coarse, order) - 1.0;
    if (!(denom > 0)) throw InputError("richardson: resolutions must increase");
    std::vector<double> out(fine.size());
    for (std::size_t i = 0; i < fine.size(); ++i) out[i] = fine[i] + (fine[i] - coarse[i]) / denom;
    return out;
}

void write_cells_csv(std::ostream& os, const Menu& menu, const CellReport& rep) {
    os << "option";
    for (std::size_t k = 0; k < menu.dim(); ++k) os << ",s" << k;
    os << ",price,measure,atom,interior,boundary,pieces,straddle_fraction\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    };
    for (std::size_t k = 0; k < menu.options.size(); ++k) {
        os << k;
        for (double c : menu.options[k].allocation) os << ',' << num(c);
        const auto& e = rep.cells[k];
        os << ',' << num(menu.options[k].price) << ',' << num(e.measure) << ',' << num(e.atom) << ','
           << num(e.interior) << ',' << num(e.boundary) << ',' << e.pieces << ',' << num(e.straddle_fraction)
           << '\n';
    }
}

namespace {
const char* kPalette[] = {"#f2f2f2", "#9ecae1", "#fdae6b", "#a1d99b", "#bcbddc", "#fc9272", "#c7e9c0"};
}

void write_cells_svg(std::ostream& os, const Menu& menu, const SignedMeasure& mu, const CellReport& rep) {
    if (mu.n != 2) throw UnsupportedError("cell SVG needs a 2-D instance");
    double xmax = 0.0, ymax = 0.0;
    for (const auto& p : mu.pieces) {
        xmax = std::max(xmax, p.hi[0]);
        ymax = std::max(ymax, p.hi[1]);
    }
    const double W = 520.0, pad = 10.0, sx = 500.0 / std::max(xmax, 1e-12), sy = 500.0 / std::max(ymax, 1e-12);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << W + 20 << "\">\n";
    char buf[256];
    for (std::size_t i = 0; i < mu.pieces.size(); ++i) {
        const auto& p = mu.pieces[i];
        if (p.kind != PieceKind::interior) continue;
        std::snprintf(buf, sizeof buf, "<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" fill=\"%s\"/>\n",
                      pad + p.lo[0] * sx, pad + 500.0 - p.hi[1] * sy, (p.hi[0] - p.lo[0]) * sx,
                      (p.hi[1] - p.lo[1]) * sy, kPalette[rep.winner[i] % 7]);
        os << buf;
    }
    for (std::size_t k = 0; k < menu.options.size(); ++k) {
        std::snprintf(buf, sizeof buf,
                      "<rect x=\"%.1f\" y=\"514\" width=\"10\" height=\"10\" fill=\"%s\"/><text x=\"%.1f\" "
                      "y=\"523\" font-size=\"9\">option %zu, price %.6g</text>\n",
                      pad + 130.0 * k, kPalette[k % 7], pad + 130.0 * k + 13, k, menu.options[k].price);
        os << buf;
    }
    os << "</svg>\n";
}

}  // namespace mdual
