#include "mdual/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "mdual/error.hpp"

namespace mdual {

DensitySpec DensitySpec::uniform(Vec lo, Vec hi) {
    if (lo.empty() || lo.size() != hi.size()) throw InputError("uniform box: bad bounds");
    for (std::size_t k = 0; k < lo.size(); ++k)
        if (!(hi[k] > lo[k])) throw InputError("uniform box: empty side");
    DensitySpec f;
    f.kind = DensityKind::uniform_box;
    f.lo = std::move(lo);
    f.hi = std::move(hi);
    return f;
}

DensitySpec DensitySpec::exponential(Vec rates, double truncation) {
    if (rates.empty()) throw InputError("exponential: no rates");
    for (double l : rates)
        if (!(l > 0)) throw InputError("exponential: rates must be positive");
    if (!(truncation > 0)) throw InputError("exponential: truncation must be positive");
    DensitySpec f;
    f.kind = DensityKind::exponential_product;
    f.lo.assign(rates.size(), 0.0);
    f.hi.assign(rates.size(), truncation);
    f.rates = std::move(rates);
    return f;
}

DensitySpec DensitySpec::tabulated(Vec lo, Vec hi, int resolution, std::vector<double> values) {
    if (lo.empty() || lo.size() != hi.size()) throw InputError("tabulated: bad bounds");
    if (resolution < 1) throw InputError("tabulated: resolution must be positive");
    std::size_t cells = 1;
    for (std::size_t k = 0; k < lo.size(); ++k) cells *= static_cast<std::size_t>(resolution);
    if (values.size() != cells) throw InputError("tabulated: value count does not match grid");
    for (double v : values)
        if (!(v >= 0)) throw InputError("tabulated: density must be nonnegative");
    DensitySpec f;
    f.kind = DensityKind::tabulated;
    f.lo = std::move(lo);
    f.hi = std::move(hi);
    f.table_resolution = resolution;
    f.values = std::move(values);
    return f;
}

namespace {

// Truncated, renormalized one-dimensional exponential factor.
struct ExpFactor {
    double lam, M, Z;

    explicit ExpFactor(double lam_, double M_) : lam(lam_), M(M_), Z(-std::expm1(-lam_ * M_)) {}

    double pdf(double t) const { return lam * std::exp(-lam * t) / Z; }
    double cdf(double t) const { return -std::expm1(-lam * t) / Z; }
    // int_a^b pdf
    double e0(double a, double b) const { return (std::exp(-lam * a) - std::exp(-lam * b)) / Z; }
    // int_a^b t pdf(t) dt
    double e1(double a, double b) const {
        auto F = [&](double t) { return -(t + 1.0 / lam) * std::exp(-lam * t); };
        return (F(b) - F(a)) / Z;
    }
};

bool inside_box(const DensitySpec& f, const Vec& x) {
    for (std::size_t k = 0; k < f.dim(); ++k)
        if (x[k] < f.lo[k] || x[k] > f.hi[k]) return false;
    return true;
}

double box_volume(const Vec& lo, const Vec& hi) {
    double v = 1.0;
    for (std::size_t k = 0; k < lo.size(); ++k) v *= hi[k] - lo[k];
    return v;
}

// -(grad f . z + (n+1) f) at z
double interior_density(const DensitySpec& f, const Vec& z) {
    const std::size_t n = f.dim();
    if (!inside_box(f, z)) return 0.0;
    switch (f.kind) {
        case DensityKind::uniform_box:
            return -(double(n) + 1.0) / box_volume(f.lo, f.hi);
        case DensityKind::exponential_product: {
            double fx = density_value(f, z);
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += f.rates[k] * z[k];
            return fx * (s - (double(n) + 1.0));
        }
        default:
            throw UnsupportedError("transform: tabulated densities carry no gradient data");
    }
}

// Exact integral of the interior density over a box.
double interior_integral(const DensitySpec& f, const Vec& lo, const Vec& hi) {
    const std::size_t n = f.dim();
    if (f.kind == DensityKind::uniform_box)
        return -(double(n) + 1.0) * box_volume(lo, hi) / box_volume(f.lo, f.hi);
    std::vector<double> E0(n), E1(n);
    for (std::size_t k = 0; k < n; ++k) {
        ExpFactor e(f.rates[k], f.hi[k]);
        E0[k] = e.e0(lo[k], hi[k]);
        E1[k] = e.e1(lo[k], hi[k]);
    }
    double all = 1.0;
    for (double v : E0) all *= v;
    double s = -(double(n) + 1.0) * all;
    for (std::size_t k = 0; k < n; ++k) {
        double term = f.rates[k] * E1[k];
        for (std::size_t j = 0; j < n; ++j)
            if (j != k) term *= E0[j];
        s += term;
    }
    return s;
}

// Exact integral of f over a facet box (degenerate along its normal axis).
double facet_density_integral(const DensitySpec& f, const Vec& lo, const Vec& hi, std::size_t axis) {
    const std::size_t n = f.dim();
    if (f.kind == DensityKind::uniform_box) {
        double area = 1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != axis) area *= hi[j] - lo[j];
        return area / box_volume(f.lo, f.hi);
    }
    double s = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        ExpFactor e(f.rates[j], f.hi[j]);
        s *= (j == axis) ? e.pdf(lo[j]) : e.e0(lo[j], hi[j]);
    }
    return s;
}

std::vector<double> breakpoints(double lo, double hi, int r, bool staggered) {
    const double h = (hi - lo) / r;
    std::vector<double> b;
    if (staggered) {
        b.push_back(lo);
        for (int j = 0; j < r; ++j) b.push_back(lo + (j + 0.5) * h);
        b.push_back(hi);
    } else {
        for (int j = 0; j <= r; ++j) b.push_back(lo + j * h);
        b.back() = hi;
    }
    return b;
}

std::vector<double> facet_points(double lo, double hi, int r, bool staggered) {
    const double h = (hi - lo) / r;
    std::vector<double> p;
    if (staggered) {
        for (int j = 0; j <= r; ++j) p.push_back(lo + j * h);
        p.back() = hi;
    } else {
        for (int j = 0; j < r; ++j) p.push_back(lo + (j + 0.5) * h);
    }
    return p;
}

}  // namespace

double density_value(const DensitySpec& f, const Vec& x) {
    if (x.size() != f.dim()) throw InputError("density_value: dimension mismatch");
    if (!inside_box(f, x)) return 0.0;
    switch (f.kind) {
        case DensityKind::uniform_box:
            return 1.0 / box_volume(f.lo, f.hi);
        case DensityKind::exponential_product: {
            double v = 1.0;
            for (std::size_t k = 0; k < f.dim(); ++k) v *= ExpFactor(f.rates[k], f.hi[k]).pdf(x[k]);
            return v;
        }
        case DensityKind::tabulated: {
            std::size_t idx = 0;
            for (std::size_t k = 0; k < f.dim(); ++k) {
                double t = (x[k] - f.lo[k]) / (f.hi[k] - f.lo[k]) * f.table_resolution;
                int i = std::clamp(static_cast<int>(t), 0, f.table_resolution - 1);
                idx = idx * f.table_resolution + i;
            }
            return f.values[idx];
        }
    }
    return 0.0;
}

Vec sample_type(const DensitySpec& f, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Vec x(f.dim());
    switch (f.kind) {
        case DensityKind::uniform_box:
            for (std::size_t k = 0; k < f.dim(); ++k) x[k] = f.lo[k] + U(rng) * (f.hi[k] - f.lo[k]);
            return x;
        case DensityKind::exponential_product:
            for (std::size_t k = 0; k < f.dim(); ++k) {
                ExpFactor e(f.rates[k], f.hi[k]);
                x[k] = -std::log1p(-U(rng) * e.Z) / e.lam;
            }
            return x;
        default:
            throw UnsupportedError("sampling is not available for tabulated densities");
    }
}

void SignedMeasure::add_atom(const Vec& p, double w) {
    Piece a;
    a.kind = PieceKind::atom;
    a.lo = a.hi = a.point = p;
    a.weight = w;
    pieces.push_back(std::move(a));
}

SignedMeasure transform(const DensitySpec& f, const Vec& z0, int resolution, const GridOptions& opts) {
    const std::size_t n = f.dim();
    if (f.kind == DensityKind::tabulated)
        throw UnsupportedError("transform: tabulated densities carry no gradient data");
    if (resolution < 1) throw InputError("transform: resolution must be positive");
    if (z0.size() != n) throw InputError("transform: z0 has the wrong dimension");
    for (std::size_t k = 0; k < n; ++k)
        if (z0[k] > f.lo[k]) throw InputError("transform: z0 is not dominated by the support");

    SignedMeasure mu;
    mu.n = n;
    mu.add_atom(z0, 1.0);

    const int r = resolution;
    std::vector<double> h(n);
    for (std::size_t k = 0; k < n; ++k) h[k] = (f.hi[k] - f.lo[k]) / r;

    std::size_t cells = 1;
    for (std::size_t k = 0; k < n; ++k) cells *= static_cast<std::size_t>(r);
    for (std::size_t c = 0; c < cells; ++c) {
        Piece p;
        p.kind = PieceKind::interior;
        p.lo.resize(n);
        p.hi.resize(n);
        p.point.resize(n);
        std::size_t rem = c;
        for (std::size_t k = n; k-- > 0;) {
            int i = static_cast<int>(rem % r);
            rem /= r;
            p.lo[k] = f.lo[k] + i * h[k];
            p.hi[k] = (i == r - 1) ? f.hi[k] : f.lo[k] + (i + 1) * h[k];
            p.point[k] = f.lo[k] + (i + 0.5) * h[k];
        }
        p.weight = opts.quadrature == Quadrature::exact ? interior_integral(f, p.lo, p.hi)
                                                        : interior_density(f, p.point) * box_volume(p.lo, p.hi);
        mu.pieces.push_back(std::move(p));
    }

    // Boundary terms f (z . n) on each facet with nonzero normal component.
    for (std::size_t axis = 0; axis < n; ++axis) {
        for (int side = 0; side < 2; ++side) {
            const double plane = side ? f.hi[axis] : f.lo[axis];
            const double zn = side ? plane : -plane;
            if (zn == 0.0) continue;

            std::vector<std::vector<double>> br(n), pts(n);
            std::size_t count = 1;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == axis) continue;
                br[j] = breakpoints(f.lo[j], f.hi[j], r, opts.staggered_facets);
                pts[j] = facet_points(f.lo[j], f.hi[j], r, opts.staggered_facets);
                count *= pts[j].size();
            }
            for (std::size_t c = 0; c < count; ++c) {
                Piece p;
                p.kind = PieceKind::facet;
                p.lo.resize(n);
                p.hi.resize(n);
                p.point.resize(n);
                std::size_t rem = c;
                for (std::size_t j = n; j-- > 0;) {
                    if (j == axis) {
                        p.lo[j] = p.hi[j] = p.point[j] = plane;
                        continue;
                    }
                    std::size_t i = rem % pts[j].size();
                    rem /= pts[j].size();
                    p.lo[j] = br[j][i];
                    p.hi[j] = br[j][i + 1];
                    p.point[j] = pts[j][i];
                }
                double area = 1.0;
                for (std::size_t j = 0; j < n; ++j)
                    if (j != axis) area *= p.hi[j] - p.lo[j];
                double fint = opts.quadrature == Quadrature::exact ? facet_density_integral(f, p.lo, p.hi, axis)
                                                                   : density_value(f, p.point) * area;
                p.weight = fint * zn;
                mu.pieces.push_back(std::move(p));
            }
        }
    }
    return mu;
}

SignedMeasure density_measure(const DensitySpec& f) {
    if (f.kind != DensityKind::tabulated) throw UnsupportedError("density_measure: tabulated densities only");
    const std::size_t n = f.dim();
    const int r = f.table_resolution;
    SignedMeasure mu;
    mu.n = n;
    for (std::size_t c = 0; c < f.values.size(); ++c) {
        Piece p;
        p.kind = PieceKind::interior;
        p.lo.resize(n);
        p.hi.resize(n);
        p.point.resize(n);
        std::size_t rem = c;
        for (std::size_t k = n; k-- > 0;) {
            int i = static_cast<int>(rem % r);
            rem /= r;
            double h = (f.hi[k] - f.lo[k]) / r;
            p.lo[k] = f.lo[k] + i * h;
            p.hi[k] = f.lo[k] + (i + 1) * h;
            p.point[k] = f.lo[k] + (i + 0.5) * h;
        }
        p.weight = f.values[c] * box_volume(p.lo, p.hi);
        mu.pieces.push_back(std::move(p));
    }
    return mu;
}

double integrate(const SignedMeasure& mu, const std::function<double(const Vec&)>& h) {
    // Neumaier summation keeps results independent of piece magnitudes.
    double s = 0.0, comp = 0.0;
    for (const auto& p : mu.pieces) {
        double v = p.weight * h(p.point);
        double t = s + v;
        comp += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
        s = t;
    }
    return s + comp;
}

double total_mass(const SignedMeasure& mu) {
    return integrate(mu, [](const Vec&) { return 1.0; });
}

JordanParts jordan_parts(const SignedMeasure& mu) {
    JordanParts j;
    j.positive.n = j.negative.n = mu.n;
    for (const auto& p : mu.pieces) {
        if (p.weight > 0) {
            j.positive.pieces.push_back(p);
        } else if (p.weight < 0) {
            Piece q = p;
            q.weight = -p.weight;
            j.negative.pieces.push_back(std::move(q));
        }
    }
    return j;
}

SignedMeasure restrict(const SignedMeasure& mu, const std::function<bool(const Vec&)>& region) {
    SignedMeasure out;
    out.n = mu.n;
    for (const auto& p : mu.pieces)
        if (region(p.point)) out.pieces.push_back(p);
    return out;
}

SignedMeasure restrict(const SignedMeasure& mu, const Vec& box_lo, const Vec& box_hi) {
    return restrict(mu, [&](const Vec& x) {
        for (std::size_t k = 0; k < x.size(); ++k)
            if (x[k] < box_lo[k] || x[k] > box_hi[k]) return false;
        return true;
    });
}

namespace {

using Key = std::vector<long long>;

Key point_key(const Vec& x) {
    Key k(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) k[i] = std::llround(x[i] * 1e9);
    return k;
}

}  // namespace

SignedMeasure apply_spread(const SignedMeasure& mu, const SpreadSpec& spec) {
    SignedMeasure out = mu;
    std::map<Key, std::vector<std::size_t>> at;
    for (std::size_t i = 0; i < out.pieces.size(); ++i) at[point_key(out.pieces[i].point)].push_back(i);

    for (const auto& mv : spec.moves) {
        double out_w = 0.0, in_w = 0.0;
        Vec out_m(mu.n, 0.0), in_m(mu.n, 0.0);
        for (const auto& s : mv.sources) {
            out_w += s.weight;
            for (std::size_t k = 0; k < mu.n; ++k) out_m[k] += s.weight * s.point[k];
        }
        for (const auto& d : mv.destinations) {
            in_w += d.weight;
            for (std::size_t k = 0; k < mu.n; ++k) in_m[k] += d.weight * d.point[k];
        }
        if (std::abs(out_w - in_w) > 1e-12 * std::max(1.0, std::abs(out_w)))
            throw InputError("apply_spread: move does not conserve weight");
        if (spec.mean_preserving)
            for (std::size_t k = 0; k < mu.n; ++k)
                if (std::abs(out_m[k] - in_m[k]) > 1e-10)
                    throw InputError("apply_spread: move is not mean preserving");

        for (const auto& s : mv.sources) {
            auto it = at.find(point_key(s.point));
            double avail = 0.0;
            if (it != at.end())
                for (auto i : it->second)
                    if ((out.pieces[i].weight > 0) == (s.weight > 0)) avail += out.pieces[i].weight;
            if (s.weight == 0.0) continue;
            if (it == at.end() || std::abs(avail) < std::abs(s.weight) * (1 - 1e-12))
                throw InputError("apply_spread: insufficient mass at source point");
            const double frac = s.weight / avail;
            for (auto i : it->second)
                if ((out.pieces[i].weight > 0) == (s.weight > 0)) out.pieces[i].weight -= frac * out.pieces[i].weight;
        }
        for (const auto& d : mv.destinations) {
            out.add_atom(d.point, d.weight);
            at[point_key(d.point)].push_back(out.pieces.size() - 1);
        }
    }
    return out;
}

DominanceReport dominance_check(const SignedMeasure& mu_prime, const SignedMeasure& mu,
                                const std::vector<std::function<double(const Vec&)>>& utilities) {
    DominanceReport rep;
    for (const auto& u : utilities) {
        double d = integrate(mu_prime, u) - integrate(mu, u);
        rep.differences.push_back(d);
        rep.worst = rep.differences.size() == 1 ? d : std::min(rep.worst, d);
        if (d < -1e-8) rep.pass = false;
    }
    return rep;
}

const char* to_string(PieceKind k) {
    switch (k) {
        case PieceKind::atom: return "atom";
        case PieceKind::interior: return "interior";
        case PieceKind::facet: return "facet";
    }
    return "?";
}

void write_csv(std::ostream& os, const SignedMeasure& mu) {
    os << "kind";
    for (std::size_t k = 0; k < mu.n; ++k) os << ",x" << k;
    for (std::size_t k = 0; k < mu.n; ++k) os << ",lo" << k;
    for (std::size_t k = 0; k < mu.n; ++k) os << ",hi" << k;
    os << ",weight\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    };
    for (const auto& p : mu.pieces) {
        os << to_string(p.kind);
        for (double v : p.point) os << ',' << num(v);
        for (double v : p.lo) os << ',' << num(v);
        for (double v : p.hi) os << ',' << num(v);
        os << ',' << num(p.weight) << '\n';
    }
}

}  // namespace mdual
