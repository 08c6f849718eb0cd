#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "mdual/allocation.hpp"

namespace mdual {

enum class DensityKind { uniform_box, exponential_product, tabulated };

// Type density f on its support box X' = [lo, hi].  For exponential_product the
// support is [0, M]^n with M = truncation and f renormalized to the box.
struct DensitySpec {
    DensityKind kind = DensityKind::uniform_box;
    Vec lo, hi;                  // support box
    Vec rates;                   // exponential_product only
    std::vector<double> values;  // tabulated only, row-major cell values
    int table_resolution = 0;    // tabulated only, cells per axis

    static DensitySpec uniform(Vec lo, Vec hi);
    static DensitySpec exponential(Vec rates, double truncation);
    static DensitySpec tabulated(Vec lo, Vec hi, int resolution, std::vector<double> values);

    std::size_t dim() const { return lo.size(); }
    double truncation() const { return hi.empty() ? 0.0 : hi.front(); }
};

double density_value(const DensitySpec& f, const Vec& x);

// Draws one type from f.  Tabulated densities are not sampled.
Vec sample_type(const DensitySpec& f, std::mt19937_64& rng);

enum class PieceKind { atom, interior, facet };

// A weighted box with a representative point.  Atoms have lo == hi == point.
// Facet boxes are degenerate along their normal axis.
struct Piece {
    PieceKind kind = PieceKind::atom;
    Vec lo, hi, point;
    double weight = 0.0;
};

struct SignedMeasure {
    std::size_t n = 0;
    std::vector<Piece> pieces;

    void add_atom(const Vec& p, double w);
};

enum class Quadrature {
    exact,    // closed-form cell integrals
    midpoint  // density evaluated at the representative point
};

struct GridOptions {
    Quadrature quadrature = Quadrature::exact;
    // Facet cells use breakpoints {lo, lo + h/2, lo + 3h/2, ..., hi - h/2, hi} and
    // sit on the lattice nodes lo + j h.  Off: r plain cells with midpoints.
    bool staggered_facets = true;
};

// Transformed measure of f with point mass at z0, on an r^n grid over the support.
SignedMeasure transform(const DensitySpec& f, const Vec& z0, int resolution,
                        const GridOptions& opts = {});

// Nonnegative measure of a tabulated density (one piece per table cell).
SignedMeasure density_measure(const DensitySpec& f);

double integrate(const SignedMeasure& mu, const std::function<double(const Vec&)>& h);
double total_mass(const SignedMeasure& mu);

struct JordanParts {
    SignedMeasure positive, negative;  // both carry nonnegative weights; mu = positive - negative
};
JordanParts jordan_parts(const SignedMeasure& mu);

SignedMeasure restrict(const SignedMeasure& mu, const std::function<bool(const Vec&)>& region);
SignedMeasure restrict(const SignedMeasure& mu, const Vec& box_lo, const Vec& box_hi);

struct WeightedPoint {
    Vec point;
    double weight = 0.0;
};

// Mass taken from the sources (signed, same sign as the mass present there) and
// placed at the destinations.  Each move conserves weight.
struct Move {
    std::vector<WeightedPoint> sources;
    std::vector<WeightedPoint> destinations;
};

struct SpreadSpec {
    std::vector<Move> moves;
    bool mean_preserving = false;
};

SignedMeasure apply_spread(const SignedMeasure& mu, const SpreadSpec& spec);

struct DominanceReport {
    std::vector<double> differences;  // int u dmu' - int u dmu, one per menu
    double worst = 0.0;
    bool pass = true;
};

// Falsifier for mu' >= mu on the given utility functions.
DominanceReport dominance_check(const SignedMeasure& mu_prime, const SignedMeasure& mu,
                                const std::vector<std::function<double(const Vec&)>>& utilities);

void write_csv(std::ostream& os, const SignedMeasure& mu);

const char* to_string(PieceKind k);

}  // namespace mdual
