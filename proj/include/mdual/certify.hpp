#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mdual/allocation.hpp"
#include "mdual/geometry.hpp"
#include "mdual/measure.hpp"
#include "mdual/menu.hpp"
#include "mdual/transport.hpp"

namespace mdual {

enum class Verdict { certified_at_grid, inconclusive, refuted };

const char* to_string(Verdict v);

struct LadderEntry {
    int resolution = 0;
    double revenue = 0.0;    // revenue_via_measure on the grid
    double plan_cost = 0.0;  // optimal transport value (dual objective)
    double gap = 0.0;
    double relative_gap = 0.0;
    double max_cell_residual = 0.0;
    double max_slackness = 0.0;   // max over flow arcs of l_S - (u_menu(x) - u_menu(y))
    double mean_slackness = 0.0;  // flow-weighted
    double lp_residual = 0.0;     // |plan cost - dual objective|
    std::size_t sources = 0, sinks = 0, pivots = 0;
    double seconds = 0.0;
};

struct CertificateReport {
    double primal = 0.0;  // revenue at the finest resolution
    double dual = 0.0;    // transport value at the finest resolution
    double gap = 0.0;
    double relative_gap = 0.0;
    double extrapolated_gap = 0.0;  // first-order extrapolation of the relative gap
    double max_slackness = 0.0;
    std::vector<double> cell_residuals;
    bool gap_nonincreasing = true;
    bool weak_duality_ok = true;
    Verdict verdict = Verdict::inconclusive;
    double tol = 0.0;
    std::vector<LadderEntry> ladder;
    // Artifacts of the finest resolution.
    SignedMeasure measure;
    CellReport cells;
    TransportInstance instance;
    TransportPlan plan;
};

struct CertifyOptions {
    double tol = 0.02;       // relative gap allowed for certification
    double cell_tol = 0.02;  // allowed |cell measure| at the finest resolution
    Solver solver = Solver::network_simplex;
};

// Builds the measure at a resolution, plus the (optionally spread) measure handed to
// the transport solver.
struct MeasureFactory {
    std::function<SignedMeasure(int)> measure;
    std::function<SignedMeasure(const SignedMeasure&)> dual_measure;  // identity when empty
};

CertificateReport certify_menu(const Menu& menu, const MeasureFactory& mu, const AllocationSet& S,
                               const std::vector<int>& resolutions, const CertifyOptions& opts = {});

void write_report(std::ostream& os, const Menu& menu, const CertificateReport& rep);

// nu_plus dominates nu_minus: F_plus(t) <= F_minus(t) at every t.
bool stochastic_dominance_1d(const std::vector<std::pair<double, double>>& nu_plus,
                             const std::vector<std::pair<double, double>>& nu_minus);

// nu_minus: negative part of mu inside `cell`; nu_plus: positive part on the boundary
// set `boundary`.  A(a) and B(a) add constraints for parameter a.
struct MatchingCondition {
    const SignedMeasure* mu = nullptr;
    Region cell;
    Region boundary;
    std::function<Region(double)> A, B;
    double a_lo = 0.0, a_hi = 1.0;
    double plus_scale = 1.0;
};

struct MatchingReport {
    std::vector<double> a, minus_mass, plus_mass;
    double worst = 0.0;  // min of minus_mass - plus_mass
    bool pass = true;
};

MatchingReport check_matching_condition(const MatchingCondition& cond, int a_samples);

// Line-mass bookkeeping for the deterministic two-item exponential instance with menu
// {0, (1,0) at p1, (1,1) at p12}.
struct ExpoProfiles {
    std::vector<std::pair<double, double>> pos1, neg1;  // (z, mass) samples
    double pos_total = 0.0, neg_total = 0.0;            // before matching the totals
    bool dominance = false;
    double x1_star = 0.0, x2_star = 0.0;
    double line_mass = 0.0;    // |mu| along x1 + x2 = p12 for x1 in [0, x1*]
    double max_neg_density = 0.0;
    double factor = 0.0;       // line_mass / max_neg_density
};

ExpoProfiles deterministic_expo_profiles(const DensitySpec& f, double p1, double p12, int samples = 512);

}  // namespace mdual
