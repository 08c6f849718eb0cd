#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "mdual/allocation.hpp"
#include "mdual/measure.hpp"
#include "mdual/menu.hpp"

namespace mdual {

// Bipartite transportation problem between the Jordan parts of a discretized
// measure, with cost l_S(source, sink).
struct TransportInstance {
    AllocationSet S;
    std::vector<Vec> sources, sinks;
    std::vector<double> supply, demand;  // both positive, equal totals
    double rescale = 1.0;                // factor applied to the sink weights

    double cost(std::size_t i, std::size_t j) const { return ell(S, sources[i], sinks[j]); }
};

struct Flow {
    std::size_t source = 0, sink = 0;
    double weight = 0.0;
};

struct TransportPlan {
    std::vector<Flow> flows;
    // potential(x) - potential(y) <= l_S(x, y), equality where flow is carried
    std::vector<double> source_potential, sink_potential;
    double cost = 0.0;  // sum flow * l_S
    double dual = 0.0;  // sum supply * potential - sum demand * potential
    std::size_t pivots = 0;
};

// Coincident points are merged, zero weights dropped and sinks rescaled to balance.
TransportInstance discretize_dual(const SignedMeasure& mu, const AllocationSet& S, double mass_tol = 1e-8);

enum class Solver {
    network_simplex,   // block-search primal network simplex, implicit arcs
    shortest_path      // successive shortest paths with potentials, dense
};

TransportPlan solve(const TransportInstance& inst, Solver solver = Solver::network_simplex);

struct SlacknessReport {
    double max_violation = 0.0;      // max over all arcs of potential difference - cost
    double max_flow_residual = 0.0;  // max over flow arcs of |cost - potential difference|
    double marginal_error = 0.0;
};

SlacknessReport check_plan(const TransportInstance& inst, const TransportPlan& plan);

// u(z) = max over sources x of (potential(x) - l_S(x, z)) - shift, with min u = 0 on the nodes.
struct GridMechanism {
    std::vector<Vec> points;     // sources then sinks
    std::vector<double> values;  // u at points
    std::vector<double> weights; // signed mass at points
    double shift = 0.0;

    AllocationSet S;
    std::vector<Vec> sources;
    std::vector<double> source_potential;

    double evaluate(const Vec& z) const;
};

GridMechanism recovered_mechanism(const TransportPlan& plan, const TransportInstance& inst);

// Plan cost minus revenue_via_measure(menu, mu).
double duality_gap(const Menu& menu, const TransportPlan& plan, const SignedMeasure& mu);

void write_plan_csv(std::ostream& os, const TransportInstance& inst, const TransportPlan& plan);
void write_plan_svg(std::ostream& os, const TransportInstance& inst, const TransportPlan& plan);
void write_mechanism_csv(std::ostream& os, const GridMechanism& u);

}  // namespace mdual
