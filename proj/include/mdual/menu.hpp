#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mdual/allocation.hpp"
#include "mdual/geometry.hpp"
#include "mdual/measure.hpp"

namespace mdual {

struct Option {
    Vec allocation;
    double price = 0.0;
    bool pinned = false;  // held fixed during calibration
};

// u(x) = max_k s_k . x - p_k
struct Menu {
    std::vector<Option> options;

    std::size_t dim() const { return options.front().allocation.size(); }
    std::vector<double> prices() const;
};

// Checks finiteness, dimensions, feasibility in S and individual rationality: some
// option with nonnegative allocation and price <= 0 keeps u >= 0 on the orthant.
void validate(const Menu& menu, const AllocationSet& S);

// Zero option (allocation 0, price 0) followed by the shape options.
Menu with_zero_option(const std::vector<Option>& shape);

struct Utility {
    double value = 0.0;
    std::size_t winner = 0;
};

// Ties go to the larger s.x, then to the lower index.
Utility utility(const Menu& menu, const Vec& x);

// {x : option k weakly beats every other option}
Region option_region(const Menu& menu, std::size_t k);

enum class CellAssignment {
    fractional,  // boxes split by exact overlap with each option's region
    midpoint     // whole box to the winner at its representative point
};

struct CellEntry {
    double measure = 0.0;
    double atom = 0.0, interior = 0.0, boundary = 0.0;
    std::size_t pieces = 0;          // pieces with positive overlap
    double straddle_fraction = 0.0;  // share of |weight| from boxes split with other options
};

struct CellReport {
    std::vector<CellEntry> cells;
    std::vector<std::size_t> winner;  // per piece of mu, the option at its representative point
    double total = 0.0;
};

CellReport cell_measures(const Menu& menu, const SignedMeasure& mu,
                         CellAssignment mode = CellAssignment::fractional);

double revenue_via_measure(const Menu& menu, const SignedMeasure& mu);

struct MonteCarloEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
};

MonteCarloEstimate revenue_direct(const Menu& menu, const DensitySpec& f, std::uint64_t samples,
                                  std::uint64_t seed);

struct CalibrationOptions {
    double tol = 1e-11;          // max |cell measure| over calibrated options
    int max_iterations = 60;
    double fd_step = 1e-7;
    CellAssignment assignment = CellAssignment::fractional;
};

struct CalibrationResult {
    Menu menu;
    std::vector<double> residuals;  // cell measure per option, zero option included
    int iterations = 0;
    std::string trace;
};

// Damped Newton on prices -> cell measures of the unpinned options.  Zero options
// (allocation 0, price 0) and pinned options keep their prices.
CalibrationResult calibrate_prices(const Menu& initial, const SignedMeasure& mu,
                                   const CalibrationOptions& opts = {});

// Richardson combination p_fine + (p_fine - p_coarse) / ((r_fine / r_coarse)^order - 1).
std::vector<double> richardson(const std::vector<double>& coarse, const std::vector<double>& fine,
                               double r_coarse, double r_fine, double order);

Menu with_prices(const Menu& menu, const std::vector<double>& prices);

void write_cells_csv(std::ostream& os, const Menu& menu, const CellReport& rep);

// Cell decomposition drawn over the grid pieces (2-D only).
void write_cells_svg(std::ostream& os, const Menu& menu, const SignedMeasure& mu, const CellReport& rep);

}  // namespace mdual
