#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mdual/allocation.hpp"
#include "mdual/certify.hpp"
#include "mdual/measure.hpp"
#include "mdual/menu.hpp"

namespace mdual {

// Mean-preserving collapse of negative interior mass onto the diagonal: each pair of
// mirror points (a, b), (b, a) with |a - b| <= band and max(a, b) <= cap moves to
// ((a + b) / 2, (a + b) / 2).
struct SpreadConfig {
    std::string kind = "diagonal-collapse";
    double band = 0.0, cap = 0.0;
};

struct SweepConfig {
    double from = 1.0, to = 1.5, step = 0.02;
    double tol = 0.01;
    std::vector<int> resolutions = {32, 64};
};

struct Benchmark {
    std::string label;
    double value = 0.0;
};

struct InstanceConfig {
    std::string name;
    DensitySpec density;
    Vec z0;
    AllocationSet S;
    Menu menu;                  // initial prices, zero option included when present
    std::optional<double> alpha;  // bundle-alpha family parameter
    GridOptions grid;
    std::vector<int> resolutions = {32, 64, 128};
    std::vector<int> calibration_resolutions = {64, 128};
    double richardson_order = 2.0;
    double calibration_tol = 1e-11;
    double tol = 0.02;
    double cell_tol = 0.02;
    std::uint64_t seed = 12345;
    std::uint64_t samples = 1000000;
    std::optional<SpreadConfig> spread;
    SweepConfig sweep;
    std::vector<Benchmark> benchmarks;
    std::string output = "out";
};

// Parses and validates a JSON instance document.
InstanceConfig parse_config(const std::string& json_text);
InstanceConfig load_config(const std::string& path);

std::vector<std::string> preset_names();
std::string preset_json(const std::string& name);
InstanceConfig preset(const std::string& name);

// Resolves "preset:<name>" or a file path.
InstanceConfig resolve_config(const std::string& spec);

// Bundle family: S = hull{0, e1, e2, (alpha, alpha)}, menu {0, (alpha, alpha)}.
void set_alpha(InstanceConfig& cfg, double alpha);

void validate(const InstanceConfig& cfg);

SignedMeasure instance_measure(const InstanceConfig& cfg, int resolution);
SpreadSpec instance_spread(const InstanceConfig& cfg, const SignedMeasure& mu);
MeasureFactory instance_factory(const InstanceConfig& cfg);

struct CalibrationSummary {
    std::vector<int> resolutions;
    std::vector<std::vector<double>> prices;  // per resolution
    std::vector<double> extrapolated;
    Menu menu;                                // extrapolated prices
    std::vector<double> residuals;            // cell measures of `menu` at the finest resolution
    std::string trace;
};

CalibrationSummary calibrate_instance(const InstanceConfig& cfg);

struct SweepPoint {
    double alpha = 0.0;
    double price = 0.0;
    double revenue = 0.0, dual = 0.0;
    double relative_gap = 0.0;
    Verdict verdict = Verdict::inconclusive;
    double seconds = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::optional<double> threshold;  // smallest alpha whose grand-bundle menu certifies
};

// Calibrates and certifies the grand-bundle menu at each alpha of cfg.sweep.
SweepResult run_sweep(const InstanceConfig& cfg);
void write_sweep_csv(std::ostream& os, const SweepResult& sweep);

}  // namespace mdual
