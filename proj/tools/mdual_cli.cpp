// mdual: calibrate, certify, solve and sweep menu mechanisms from instance configs.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mdual/certify.hpp"
#include "mdual/config.hpp"
#include "mdual/error.hpp"
#include "mdual/transport.hpp"

namespace fs = std::filesystem;
using namespace mdual;

namespace {

enum Exit { ok = 0, internal = 1, config_error = 2, no_convergence = 3, refuted = 4, inconclusive = 5 };

struct Overrides {
    int resolution = 0;
    double tol = 0.0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out;
};

InstanceConfig load(const std::string& spec, const Overrides& o) {
    InstanceConfig cfg = resolve_config(spec);
    if (o.resolution > 0) {
        std::vector<int> ladder;
        for (int r : cfg.resolutions)
            if (r < o.resolution) ladder.push_back(r);
        ladder.push_back(o.resolution);
        cfg.resolutions = ladder;
    }
    if (o.tol > 0) cfg.tol = o.tol;
    if (o.seed_set) cfg.seed = o.seed;
    if (!o.out.empty()) cfg.output = o.out;
    validate(cfg);
    return cfg;
}

fs::path out_dir(const InstanceConfig& cfg) {
    fs::path dir(cfg.output);
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw InputError("cannot write " + p.string());
    return os;
}

void print_prices(const CalibrationSummary& cal) {
    std::printf("%10s", "resolution");
    for (std::size_t k = 0; k < cal.extrapolated.size(); ++k) std::printf("  %14s", ("p" + std::to_string(k)).c_str());
    std::printf("\n");
    for (std::size_t i = 0; i < cal.resolutions.size(); ++i) {
        std::printf("%10d", cal.resolutions[i]);
        for (double p : cal.prices[i]) std::printf("  %14.10f", p);
        std::printf("\n");
    }
    std::printf("%10s", "extrap");
    for (double p : cal.extrapolated) std::printf("  %14.10f", p);
    std::printf("\n%10s", "residual");
    for (double r : cal.residuals) std::printf("  %14.3e", r);
    std::printf("\n");
}

nlohmann::json report_json(const InstanceConfig& cfg, const Menu& menu, const CertificateReport& rep) {
    nlohmann::json j;
    j["instance"] = cfg.name;
    for (const auto& o : menu.options) j["menu"].push_back({{"allocation", o.allocation}, {"price", o.price}});
    j["primal"] = rep.primal;
    j["dual"] = rep.dual;
    j["gap"] = rep.gap;
    j["relative_gap"] = rep.relative_gap;
    j["extrapolated_gap"] = rep.extrapolated_gap;
    j["tol"] = rep.tol;
    j["cell_residuals"] = rep.cell_residuals;
    j["gap_nonincreasing"] = rep.gap_nonincreasing;
    j["weak_duality_ok"] = rep.weak_duality_ok;
    j["verdict"] = to_string(rep.verdict);
    for (const auto& e : rep.ladder)
        j["ladder"].push_back({{"resolution", e.resolution},
                               {"revenue", e.revenue},
                               {"plan_cost", e.plan_cost},
                               {"relative_gap", e.relative_gap},
                               {"max_cell_residual", e.max_cell_residual},
                               {"max_slackness", e.max_slackness},
                               {"sources", e.sources},
                               {"sinks", e.sinks}});
    return j;
}

int cmd_presets() {
    for (const auto& n : preset_names()) std::cout << n << "\n";
    return ok;
}

int cmd_calibrate(const std::string& spec, const Overrides& o) {
    InstanceConfig cfg = load(spec, o);
    CalibrationSummary cal = calibrate_instance(cfg);
    std::cout << "instance " << cfg.name << "\n";
    print_prices(cal);
    const double p_last = cal.extrapolated.back();
    for (const auto& b : cfg.benchmarks)
        std::printf("benchmark %s: %.6f (calibrated %.6f, difference %+.6f)\n", b.label.c_str(), b.value, p_last,
                    p_last - b.value);
    auto mc = revenue_direct(cal.menu, cfg.density, cfg.samples, cfg.seed);
    std::printf("revenue (monte carlo, %llu samples, seed %llu): %.6f +- %.6f\n",
                static_cast<unsigned long long>(cfg.samples), static_cast<unsigned long long>(cfg.seed), mc.mean,
                mc.stderr_);

    auto os = open_out(out_dir(cfg) / "prices.csv");
    os << "resolution";
    for (std::size_t k = 0; k < cal.extrapolated.size(); ++k) os << ",p" << k;
    os << "\n";
    char buf[64];
    auto row = [&](const std::string& label, const std::vector<double>& ps) {
        os << label;
        for (double p : ps) {
            std::snprintf(buf, sizeof buf, ",%.12f", p);
            os << buf;
        }
        os << "\n";
    };
    for (std::size_t i = 0; i < cal.resolutions.size(); ++i) row(std::to_string(cal.resolutions[i]), cal.prices[i]);
    row("extrapolated", cal.extrapolated);
    return ok;
}

int cmd_certify(const std::string& spec, const Overrides& o, bool calibrate) {
    InstanceConfig cfg = load(spec, o);
    Menu menu = cfg.menu;
    if (calibrate) {
        CalibrationSummary cal = calibrate_instance(cfg);
        print_prices(cal);
        menu = cal.menu;
    }
    CertifyOptions opts;
    opts.tol = cfg.tol;
    opts.cell_tol = cfg.cell_tol;
    CertificateReport rep = certify_menu(menu, instance_factory(cfg), cfg.S, cfg.resolutions, opts);
    write_report(std::cout, menu, rep);

    const fs::path dir = out_dir(cfg);
    {
        auto os = open_out(dir / "report.txt");
        write_report(os, menu, rep);
    }
    {
        auto os = open_out(dir / "report.json");
        os << report_json(cfg, menu, rep).dump(2) << "\n";
    }
    {
        auto os = open_out(dir / "cells.csv");
        write_cells_csv(os, menu, rep.cells);
    }
    {
        auto os = open_out(dir / "cells.svg");
        write_cells_svg(os, menu, rep.measure, rep.cells);
    }
    {
        auto os = open_out(dir / "plan.csv");
        write_plan_csv(os, rep.instance, rep.plan);
    }
    {
        auto os = open_out(dir / "plan.svg");
        write_plan_svg(os, rep.instance, rep.plan);
    }
    {
        auto os = open_out(dir / "mechanism.csv");
        write_mechanism_csv(os, recovered_mechanism(rep.plan, rep.instance));
    }
    switch (rep.verdict) {
        case Verdict::certified_at_grid: return ok;
        case Verdict::refuted: return refuted;
        default: return inconclusive;
    }
}

int cmd_solve(const std::string& spec, const Overrides& o, bool shortest_path) {
    InstanceConfig cfg = load(spec, o);
    const int r = cfg.resolutions.back();
    MeasureFactory mf = instance_factory(cfg);
    SignedMeasure mu = mf.measure(r);
    SignedMeasure dual_mu = mf.dual_measure ? mf.dual_measure(mu) : mu;
    TransportInstance inst = discretize_dual(dual_mu, cfg.S);
    const auto t0 = std::chrono::steady_clock::now();
    TransportPlan plan = solve(inst, shortest_path ? Solver::shortest_path : Solver::network_simplex);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    SlacknessReport sl = check_plan(inst, plan);
    std::printf("resolution %d: %zu sources, %zu sinks\n", r, inst.sources.size(), inst.sinks.size());
    std::printf("plan cost %.12f\ndual value %.12f\n", plan.cost, plan.dual);
    std::printf("max dual violation %.3e, max flow residual %.3e, marginal error %.3e\n", sl.max_violation,
                sl.max_flow_residual, sl.marginal_error);
    std::printf("%zu pivots, %.2f s\n", plan.pivots, secs);

    const fs::path dir = out_dir(cfg);
    {
        auto os = open_out(dir / "plan.csv");
        write_plan_csv(os, inst, plan);
    }
    {
        auto os = open_out(dir / "plan.svg");
        write_plan_svg(os, inst, plan);
    }
    {
        auto os = open_out(dir / "mechanism.csv");
        write_mechanism_csv(os, recovered_mechanism(plan, inst));
    }
    return ok;
}

int cmd_sweep(const std::string& spec, const Overrides& o, const CLI::App& sub, double from, double to, double step) {
    InstanceConfig cfg = load(spec, o);
    if (sub.count("--from")) cfg.sweep.from = from;
    if (sub.count("--to")) cfg.sweep.to = to;
    if (sub.count("--step")) cfg.sweep.step = step;
    if (o.tol > 0) cfg.sweep.tol = o.tol;
    validate(cfg);
    SweepResult sw = run_sweep(cfg);
    write_sweep_csv(std::cout, sw);
    if (sw.threshold)
        std::printf("smallest certified alpha: %.4f\n", *sw.threshold);
    else
        std::printf("no alpha in range certified\n");
    auto os = open_out(out_dir(cfg) / "sweep.csv");
    write_sweep_csv(os, sw);
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Calibrate and certify menu mechanisms through transport duality"};
    app.require_subcommand(1);

    Overrides o;
    std::string spec;
    auto common = [&](CLI::App* c) {
        c->add_option("config", spec, "config file or preset:<name>")->required();
        c->add_option("--resolution", o.resolution, "finest grid resolution");
        c->add_option("--tol", o.tol, "relative gap tolerance");
        c->add_option("--seed", o.seed, "Monte Carlo seed")->each([&](const std::string&) { o.seed_set = true; });
        c->add_option("--out", o.out, "output directory");
    };

    auto* preset_cmd = app.add_subcommand("preset", "embedded presets");
    preset_cmd->add_subcommand("list", "list preset names");
    preset_cmd->require_subcommand(1);

    auto* calibrate = app.add_subcommand("calibrate", "calibrate menu prices");
    common(calibrate);

    bool no_calibrate = false;
    auto* certify = app.add_subcommand("certify", "calibrate, then certify through the transport dual");
    common(certify);
    certify->add_flag("--no-calibrate", no_calibrate, "certify the prices given in the config");

    bool ssp = false;
    auto* solve_cmd = app.add_subcommand("solve", "solve the transport dual at the finest resolution");
    common(solve_cmd);
    solve_cmd->add_flag("--shortest-path", ssp, "use the successive shortest path solver");

    double from = 0, to = 0, step = 0;
    auto* sweep = app.add_subcommand("sweep", "certify the grand bundle over a range of alpha");
    common(sweep);
    sweep->add_option("--from", from, "first alpha");
    sweep->add_option("--to", to, "last alpha");
    sweep->add_option("--step", step, "alpha increment");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? ok : config_error;
    }

    try {
        if (*preset_cmd) return cmd_presets();
        if (*calibrate) return cmd_calibrate(spec, o);
        if (*certify) return cmd_certify(spec, o, !no_calibrate);
        if (*solve_cmd) return cmd_solve(spec, o, ssp);
        if (*sweep) return cmd_sweep(spec, o, *sweep, from, to, step);
    } catch (const InputError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const UnsupportedError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const ConvergenceError& e) {
        std::cerr << "calibration did not converge: " << e.what() << "\n";
        return no_convergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return internal;
    }
    return internal;
}
