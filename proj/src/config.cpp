#include "mdual/config.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "mdual/error.hpp"

namespace mdual {

using nlohmann::json;

namespace {

const std::map<std::string, std::string>& presets() {
    static const std::map<std::string, std::string> p = {
        {"single-item", R"({
  "name": "single-item",
  "density": {"kind": "uniform_box", "lo": [0], "hi": [1]},
  "z0": [0],
  "allocation": {"vertices": [[0], [1]], "deterministic": false},
  "menu": {"zero_option": true, "options": [{"allocation": [1], "price": 0.4}]},
  "resolutions": [64, 128, 256],
  "calibration": {"resolutions": [128, 256]},
  "tol": 0.01
})"},
        {"at-most-one", R"({
  "name": "at-most-one",
  "density": {"kind": "uniform_box", "lo": [0, 0], "hi": [1, 1]},
  "z0": [0, 0],
  "allocation": {"vertices": [[0, 0], [1, 0], [0, 1]], "deterministic": false},
  "menu": {"zero_option": true, "options": [
    {"allocation": [1, 0], "price": 0.5},
    {"allocation": [0, 1], "price": 0.5}]},
  "resolutions": [32, 64, 128],
  "calibration": {"resolutions": [64, 128]},
  "tol": 0.02
})"},
        {"exactly-one", R"({
  "name": "exactly-one",
  "density": {"kind": "uniform_box", "lo": [0, 0], "hi": [1, 1]},
  "z0": [0, 0],
  "allocation": {"vertices": [[1, 0], [0, 1]], "deterministic": false},
  "menu": {"zero_option": false, "options": [
    {"allocation": [1, 0], "price": 0.3},
    {"allocation": [0, 1], "price": 0.0, "pinned": true}]},
  "spread": {"kind": "diagonal-collapse", "band": 0.3333333333333333, "cap": 0.6666666666666667},
  "resolutions": [32, 64, 128],
  "calibration": {"resolutions": [64, 128]},
  "tol": 0.02
})"},
        {"deterministic-expo", R"({
  "name": "deterministic-expo",
  "density": {"kind": "exponential_product", "rates": [2, 1], "truncation": 8},
  "z0": [0, 0],
  "allocation": {"vertices": [[0, 0], [1, 0], [0, 1], [1, 1]], "deterministic": true},
  "menu": {"zero_option": true, "options": [
    {"allocation": [1, 0], "price": 0.9},
    {"allocation": [1, 1], "price": 1.2}]},
  "resolutions": [16, 32, 64],
  "calibration": {"resolutions": [256, 512]},
  "tol": 0.02,
  "benchmarks": [{"label": "randomized mechanism, grand bundle price", "value": 1.2319}]
})"},
        {"bundle-alpha", R"({
  "name": "bundle-alpha",
  "density": {"kind": "uniform_box", "lo": [0, 0], "hi": [1, 1]},
  "z0": [0, 0],
  "family": {"kind": "bundle-alpha", "alpha": 2.0},
  "resolutions": [32, 64],
  "calibration": {"resolutions": [64, 128]},
  "tol": 0.02,
  "sweep": {"from": 1.0, "to": 1.5, "step": 0.02, "tol": 0.01, "resolutions": [32, 64]}
})"},
    };
    return p;
}

Vec vec_of(const json& j, const char* what) {
    if (!j.is_array()) throw InputError(std::string(what) + " must be an array");
    Vec v;
    for (const auto& x : j) {
        if (!x.is_number()) throw InputError(std::string(what) + " must contain numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

std::vector<int> ints_of(const json& j, const char* what) {
    if (!j.is_array()) throw InputError(std::string(what) + " must be an array");
    std::vector<int> v;
    for (const auto& x : j) {
        if (!x.is_number_integer()) throw InputError(std::string(what) + " must contain integers");
        v.push_back(x.get<int>());
    }
    return v;
}

DensitySpec density_of(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "uniform_box") return DensitySpec::uniform(vec_of(j.at("lo"), "density.lo"), vec_of(j.at("hi"), "density.hi"));
    if (kind == "exponential_product")
        return DensitySpec::exponential(vec_of(j.at("rates"), "density.rates"), j.at("truncation").get<double>());
    if (kind == "tabulated")
        return DensitySpec::tabulated(vec_of(j.at("lo"), "density.lo"), vec_of(j.at("hi"), "density.hi"),
                                      j.at("resolution").get<int>(), vec_of(j.at("values"), "density.values"));
    throw InputError("unknown density kind '" + kind + "'");
}

}  // namespace

void set_alpha(InstanceConfig& cfg, double alpha) {
    if (!(alpha > 0)) throw InputError("alpha must be positive");
    cfg.alpha = alpha;
    cfg.S = AllocationSet({{0, 0}, {1, 0}, {0, 1}, {alpha, alpha}}, true);
    cfg.menu = with_zero_option({{{alpha, alpha}, 0.75 * alpha, false}});
}

void validate(const InstanceConfig& cfg) {
    if (cfg.z0.size() != cfg.density.dim()) throw InputError("z0 has the wrong dimension");
    if (cfg.S.vertices.empty() || cfg.S.dim() != cfg.density.dim())
        throw InputError("allocation set dimension does not match the density");
    validate(cfg.menu, cfg.S);
    auto ascending = [](const std::vector<int>& r, const char* what) {
        if (r.empty()) throw InputError(std::string(what) + " is empty");
        for (std::size_t k = 0; k < r.size(); ++k) {
            if (r[k] < 1) throw InputError(std::string(what) + " must be positive");
            if (k && r[k] <= r[k - 1]) throw InputError(std::string(what) + " must ascend");
        }
    };
    ascending(cfg.resolutions, "resolutions");
    ascending(cfg.calibration_resolutions, "calibration.resolutions");
    ascending(cfg.sweep.resolutions, "sweep.resolutions");
    if (!(cfg.tol > 0) || !(cfg.cell_tol > 0) || !(cfg.calibration_tol > 0) || !(cfg.sweep.tol > 0))
        throw InputError("tolerances must be positive");
    if (!(cfg.richardson_order > 0)) throw InputError("richardson_order must be positive");
    if (!(cfg.sweep.step > 0) || cfg.sweep.to < cfg.sweep.from) throw InputError("bad sweep range");
    if (cfg.samples < 1) throw InputError("samples must be positive");
    if (cfg.spread) {
        if (cfg.spread->kind != "diagonal-collapse") throw InputError("unknown spread kind '" + cfg.spread->kind + "'");
        if (cfg.density.dim() != 2) throw InputError("diagonal-collapse needs a 2-D instance");
    }
}

InstanceConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        InstanceConfig cfg;
        cfg.name = j.value("name", std::string("instance"));
        cfg.density = density_of(j.at("density"));
        cfg.z0 = j.contains("z0") ? vec_of(j.at("z0"), "z0") : Vec(cfg.density.dim(), 0.0);

        if (j.contains("family")) {
            const auto& fam = j.at("family");
            const std::string kind = fam.at("kind").get<std::string>();
            if (kind != "bundle-alpha") throw InputError("unknown family '" + kind + "'");
            if (cfg.density.dim() != 2) throw InputError("bundle-alpha needs a 2-D density");
            set_alpha(cfg, fam.at("alpha").get<double>());
        } else {
            const auto& a = j.at("allocation");
            std::vector<Vec> verts;
            for (const auto& v : a.at("vertices")) verts.push_back(vec_of(v, "allocation.vertices"));
            cfg.S = AllocationSet(std::move(verts), !a.value("deterministic", false));

            const auto& m = j.at("menu");
            std::vector<Option> opts;
            for (const auto& o : m.at("options"))
                opts.push_back({vec_of(o.at("allocation"), "menu allocation"), o.at("price").get<double>(),
                                o.value("pinned", false)});
            if (m.value("zero_option", true))
                cfg.menu = with_zero_option(opts);
            else
                cfg.menu.options = opts;
        }

        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            const std::string q = g.value("quadrature", std::string("exact"));
            if (q == "exact")
                cfg.grid.quadrature = Quadrature::exact;
            else if (q == "midpoint")
                cfg.grid.quadrature = Quadrature::midpoint;
            else
                throw InputError("unknown quadrature '" + q + "'");
            cfg.grid.staggered_facets = g.value("staggered_facets", true);
        }
        if (j.contains("resolutions")) cfg.resolutions = ints_of(j.at("resolutions"), "resolutions");
        if (j.contains("calibration")) {
            const auto& c = j.at("calibration");
            if (c.contains("resolutions"))
                cfg.calibration_resolutions = ints_of(c.at("resolutions"), "calibration.resolutions");
            cfg.richardson_order = c.value("richardson_order", cfg.richardson_order);
            cfg.calibration_tol = c.value("tol", cfg.calibration_tol);
        }
        cfg.tol = j.value("tol", cfg.tol);
        cfg.cell_tol = j.value("cell_tol", cfg.cell_tol);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.samples = j.value("samples", cfg.samples);
        cfg.output = j.value("output", cfg.output);
        if (j.contains("spread")) {
            const auto& s = j.at("spread");
            SpreadConfig sc;
            sc.kind = s.value("kind", sc.kind);
            sc.band = s.at("band").get<double>();
            sc.cap = s.at("cap").get<double>();
            cfg.spread = sc;
        }
        if (j.contains("sweep")) {
            const auto& s = j.at("sweep");
            cfg.sweep.from = s.value("from", cfg.sweep.from);
            cfg.sweep.to = s.value("to", cfg.sweep.to);
            cfg.sweep.step = s.value("step", cfg.sweep.step);
            cfg.sweep.tol = s.value("tol", cfg.sweep.tol);
            if (s.contains("resolutions")) cfg.sweep.resolutions = ints_of(s.at("resolutions"), "sweep.resolutions");
        }
        if (j.contains("benchmarks"))
            for (const auto& b : j.at("benchmarks"))
                cfg.benchmarks.push_back({b.at("label").get<std::string>(), b.at("value").get<double>()});
        validate(cfg);
        return cfg;
    } catch (const json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
}

InstanceConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::vector<std::string> preset_names() {
    return {"single-item", "at-most-one", "exactly-one", "deterministic-expo", "bundle-alpha"};
}

std::string preset_json(const std::string& name) {
    auto it = presets().find(name);
    if (it == presets().end()) throw InputError("unknown preset '" + name + "'");
    return it->second;
}

InstanceConfig preset(const std::string& name) { return parse_config(preset_json(name)); }

InstanceConfig resolve_config(const std::string& spec) {
    const std::string tag = "preset:";
    if (spec.rfind(tag, 0) == 0) return preset(spec.substr(tag.size()));
    return load_config(spec);
}

SignedMeasure instance_measure(const InstanceConfig& cfg, int resolution) {
    return transform(cfg.density, cfg.z0, resolution, cfg.grid);
}

SpreadSpec instance_spread(const InstanceConfig& cfg, const SignedMeasure& mu) {
    SpreadSpec spec;
    spec.mean_preserving = true;
    if (!cfg.spread) return spec;
    const double band = cfg.spread->band, cap = cfg.spread->cap;
    std::map<std::pair<long long, long long>, double> neg;
    for (const auto& p : mu.pieces)
        if (p.kind == PieceKind::interior && p.weight < 0)
            neg[{std::llround(p.point[0] * 1e9), std::llround(p.point[1] * 1e9)}] += p.weight;
    for (const auto& p : mu.pieces) {
        if (p.kind != PieceKind::interior || p.weight >= 0) continue;
        const double a = p.point[0], b = p.point[1];
        if (!(a < b) || b - a > band + 1e-12 || b > cap + 1e-12) continue;
        auto it = neg.find({std::llround(b * 1e9), std::llround(a * 1e9)});
        if (it == neg.end() || std::abs(it->second - p.weight) > 1e-14 * std::abs(p.weight)) continue;
        const double m = 0.5 * (a + b);
        Move mv;
        mv.sources = {{{a, b}, p.weight}, {{b, a}, p.weight}};
        mv.destinations = {{{m, m}, 2.0 * p.weight}};
        spec.moves.push_back(std::move(mv));
    }
    return spec;
}

MeasureFactory instance_factory(const InstanceConfig& cfg) {
    MeasureFactory mf;
    mf.measure = [cfg](int r) { return instance_measure(cfg, r); };
    if (cfg.spread)
        mf.dual_measure = [cfg](const SignedMeasure& mu) { return apply_spread(mu, instance_spread(cfg, mu)); };
    return mf;
}

CalibrationSummary calibrate_instance(const InstanceConfig& cfg) {
    CalibrationSummary out;
    CalibrationOptions opts;
    opts.tol = cfg.calibration_tol;
    Menu start = cfg.menu;
    for (int r : cfg.calibration_resolutions) {
        SignedMeasure mu = instance_measure(cfg, r);
        CalibrationResult res = calibrate_prices(start, mu, opts);
        out.resolutions.push_back(r);
        out.prices.push_back(res.menu.prices());
        out.trace += "resolution " + std::to_string(r) + "\n" + res.trace;
        start = res.menu;
    }
    out.extrapolated = out.prices.back();
    if (out.prices.size() >= 2) {
        const std::size_t k = out.prices.size();
        out.extrapolated = richardson(out.prices[k - 2], out.prices[k - 1], out.resolutions[k - 2],
                                      out.resolutions[k - 1], cfg.richardson_order);
    }
    out.menu = with_prices(cfg.menu, out.extrapolated);
    SignedMeasure mu = instance_measure(cfg, out.resolutions.back());
    for (const auto& c : cell_measures(out.menu, mu).cells) out.residuals.push_back(c.measure);
    return out;
}

SweepResult run_sweep(const InstanceConfig& cfg) {
    if (!cfg.alpha) throw InputError("sweep needs a bundle-alpha family config");
    SweepResult out;
    const int steps = static_cast<int>(std::floor((cfg.sweep.to - cfg.sweep.from) / cfg.sweep.step + 1e-9));
    for (int k = 0; k <= steps; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        InstanceConfig c = cfg;
        const double alpha = cfg.sweep.from + k * cfg.sweep.step;
        set_alpha(c, alpha);
        CalibrationSummary cal = calibrate_instance(c);
        CertifyOptions opts;
        opts.tol = cfg.sweep.tol;
        opts.cell_tol = cfg.cell_tol;
        CertificateReport rep = certify_menu(cal.menu, instance_factory(c), c.S, cfg.sweep.resolutions, opts);
        SweepPoint pt;
        pt.alpha = alpha;
        pt.price = cal.menu.options.back().price;
        pt.revenue = rep.primal;
        pt.dual = rep.dual;
        pt.relative_gap = rep.relative_gap;
        pt.verdict = rep.verdict;
        pt.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!out.threshold && pt.verdict == Verdict::certified_at_grid) out.threshold = alpha;
        out.points.push_back(pt);
    }
    return out;
}

void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
    os << "alpha,price,revenue,dual,relative_gap,verdict\n";
    char buf[256];
    for (const auto& p : sweep.points) {
        std::snprintf(buf, sizeof buf, "%.4f,%.10f,%.10f,%.10f,%.6e,%s\n", p.alpha, p.price, p.revenue, p.dual,
                      p.relative_gap, to_string(p.verdict));
        os << buf;
    }
}

}  // namespace mdual
