#include "mdual/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>

#include "mdual/error.hpp"

namespace mdual {

TransportInstance discretize_dual(const SignedMeasure& mu, const AllocationSet& S, double mass_tol) {
    TransportInstance inst;
    inst.S = S;
    if (mu.pieces.empty()) return inst;
    if (mu.n != S.dim()) throw InputError("discretize_dual: measure and allocation set differ in dimension");
    const double m = total_mass(mu);
    if (std::abs(m) > mass_tol) throw InputError("discretize_dual: total mass " + std::to_string(m) + " is not zero");

    std::map<std::vector<long long>, std::pair<Vec, double>> merged;
    double abs_total = 0.0;
    for (const auto& p : mu.pieces) {
        std::vector<long long> key(p.point.size());
        for (std::size_t k = 0; k < key.size(); ++k) key[k] = std::llround(p.point[k] * 1e9);
        auto it = merged.find(key);
        if (it == merged.end())
            merged.emplace(std::move(key), std::make_pair(p.point, p.weight));
        else
            it->second.second += p.weight;
        abs_total += std::abs(p.weight);
    }
    const double drop = 1e-15 * abs_total;
    double sup = 0.0, dem = 0.0;
    for (auto& [key, pw] : merged) {
        if (pw.second > drop) {
            inst.sources.push_back(pw.first);
            inst.supply.push_back(pw.second);
            sup += pw.second;
        } else if (pw.second < -drop) {
            inst.sinks.push_back(pw.first);
            inst.demand.push_back(-pw.second);
            dem += -pw.second;
        }
    }
    if (inst.sources.empty() != inst.sinks.empty())
        throw InputError("discretize_dual: only one sign of mass present");
    if (dem > 0) {
        inst.rescale = sup / dem;
        for (auto& d : inst.demand) d *= inst.rescale;
    }
    return inst;
}

namespace {

// Primal network simplex on the complete bipartite graph with an artificial root.
// Only tree arcs carry flow, so the arcs themselves are never stored.
class NetworkSimplex {
public:
    explicit NetworkSimplex(const TransportInstance& inst)
        : inst_(inst),
          ns_(inst.sources.size()),
          nt_(inst.sinks.size()),
          root_(ns_ + nt_),
          nodes_(ns_ + nt_ + 1),
          real_arcs_(static_cast<std::int64_t>(ns_) * static_cast<std::int64_t>(nt_)),
          arcs_(real_arcs_ + static_cast<std::int64_t>(ns_ + nt_)) {
        px_ = project(inst.S, inst.sources);
        py_ = project(inst.S, inst.sinks);
        nv_ = inst.S.size();
        double cmax = 0.0;
        for (double v : px_.values) cmax = std::max(cmax, std::abs(v));
        double cmax2 = 0.0;
        for (double v : py_.values) cmax2 = std::max(cmax2, std::abs(v));
        cmax = cmax + cmax2;
        scale_ = std::max(1.0, cmax);
        art_ = 1.0 + 2.0 * static_cast<double>(nodes_) * scale_;
        eps_ = 1e-12 * scale_;
    }

    TransportPlan run() {
        init();
        std::size_t pivots = 0;
        const std::int64_t block =
            std::max<std::int64_t>(10, static_cast<std::int64_t>(std::sqrt(static_cast<double>(arcs_))));
        std::int64_t next = 0;
        while (true) {
            std::int64_t e = find_entering(block, next);
            if (e < 0) break;
            pivot(e);
            ++pivots;
        }
        return extract(pivots);
    }

private:
    std::int64_t src(std::int64_t e) const {
        if (e < real_arcs_) return e / static_cast<std::int64_t>(nt_);
        std::int64_t v = e - real_arcs_;
        return v < static_cast<std::int64_t>(ns_) ? v : static_cast<std::int64_t>(root_);
    }
    std::int64_t tgt(std::int64_t e) const {
        if (e < real_arcs_) return static_cast<std::int64_t>(ns_) + e % static_cast<std::int64_t>(nt_);
        std::int64_t v = e - real_arcs_;
        return v < static_cast<std::int64_t>(ns_) ? static_cast<std::int64_t>(root_) : v;
    }
    double cost(std::int64_t e) const {
        if (e < real_arcs_) {
            std::size_t i = static_cast<std::size_t>(e / static_cast<std::int64_t>(nt_));
            std::size_t j = static_cast<std::size_t>(e % static_cast<std::int64_t>(nt_));
            return ell_projected(px_.row(i), py_.row(j), nv_);
        }
        return art_;
    }
    bool in_tree(std::int64_t e) const {
        std::int64_t u = src(e), v = tgt(e);
        return pred_[u] == e || pred_[v] == e;
    }

    void init() {
        parent_.assign(nodes_, -1);
        pred_.assign(nodes_, -1);
        up_.assign(nodes_, 0);
        flow_.assign(nodes_, 0.0);
        pi_.assign(nodes_, 0.0);
        depth_.assign(nodes_, 0);
        first_child_.assign(nodes_, -1);
        next_sib_.assign(nodes_, -1);
        prev_sib_.assign(nodes_, -1);
        for (std::size_t v = 0; v < root_; ++v) {
            parent_[v] = static_cast<std::int64_t>(root_);
            pred_[v] = real_arcs_ + static_cast<std::int64_t>(v);
            depth_[v] = 1;
            if (v < ns_) {
                up_[v] = 1;
                flow_[v] = inst_.supply[v];
                pi_[v] = -art_;
            } else {
                up_[v] = 0;
                flow_[v] = inst_.demand[v - ns_];
                pi_[v] = art_;
            }
            add_child(static_cast<std::int64_t>(root_), static_cast<std::int64_t>(v));
        }
    }

    void add_child(std::int64_t p, std::int64_t c) {
        next_sib_[c] = first_child_[p];
        prev_sib_[c] = -1;
        if (first_child_[p] >= 0) prev_sib_[first_child_[p]] = c;
        first_child_[p] = c;
    }
    void remove_child(std::int64_t p, std::int64_t c) {
        if (prev_sib_[c] >= 0)
            next_sib_[prev_sib_[c]] = next_sib_[c];
        else
            first_child_[p] = next_sib_[c];
        if (next_sib_[c] >= 0) prev_sib_[next_sib_[c]] = prev_sib_[c];
        next_sib_[c] = prev_sib_[c] = -1;
    }

    double reduced(std::int64_t e) const { return cost(e) + pi_[src(e)] - pi_[tgt(e)]; }

    // Block search pivot rule: scan arcs cyclically from `next`, stop after the first
    // block containing an eligible arc and return the most negative one seen.
    // Real arcs are scanned sink-major (position j * ns + i), which finds eligible
    // arcs sooner than the storage order when sources are few.
    std::int64_t find_entering(std::int64_t block, std::int64_t& next) {
        double best = -eps_;
        std::int64_t best_e = -1;
        std::int64_t cnt = block;
        const std::int64_t nt = static_cast<std::int64_t>(nt_);
        const double* pis = pi_.data() + ns_;

        auto tick = [&](std::int64_t e) {
            if (--cnt == 0) {
                if (best_e >= 0) {
                    next = e + 1;
                    return true;
                }
                cnt = block;
            }
            return false;
        };
        const std::int64_t ns = static_cast<std::int64_t>(ns_);
        auto scan = [&](std::int64_t from, std::int64_t to) -> bool {
            std::int64_t v = from;
            while (v < to && v < real_arcs_) {
                const std::int64_t j = v / ns;
                std::int64_t i = v - j * ns;
                const std::int64_t iend = std::min<std::int64_t>(ns, i + (to - v));
                const double* py = py_.row(static_cast<std::size_t>(j));
                const double pj = pis[j];
                for (; i < iend; ++i) {
                    const double rc = ell_projected(px_.row(static_cast<std::size_t>(i)), py, nv_) + pi_[i] - pj;
                    if (rc < best && !in_tree(i * nt + j)) {
                        best = rc;
                        best_e = i * nt + j;
                    }
                    if (tick(j * ns + i)) return true;
                }
                v = j * ns + iend;
            }
            for (std::int64_t e = std::max(v, real_arcs_); e < to; ++e) {
                const double rc = reduced(e);
                if (rc < best && !in_tree(e)) {
                    best = rc;
                    best_e = e;
                }
                if (tick(e)) return true;
            }
            return false;
        };
        if (scan(next, arcs_)) return best_e;
        if (scan(0, next)) return best_e;
        if (best_e >= 0) next = 0;
        return best_e;
    }

    void pivot(std::int64_t e_in) {
        const std::int64_t first = src(e_in), second = tgt(e_in);
        std::int64_t u = first, v = second;
        while (u != v) {
            if (depth_[u] > depth_[v])
                u = parent_[u];
            else if (depth_[v] > depth_[u])
                v = parent_[v];
            else {
                u = parent_[u];
                v = parent_[v];
            }
        }
        const std::int64_t join = u;

        // Leaving arc, chosen as in a strongly feasible tree.
        const double inf = std::numeric_limits<double>::infinity();
        double delta = inf;
        std::int64_t u_out = -1;
        int side = 0;
        for (u = first; u != join; u = parent_[u]) {
            double d = up_[u] ? flow_[u] : inf;
            if (d < delta) {
                delta = d;
                u_out = u;
                side = 1;
            }
        }
        for (u = second; u != join; u = parent_[u]) {
            double d = up_[u] ? inf : flow_[u];
            if (d <= delta) {
                delta = d;
                u_out = u;
                side = 2;
            }
        }
        if (side == 0) throw InternalError("network simplex: unbounded cycle");

        if (delta > 0) {
            for (u = first; u != join; u = parent_[u]) flow_[u] += up_[u] ? -delta : delta;
            for (u = second; u != join; u = parent_[u]) flow_[u] += up_[u] ? delta : -delta;
        }

        const std::int64_t u_in = side == 1 ? first : second;
        const std::int64_t v_in = side == 1 ? second : first;
        const double rc = reduced(e_in);

        // Re-hang the cut subtree: reverse the path u_in .. u_out.
        path_.clear();
        for (u = u_in;; u = parent_[u]) {
            path_.push_back(u);
            if (u == u_out) break;
        }
        old_pred_.resize(path_.size());
        old_up_.resize(path_.size());
        old_flow_.resize(path_.size());
        for (std::size_t k = 0; k < path_.size(); ++k) {
            old_pred_[k] = pred_[path_[k]];
            old_up_[k] = up_[path_[k]];
            old_flow_[k] = flow_[path_[k]];
            remove_child(parent_[path_[k]], path_[k]);
        }
        for (std::size_t k = path_.size() - 1; k >= 1; --k) {
            const std::int64_t w = path_[k];
            parent_[w] = path_[k - 1];
            pred_[w] = old_pred_[k - 1];
            up_[w] = !old_up_[k - 1];
            flow_[w] = old_flow_[k - 1];
            add_child(path_[k - 1], w);
        }
        parent_[u_in] = v_in;
        pred_[u_in] = e_in;
        up_[u_in] = src(e_in) == u_in;
        flow_[u_in] = delta;
        add_child(v_in, u_in);

        const double shift = (u_in == first) ? -rc : rc;
        stack_.clear();
        stack_.push_back(u_in);
        while (!stack_.empty()) {
            std::int64_t w = stack_.back();
            stack_.pop_back();
            pi_[w] += shift;
            depth_[w] = depth_[parent_[w]] + 1;
            for (std::int64_t c = first_child_[w]; c >= 0; c = next_sib_[c]) stack_.push_back(c);
        }
    }

    TransportPlan extract(std::size_t pivots) {
        // Recompute potentials from the tree in extended precision.
        std::vector<long double> pi(nodes_, 0.0L);
        stack_.clear();
        for (std::int64_t c = first_child_[root_]; c >= 0; c = next_sib_[c]) stack_.push_back(c);
        while (!stack_.empty()) {
            std::int64_t w = stack_.back();
            stack_.pop_back();
            const long double c = cost(pred_[w]);
            pi[w] = up_[w] ? pi[parent_[w]] - c : pi[parent_[w]] + c;
            for (std::int64_t ch = first_child_[w]; ch >= 0; ch = next_sib_[ch]) stack_.push_back(ch);
        }

        TransportPlan plan;
        plan.pivots = pivots;
        plan.source_potential.resize(ns_);
        plan.sink_potential.resize(nt_);
        // Shift so the potentials are of order one whenever the tree is connected
        // through real arcs.
        long double base = ns_ > 0 ? pi[0] : 0.0L;
        for (std::size_t i = 0; i < ns_; ++i) plan.source_potential[i] = static_cast<double>(-(pi[i] - base));
        for (std::size_t j = 0; j < nt_; ++j)
            plan.sink_potential[j] = static_cast<double>(-(pi[ns_ + j] - base));

        long double cost_sum = 0.0L;
        double art_flow = 0.0;
        for (std::size_t v = 0; v < root_; ++v) {
            const std::int64_t e = pred_[v];
            if (e >= real_arcs_) {
                art_flow = std::max(art_flow, flow_[v]);
                continue;
            }
            if (flow_[v] <= 0.0) continue;
            Flow f;
            f.source = static_cast<std::size_t>(src(e));
            f.sink = static_cast<std::size_t>(tgt(e)) - ns_;
            f.weight = flow_[v];
            cost_sum += static_cast<long double>(f.weight) * cost(e);
            plan.flows.push_back(f);
        }
        double total = 0.0;
        for (double s : inst_.supply) total += s;
        if (art_flow > 1e-9 * std::max(1.0, total))
            throw InternalError("network simplex: artificial arcs carry flow at optimum");
        std::sort(plan.flows.begin(), plan.flows.end(), [](const Flow& a, const Flow& b) {
            return a.source != b.source ? a.source < b.source : a.sink < b.sink;
        });
        plan.cost = static_cast<double>(cost_sum);
        long double dual = 0.0L;
        for (std::size_t i = 0; i < ns_; ++i) dual += static_cast<long double>(inst_.supply[i]) * plan.source_potential[i];
        for (std::size_t j = 0; j < nt_; ++j) dual -= static_cast<long double>(inst_.demand[j]) * plan.sink_potential[j];
        plan.dual = static_cast<double>(dual);
        return plan;
    }

    const TransportInstance& inst_;
    std::size_t ns_, nt_, root_, nodes_;
    std::int64_t real_arcs_, arcs_;
    Projected px_, py_;
    std::size_t nv_ = 0;
    double scale_ = 1.0, art_ = 1.0, eps_ = 1e-12;

    std::vector<std::int64_t> parent_, pred_, depth_, first_child_, next_sib_, prev_sib_;
    std::vector<char> up_;
    std::vector<double> flow_, pi_;
    std::vector<std::int64_t> path_, old_pred_, stack_;
    std::vector<char> old_up_;
    std::vector<double> old_flow_;
};

// Successive shortest paths with Dijkstra on reduced costs; O(V^2) per path.
TransportPlan solve_shortest_path(const TransportInstance& inst) {
    const std::size_t ns = inst.sources.size(), nt = inst.sinks.size(), N = ns + nt;
    Projected px = project(inst.S, inst.sources), py = project(inst.S, inst.sinks);
    const std::size_t nv = inst.S.size();
    auto c = [&](std::size_t i, std::size_t j) { return ell_projected(px.row(i), py.row(j), nv); };

    std::vector<double> flow(ns * nt, 0.0);
    std::vector<double> supply = inst.supply, demand = inst.demand;
    double total = 0.0;
    for (double s : supply) total += s;
    const double tiny = 1e-14 * std::max(1.0, total);

    // h makes every residual arc nonnegative: sources 0, sinks min_i c(i, j).
    std::vector<double> h(N, 0.0);
    for (std::size_t j = 0; j < nt; ++j) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ns; ++i) m = std::min(m, c(i, j));
        h[ns + j] = m;
    }

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(N);
    std::vector<std::int64_t> prev(N);
    std::vector<char> done(N);
    std::size_t paths = 0;
    while (true) {
        bool any = false;
        for (std::size_t i = 0; i < ns; ++i) any = any || supply[i] > tiny;
        if (!any) break;

        std::fill(dist.begin(), dist.end(), inf);
        std::fill(prev.begin(), prev.end(), -1);
        std::fill(done.begin(), done.end(), 0);
        for (std::size_t i = 0; i < ns; ++i)
            if (supply[i] > tiny) dist[i] = 0.0;
        std::int64_t target = -1;
        double D = inf;
        while (true) {
            std::int64_t u = -1;
            double best = inf;
            for (std::size_t v = 0; v < N; ++v)
                if (!done[v] && dist[v] < best) {
                    best = dist[v];
                    u = static_cast<std::int64_t>(v);
                }
            if (u < 0) break;
            done[u] = 1;
            if (static_cast<std::size_t>(u) >= ns && demand[u - ns] > tiny) {
                target = u;
                D = dist[u];
                break;
            }
            if (static_cast<std::size_t>(u) < ns) {
                for (std::size_t j = 0; j < nt; ++j) {
                    const std::size_t v = ns + j;
                    if (done[v]) continue;
                    const double rc = c(u, j) + h[u] - h[v];
                    if (rc < -1e-9 * std::max(1.0, std::abs(h[v])))
                        throw InternalError("shortest paths: negative reduced cost");
                    if (dist[u] + std::max(rc, 0.0) < dist[v]) {
                        dist[v] = dist[u] + std::max(rc, 0.0);
                        prev[v] = u;
                    }
                }
            } else {
                const std::size_t j = static_cast<std::size_t>(u) - ns;
                for (std::size_t i = 0; i < ns; ++i) {
                    if (done[i] || flow[i * nt + j] <= 0.0) continue;
                    const double rc = -c(i, j) + h[u] - h[i];
                    if (dist[u] + std::max(rc, 0.0) < dist[i]) {
                        dist[i] = dist[u] + std::max(rc, 0.0);
                        prev[i] = u;
                    }
                }
            }
        }
        if (target < 0) throw InternalError("shortest paths: no augmenting path");
        for (std::size_t v = 0; v < N; ++v) h[v] += std::min(dist[v], D);

        double amount = demand[target - ns];
        std::int64_t v = target;
        while (prev[v] >= 0) {
            std::int64_t u = prev[v];
            if (static_cast<std::size_t>(u) >= ns) amount = std::min(amount, flow[v * nt + (u - ns)]);
            v = u;
        }
        amount = std::min(amount, supply[v]);
        supply[v] -= amount;
        demand[target - ns] -= amount;
        v = target;
        while (prev[v] >= 0) {
            std::int64_t u = prev[v];
            if (static_cast<std::size_t>(u) < ns)
                flow[u * nt + (v - ns)] += amount;
            else
                flow[v * nt + (u - ns)] -= amount;
            v = u;
        }
        ++paths;
    }

    TransportPlan plan;
    plan.pivots = paths;
    plan.source_potential.resize(ns);
    plan.sink_potential.resize(nt);
    for (std::size_t i = 0; i < ns; ++i) plan.source_potential[i] = -h[i];
    for (std::size_t j = 0; j < nt; ++j) plan.sink_potential[j] = -h[ns + j];
    long double cost_sum = 0.0L, dual = 0.0L;
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < nt; ++j)
            if (flow[i * nt + j] > 0.0) {
                plan.flows.push_back({i, j, flow[i * nt + j]});
                cost_sum += static_cast<long double>(flow[i * nt + j]) * c(i, j);
            }
    for (std::size_t i = 0; i < ns; ++i) dual += static_cast<long double>(inst.supply[i]) * plan.source_potential[i];
    for (std::size_t j = 0; j < nt; ++j) dual -= static_cast<long double>(inst.demand[j]) * plan.sink_potential[j];
    plan.cost = static_cast<double>(cost_sum);
    plan.dual = static_cast<double>(dual);
    return plan;
}

}  // namespace

TransportPlan solve(const TransportInstance& inst, Solver solver) {
    if (inst.sources.size() != inst.supply.size() || inst.sinks.size() != inst.demand.size())
        throw InputError("transport: weights do not match points");
    double sup = 0.0, dem = 0.0;
    for (double s : inst.supply) {
        if (!(s > 0)) throw InputError("transport: source weights must be positive");
        sup += s;
    }
    for (double d : inst.demand) {
        if (!(d > 0)) throw InputError("transport: sink weights must be positive");
        dem += d;
    }
    if (std::abs(sup - dem) > 1e-8 * std::max(1.0, sup)) throw InputError("transport: unbalanced instance");
    if (inst.sources.empty()) return {};
    if (solver == Solver::shortest_path) return solve_shortest_path(inst);
    return NetworkSimplex(inst).run();
}

SlacknessReport check_plan(const TransportInstance& inst, const TransportPlan& plan) {
    SlacknessReport r;
    const std::size_t ns = inst.sources.size(), nt = inst.sinks.size();
    Projected px = project(inst.S, inst.sources), py = project(inst.S, inst.sinks);
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < nt; ++j) {
            double c = ell_projected(px.row(i), py.row(j), inst.S.size());
            r.max_violation = std::max(r.max_violation, plan.source_potential[i] - plan.sink_potential[j] - c);
        }
    std::vector<double> out(ns, 0.0), in(nt, 0.0);
    for (const auto& f : plan.flows) {
        double c = ell_projected(px.row(f.source), py.row(f.sink), inst.S.size());
        r.max_flow_residual = std::max(
            r.max_flow_residual, std::abs(c - (plan.source_potential[f.source] - plan.sink_potential[f.sink])));
        out[f.source] += f.weight;
        in[f.sink] += f.weight;
        if (f.weight < 0) r.marginal_error = std::max(r.marginal_error, -f.weight);
    }
    for (std::size_t i = 0; i < ns; ++i) r.marginal_error = std::max(r.marginal_error, std::abs(out[i] - inst.supply[i]));
    for (std::size_t j = 0; j < nt; ++j) r.marginal_error = std::max(r.marginal_error, std::abs(in[j] - inst.demand[j]));
    return r;
}

double GridMechanism::evaluate(const Vec& z) const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sources.size(); ++i) best = std::max(best, source_potential[i] - ell(S, sources[i], z));
    return best - shift;
}

GridMechanism recovered_mechanism(const TransportPlan& plan, const TransportInstance& inst) {
    GridMechanism u;
    u.S = inst.S;
    u.sources = inst.sources;
    u.source_potential = plan.source_potential;
    for (std::size_t i = 0; i < inst.sources.size(); ++i) {
        u.points.push_back(inst.sources[i]);
        u.weights.push_back(inst.supply[i]);
    }
    for (std::size_t j = 0; j < inst.sinks.size(); ++j) {
        u.points.push_back(inst.sinks[j]);
        u.weights.push_back(-inst.demand[j]);
    }
    if (inst.sources.empty()) {
        u.values.assign(u.points.size(), 0.0);
        return u;
    }
    Projected px = project(inst.S, inst.sources), pz = project(inst.S, u.points);
    const std::size_t nv = inst.S.size();
    u.values.resize(u.points.size());
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t z = 0; z < u.points.size(); ++z) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < inst.sources.size(); ++i)
            best = std::max(best, plan.source_potential[i] - ell_projected(px.row(i), pz.row(z), nv));
        u.values[z] = best;
        lo = std::min(lo, best);
    }
    u.shift = lo;
    for (auto& v : u.values) v -= lo;
    return u;
}

double duality_gap(const Menu& menu, const TransportPlan& plan, const SignedMeasure& mu) {
    return plan.cost - revenue_via_measure(menu, mu);
}

namespace {
void num(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}
}  // namespace

void write_plan_csv(std::ostream& os, const TransportInstance& inst, const TransportPlan& plan) {
    const std::size_t n = inst.S.dim();
    for (std::size_t k = 0; k < n; ++k) os << (k ? "," : "") << "src" << k;
    for (std::size_t k = 0; k < n; ++k) os << ",dst" << k;
    os << ",weight,cost\n";
    for (const auto& f : plan.flows) {
        for (std::size_t k = 0; k < n; ++k) {
            if (k) os << ',';
            num(os, inst.sources[f.source][k]);
        }
        for (std::size_t k = 0; k < n; ++k) {
            os << ',';
            num(os, inst.sinks[f.sink][k]);
        }
        os << ',';
        num(os, f.weight);
        os << ',';
        num(os, inst.cost(f.source, f.sink));
        os << '\n';
    }
}

void write_plan_svg(std::ostream& os, const TransportInstance& inst, const TransportPlan& plan) {
    if (inst.S.dim() != 2) throw UnsupportedError("plan SVG needs a 2-D instance");
    double xmax = 1e-12, ymax = 1e-12, wmax = 0.0;
    for (const auto& p : inst.sources) xmax = std::max(xmax, p[0]), ymax = std::max(ymax, p[1]);
    for (const auto& p : inst.sinks) xmax = std::max(xmax, p[0]), ymax = std::max(ymax, p[1]);
    for (const auto& f : plan.flows) wmax = std::max(wmax, f.weight);
    const double sx = 500.0 / xmax, sy = 500.0 / ymax, pad = 10.0;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"520\" height=\"520\">\n"
       << "<rect x=\"10\" y=\"10\" width=\"500\" height=\"500\" fill=\"none\" stroke=\"#999\"/>\n";
    char buf[256];
    for (const auto& f : plan.flows) {
        const auto& a = inst.sources[f.source];
        const auto& b = inst.sinks[f.sink];
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#3060c0\" "
                      "stroke-opacity=\"%.3f\" stroke-width=\"0.6\"/>\n",
                      pad + a[0] * sx, pad + 500 - a[1] * sy, pad + b[0] * sx, pad + 500 - b[1] * sy,
                      0.15 + 0.85 * (wmax > 0 ? f.weight / wmax : 0.0));
        os << buf;
    }
    for (const auto& p : inst.sources) {
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"1.5\" fill=\"#c03030\"/>\n",
                      pad + p[0] * sx, pad + 500 - p[1] * sy);
        os << buf;
    }
    os << "</svg>\n";
}

void write_mechanism_csv(std::ostream& os, const GridMechanism& u) {
    const std::size_t n = u.points.empty() ? 0 : u.points.front().size();
    for (std::size_t k = 0; k < n; ++k) os << (k ? "," : "") << "x" << k;
    os << ",u,weight\n";
    for (std::size_t z = 0; z < u.points.size(); ++z) {
        for (std::size_t k = 0; k < n; ++k) {
            if (k) os << ',';
            num(os, u.points[z][k]);
        }
        os << ',';
        num(os, u.values[z]);
        os << ',';
        num(os, u.weights[z]);
        os << '\n';
    }
}

}  // namespace mdual
