#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "relupat/affine.hpp"
#include "relupat/lp.hpp"
#include "relupat/pattern.hpp"
#include "relupat/postcondition.hpp"

namespace relupat {

// Conjunction of linear constraints over the inputs (the A of a contract).
using InputRegion = std::vector<LinearConstraint>;

inline InputRegion region_from_box(const Bounds& box) {
    InputRegion region;
    int n = static_cast<int>(box.size());
    for (int i = 0; i < n; ++i) {
        Vec e(n, 0.0);
        e[i] = 1.0;
        region.push_back({e, Relation::Ge, box[i].first});
        e[i] = 1.0;
        region.push_back({Vec(e), Relation::Le, box[i].second});
    }
    return region;
}

inline bool region_holds(const InputRegion& region, const Vec& x, double tol = 1e-9) {
    for (const auto& c : region)
        if (!c.holds(x, tol)) return false;
    return true;
}

struct Budget {
    long max_nodes = 10'000'000;
    double timeout_secs = 300.0;
};

struct Query {
    DecisionPattern pattern;
    InputRegion input_region;
    Postcondition post = Postcondition::prediction(0);
    std::optional<Vec> witness;  // warm start: try this input's phases first
};

enum class VerdictStatus { Proved, Refuted, Timeout };

struct SearchStats {
    long nodes = 0;
    long lp_calls = 0;
    long near_misses = 0;
    double wall_secs = 0.0;
};

struct Verdict {
    VerdictStatus status = VerdictStatus::Proved;
    Vec counterexample;  // set when Refuted
    Vec output;
    SearchStats stats;
};

namespace vdetail {

// Bound-like region constraints plus the input domain, as a per-dimension box.
inline Bounds effective_box(const Network& net, const InputRegion& region) {
    int n = net.input_dim();
    Bounds box(n, {-kInf, kInf});
    if (net.input_domain()) box = *net.input_domain();
    for (const auto& c : region) {
        int nz = -1;
        bool single = true;
        for (int j = 0; j < n; ++j)
            if (c.coeffs[j] != 0.0) {
                if (nz >= 0) {
                    single = false;
                    break;
                }
                nz = j;
            }
        if (!single || nz < 0) continue;
        double a = c.coeffs[nz], r = c.rhs / a;
        bool upper = (c.rel == Relation::Le || c.rel == Relation::Lt) == (a > 0);
        if (c.rel == Relation::Eq) {
            box[nz].first = std::max(box[nz].first, r);
            box[nz].second = std::min(box[nz].second, r);
        } else if (upper) {
            box[nz].second = std::min(box[nz].second, r);
        } else {
            box[nz].first = std::max(box[nz].first, r);
        }
    }
    return box;
}

// Interval pre-pass: per-neuron forced phases under the input box. Only run
// when every dimension is bounded.
inline std::vector<std::vector<std::optional<Status>>> forced_phases(const Network& net,
                                                                     const Bounds& box) {
    std::vector<std::vector<std::optional<Status>>> forced(net.hidden_layers());
    for (int l = 1; l <= net.hidden_layers(); ++l) forced[l - 1].resize(net.width(l));
    for (auto [lo, hi] : box)
        if (!std::isfinite(lo) || !std::isfinite(hi)) return forced;
    Vec lo(box.size()), hi(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) {
        lo[i] = box[i].first;
        hi[i] = box[i].second;
    }
    for (int l = 1; l <= net.hidden_layers(); ++l) {
        const Layer& L = net.layer(l);
        Vec nlo(L.weights.size()), nhi(L.weights.size());
        forced[l - 1].resize(L.weights.size());
        for (std::size_t i = 0; i < L.weights.size(); ++i) {
            double a = L.bias[i], b = L.bias[i];
            for (std::size_t j = 0; j < lo.size(); ++j) {
                double w = L.weights[i][j];
                if (w >= 0) {
                    a += w * lo[j];
                    b += w * hi[j];
                } else {
                    a += w * hi[j];
                    b += w * lo[j];
                }
            }
            if (a > 0)
                forced[l - 1][i] = Status::On;
            else if (b <= 0)
                forced[l - 1][i] = Status::Off;
            nlo[i] = std::max(0.0, a);
            nhi[i] = std::max(0.0, b);
        }
        lo = std::move(nlo);
        hi = std::move(nhi);
    }
    return forced;
}

struct SearchContext {
    const Network& net;
    const DecisionPattern& pattern;
    const InputRegion& region;
    // Extra constraints over the outputs, applied through the leaf's output
    // affine forms (e.g. one disjunct of the negated postcondition).
    const std::vector<LinearConstraint>& output_rows;
    const Budget& budget;
    // Accepts or rejects a candidate point found at a feasible leaf.
    const std::function<bool(const Vec&)>& accept;
    SearchStats& stats;
    std::chrono::steady_clock::time_point start;
    std::vector<std::vector<std::optional<Status>>> forced;
    std::optional<ActivationSignature> warm;
    bool timed_out = false;
    std::optional<Vec> found;

    bool over_budget() {
        if (stats.nodes > budget.max_nodes) return timed_out = true;
        double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return el > budget.timeout_secs ? timed_out = true : false;
    }
};

// Feasibility of the closed prefix through `upto` layers plus the region; when
// at_leaf, the output rows are added through the output affine forms.
inline LpOutcome node_lp(SearchContext& ctx, const DecisionPattern& assign, int upto,
                         bool at_leaf) {
    const Network& net = ctx.net;
    int n = net.input_dim();
    Propagation prop = propagate(net, assign, upto);
    LinearProgram lp;
    lp.num_vars = n;
    if (net.input_domain()) lp.var_bounds = *net.input_domain();
    for (int l = 1; l <= upto; ++l)
        for (int i = 0; i < static_cast<int>(prop.forms[l - 1].size()); ++i) {
            const AffineForm& f = prop.forms[l - 1][i];
            if (*assign.at({l, i}) == Status::On)
                lp.add(f.w, Relation::Gt, -f.b);
            else
                lp.add(f.w, Relation::Le, -f.b);
        }
    for (const auto& c : ctx.region) lp.add(c.coeffs, c.rel, c.rhs);
    if (at_leaf) {
        for (const auto& row : ctx.output_rows) {
            // row over outputs y = C x + d  ->  (row.C) x  rel  rhs - row.d
            Vec w(n, 0.0);
            double d = 0.0;
            for (std::size_t k = 0; k < row.coeffs.size(); ++k) {
                double c = row.coeffs[k];
                if (c == 0.0) continue;
                const AffineForm& f = prop.outputs[k];
                for (int j = 0; j < n; ++j) w[j] += c * f.w[j];
                d += c * f.b;
            }
            lp.add(std::move(w), row.rel, row.rhs - d);
        }
    }
    ++ctx.stats.lp_calls;
    return solve(lp);
}

// Depth-first over free phases, layer-major, neuron index ascending. Returns
// true when an accepted point was found.
inline bool search_layer(SearchContext& ctx, DecisionPattern& assign, int layer) {
    const Network& net = ctx.net;
    if (ctx.over_budget()) return false;
    ++ctx.stats.nodes;
    if (layer > net.hidden_layers()) {
        LpOutcome out = node_lp(ctx, assign, net.hidden_layers(), true);
        if (out.status == LpStatus::NumericFailure) throw Error("lp: numeric failure");
        if (!out.feasible()) return false;
        if (ctx.accept(out.point)) {
            ctx.found = out.point;
            return true;
        }
        ++ctx.stats.near_misses;
        return false;
    }

    int width = net.width(layer);
    // Determine per-neuron choices for this layer.
    std::vector<std::vector<Status>> choices(width);
    for (int i = 0; i < width; ++i) {
        NeuronId id{layer, i};
        if (auto s = ctx.pattern.at(id)) {
            if (auto f = ctx.forced[layer - 1][i]; f && *f != *s) return false;  // empty region
            choices[i] = {*s};
        } else if (auto f = ctx.forced[layer - 1][i]) {
            choices[i] = {*f};
        } else if (ctx.warm) {
            Status w = ctx.warm->at(id);
            choices[i] = {w, flip(w)};
        } else {
            choices[i] = {Status::On, Status::Off};
        }
    }
    // Enumerate this layer's combinations recursively (index ascending).
    std::function<bool(int)> pick = [&](int i) -> bool {
        if (ctx.timed_out) return false;
        if (i == width) {
            LpOutcome out = node_lp(ctx, assign, layer, false);
            if (out.status == LpStatus::NumericFailure) throw Error("lp: numeric failure");
            if (!out.feasible()) return false;
            return search_layer(ctx, assign, layer + 1);
        }
        for (Status s : choices[i]) {
            assign.set({layer, i}, s);
            if (pick(i + 1)) return true;
        }
        assign.erase({layer, i});
        return false;
    };
    return pick(0);
}

struct SatResult {
    bool timed_out = false;
    std::optional<Vec> point;
};

// Satisfiability of pattern /\ region /\ output_rows over the network, by
// branch and bound over unconstrained ReLU phases.
inline SatResult find_satisfying(const Network& net, const DecisionPattern& pattern,
                                 const InputRegion& region,
                                 const std::vector<LinearConstraint>& output_rows,
                                 const Budget& budget, SearchStats& stats,
                                 const std::function<bool(const Vec&)>& accept,
                                 const std::optional<Vec>& witness = std::nullopt) {
    check_pattern(net, pattern);
    SearchContext ctx{net,   pattern, region, output_rows, budget,
                      accept, stats,  std::chrono::steady_clock::now()};
    ctx.forced = forced_phases(net, effective_box(net, region));
    if (witness) ctx.warm = activation_signature(net, *witness);
    DecisionPattern assign;
    bool found = search_layer(ctx, assign, 1);
    SatResult res;
    res.timed_out = ctx.timed_out && !found;
    if (found) res.point = ctx.found;
    return res;
}

}  // namespace vdetail

// The disjuncts of the negated postcondition, each a conjunction of linear
// rows over the outputs. Prediction ties resolve to the lowest class index:
// for c' < c the violation is y_c' >= y_c, for c' > c it is strict.
inline std::vector<std::vector<LinearConstraint>> negated_post(const Postcondition& post,
                                                               int output_dim) {
    std::vector<std::vector<LinearConstraint>> disjuncts;
    if (post.is_prediction()) {
        int c = post.target_class();
        double sign = post.mode() == PredictionMode::ArgMax ? 1.0 : -1.0;
        for (int other = 0; other < output_dim; ++other) {
            if (other == c) continue;
            Vec coeffs(output_dim, 0.0);
            coeffs[other] = sign;
            coeffs[c] = -sign;
            Relation rel = other < c ? Relation::Ge : Relation::Gt;
            disjuncts.push_back({{std::move(coeffs), rel, 0.0}});
        }
    } else {
        for (const auto& row : post.rows()) {
            switch (row.rel) {
                case Relation::Le:
                    disjuncts.push_back({{row.coeffs, Relation::Gt, row.rhs}});
                    break;
                case Relation::Lt:
                    disjuncts.push_back({{row.coeffs, Relation::Ge, row.rhs}});
                    break;
                case Relation::Eq:
                    disjuncts.push_back({{row.coeffs, Relation::Gt, row.rhs}});
                    disjuncts.push_back({{row.coeffs, Relation::Lt, row.rhs}});
                    break;
                default:
                    throw Error("postcondition rows must use <=, < or =");
            }
        }
    }
    return disjuncts;
}

// DP(A, B): prove forall X: pattern(X) /\ region(X) => post(F(X)) by refuting
// satisfiability of A /\ !B, one negated-post disjunct at a time.
inline Verdict dp(const Network& net, const Query& q, const Budget& budget = {}) {
    check_pattern(net, q.pattern);
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    auto accept = [&](const Vec& x) {
        if (!satisfies(net, q.pattern, x)) return false;
        if (!region_holds(q.input_region, x)) return false;
        return !q.post.holds(evaluate(net, x));
    };
    bool timed_out = false;
    for (const auto& disjunct : negated_post(q.post, net.output_dim())) {
        vdetail::SatResult res = vdetail::find_satisfying(net, q.pattern, q.input_region, disjunct,
                                                          budget, v.stats, accept, q.witness);
        if (res.point) {
            v.status = VerdictStatus::Refuted;
            v.counterexample = *res.point;
            v.output = evaluate(net, v.counterexample);
            v.stats.wall_secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return v;
        }
        if (res.timed_out) timed_out = true;
    }
    v.status = timed_out ? VerdictStatus::Timeout : VerdictStatus::Proved;
    v.stats.wall_secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return v;
}

// DP for a single-layer pattern: identical search, with every neuron outside
// the layer left to branch and bound.
inline Verdict dp_layer(const Network& net, const DecisionPattern& sigma_l,
                        const Postcondition& post, const Budget& budget = {},
                        const InputRegion& region = {}) {
    Query q;
    q.pattern = sigma_l;
    q.post = post;
    q.input_region = region;
    return dp(net, q, budget);
}

// Satisfiability of pattern /\ region alone; used for negated-pattern checks.
inline std::optional<Vec> find_model(const Network& net, const DecisionPattern& pattern,
                                     const InputRegion& region, const Budget& budget,
                                     SearchStats& stats, bool& timed_out) {
    auto accept = [&](const Vec& x) {
        return satisfies(net, pattern, x) && region_holds(region, x);
    };
    vdetail::SatResult res =
        vdetail::find_satisfying(net, pattern, region, {}, budget, stats, accept);
    if (res.timed_out) timed_out = true;
    return res.point;
}

// Check region => sigma(X) by refuting region /\ !sigma: the negation is the
// disjunction, over constrained neurons, of the flipped phase.
inline Verdict prove_region_implies_pattern(const Network& net, const InputRegion& region,
                                            const DecisionPattern& sigma,
                                            const Budget& budget = {}) {
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    bool timed_out = false;
    for (const auto& [id, s] : sigma.constraints()) {
        DecisionPattern flipped;
        flipped.set(id, flip(s));
        auto cex = find_model(net, flipped, region, budget, v.stats, timed_out);
        if (cex) {
            v.status = VerdictStatus::Refuted;
            v.counterexample = *cex;
            v.output = evaluate(net, v.counterexample);
            v.stats.wall_secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return v;
        }
    }
    v.status = timed_out ? VerdictStatus::Timeout : VerdictStatus::Proved;
    v.stats.wall_secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return v;
}

inline const char* to_string(VerdictStatus s) {
    switch (s) {
        case VerdictStatus::Proved: return "proved";
        case VerdictStatus::Refuted: return "refuted";
        case VerdictStatus::Timeout: return "timeout";
    }
    return "?";
}

inline nlohmann::ordered_json verdict_to_json(const Verdict& v) {
    nlohmann::ordered_json j;
    j["status"] = to_string(v.status);
    if (v.status == VerdictStatus::Refuted) {
        j["counterexample"] = v.counterexample;
        j["output"] = v.output;
    }
    j["stats"]["nodes"] = v.stats.nodes;
    j["stats"]["lp_calls"] = v.stats.lp_calls;
    j["stats"]["near_misses"] = v.stats.near_misses;
    return j;
}

}  // namespace relupat
