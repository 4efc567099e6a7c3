#pragma once

#include <random>
#include <vector>

#include "relupat/lp.hpp"
#include "relupat/verify.hpp"

namespace relupat {

// Independent brute-force reference for dp on desk-scale networks: enumerate
// every total phase assignment consistent with the pattern, decide each closed
// case with one LP per negated-post disjunct, and cross-check candidate points
// concretely. No pruning, no interval pre-pass, no warm start.
constexpr int kOracleMaxHidden = 12;

inline Verdict oracle_dp(const Network& net, const Query& q,
                         double boundary_tol = 1e-9) {
    if (net.total_hidden() > kOracleMaxHidden)
        throw Error("oracle: network exceeds " + std::to_string(kOracleMaxHidden) +
                    " hidden neurons");
    check_pattern(net, q.pattern);

    std::vector<NeuronId> free_ids;
    for (int l = 1; l <= net.hidden_layers(); ++l)
        for (int i = 0; i < net.width(l); ++i)
            if (!q.pattern.at({l, i})) free_ids.push_back({l, i});

    auto accept = [&](const Vec& x) {
        if (!satisfies(net, q.pattern, x)) return false;
        if (!region_holds(q.input_region, x, boundary_tol)) return false;
        return !q.post.holds(evaluate(net, x));
    };

    Verdict v;
    auto disjuncts = negated_post(q.post, net.output_dim());
    std::uint64_t combos = std::uint64_t{1} << free_ids.size();
    for (std::uint64_t mask = 0; mask < combos; ++mask) {
        DecisionPattern total = q.pattern;
        for (std::size_t f = 0; f < free_ids.size(); ++f)
            total.set(free_ids[f], (mask >> f) & 1 ? Status::On : Status::Off);

        Propagation prop = propagate(net, total, net.hidden_layers());
        int n = net.input_dim();
        for (const auto& rows : disjuncts) {
            LinearProgram lp;
            lp.num_vars = n;
            if (net.input_domain()) lp.var_bounds = *net.input_domain();
            for (int l = 1; l <= net.hidden_layers(); ++l)
                for (int i = 0; i < static_cast<int>(prop.forms[l - 1].size()); ++i) {
                    const AffineForm& f = prop.forms[l - 1][i];
                    if (*total.at({l, i}) == Status::On)
                        lp.add(f.w, Relation::Gt, -f.b);
                    else
                        lp.add(f.w, Relation::Le, -f.b);
                }
            for (const auto& c : q.input_region) lp.add(c.coeffs, c.rel, c.rhs);
            for (const auto& row : rows) {
                Vec w(n, 0.0);
                double d = 0.0;
                for (std::size_t k = 0; k < row.coeffs.size(); ++k) {
                    if (row.coeffs[k] == 0.0) continue;
                    const AffineForm& f = prop.outputs[k];
                    for (int j = 0; j < n; ++j) w[j] += row.coeffs[k] * f.w[j];
                    d += row.coeffs[k] * f.b;
                }
                lp.add(std::move(w), row.rel, row.rhs - d);
            }
            ++v.stats.lp_calls;
            LpOutcome out = solve(lp);
            if (out.feasible() && accept(out.point)) {
                v.status = VerdictStatus::Refuted;
                v.counterexample = out.point;
                v.output = evaluate(net, out.point);
                return v;
            }
        }
    }
    v.status = VerdictStatus::Proved;
    return v;
}

// Sampling-only refuter: random points within the effective input box; can
// only ever strengthen a Refuted verdict, never a Proved one.
inline std::optional<Vec> oracle_sample_refute(const Network& net, const Query& q,
                                               std::mt19937& rng, int samples = 2000) {
    Bounds box(net.input_dim(), {-1.0, 1.0});
    if (net.input_domain()) box = *net.input_domain();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vec x(net.input_dim());
    for (int s = 0; s < samples; ++s) {
        for (int j = 0; j < net.input_dim(); ++j) {
            auto [lo, hi] = box[j];
            if (!std::isfinite(lo)) lo = -10.0;
            if (!std::isfinite(hi)) hi = 10.0;
            x[j] = lo + (hi - lo) * unit(rng);
        }
        if (!satisfies(net, q.pattern, x)) continue;
        if (!region_holds(q.input_region, x)) continue;
        if (!q.post.holds(evaluate(net, x))) return x;
    }
    return std::nullopt;
}

// ---- random instance generation (seeded, for oracle agreement runs) ----

inline Network random_network(std::mt19937& rng, int input_dim,
                              const std::vector<int>& hidden_widths, int output_dim,
                              double domain_half_width = 2.0) {
    std::uniform_real_distribution<double> wdist(-1.0, 1.0);
    std::vector<Layer> layers;
    int cols = input_dim;
    std::vector<int> widths = hidden_widths;
    widths.push_back(output_dim);
    for (int w : widths) {
        Layer L;
        for (int i = 0; i < w; ++i) {
            Vec row(cols);
            for (double& v : row) v = wdist(rng);
            L.weights.push_back(std::move(row));
            L.bias.push_back(wdist(rng));
        }
        layers.push_back(std::move(L));
        cols = w;
    }
    Bounds domain(input_dim, {-domain_half_width, domain_half_width});
    return Network(input_dim, output_dim, std::move(layers), domain);
}

inline DecisionPattern random_pattern(std::mt19937& rng, const Network& net, double density) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    DecisionPattern p;
    for (int l = 1; l <= net.hidden_layers(); ++l)
        for (int i = 0; i < net.width(l); ++i)
            if (unit(rng) < density)
                p.set({l, i}, unit(rng) < 0.5 ? Status::On : Status::Off);
    return p;
}

// Closed pattern from a random input's activation signature, cut at a random depth.
inline DecisionPattern random_closed_pattern(std::mt19937& rng, const Network& net) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Bounds box = net.input_domain() ? *net.input_domain() : Bounds(net.input_dim(), {-2.0, 2.0});
    Vec x(net.input_dim());
    for (int j = 0; j < net.input_dim(); ++j)
        x[j] = box[j].first + (box[j].second - box[j].first) * unit(rng);
    std::uniform_int_distribution<int> depth(1, net.hidden_layers());
    return DecisionPattern::signature_prefix(activation_signature(net, x), depth(rng));
}

inline Postcondition random_post(std::mt19937& rng, int output_dim) {
    std::uniform_int_distribution<int> cls(0, output_dim - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < 0.7) return Postcondition::prediction(cls(rng));
    std::uniform_real_distribution<double> cdist(-1.0, 1.0);
    std::vector<LinearConstraint> rows;
    int n_rows = unit(rng) < 0.5 ? 1 : 2;
    for (int r = 0; r < n_rows; ++r) {
        Vec coeffs(output_dim);
        for (double& c : coeffs) c = cdist(rng);
        rows.push_back({std::move(coeffs), Relation::Le, 4.0 * cdist(rng)});
    }
    return Postcondition::linear(std::move(rows));
}

struct OracleReport {
    int instances = 0;
    int agreements = 0;
    int cex_validated = 0;
    std::vector<int> disagreeing;  // instance indices
};

// Agreement run between dp and the brute-force oracle on random queries
// against one network.
inline OracleReport oracle_agreement(const Network& net, std::mt19937& rng, int trials,
                                     const Budget& budget = {}) {
    OracleReport rep;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        Query q;
        q.pattern = random_pattern(rng, net, unit(rng) * 0.6);
        q.post = random_post(rng, net.output_dim());
        Verdict got = dp(net, q, budget);
        Verdict want = oracle_dp(net, q);
        ++rep.instances;
        bool agree = got.status == want.status;
        if (got.status == VerdictStatus::Refuted) {
            bool valid = satisfies(net, q.pattern, got.counterexample) &&
                         region_holds(q.input_region, got.counterexample) &&
                         !q.post.holds(evaluate(net, got.counterexample));
            if (valid) ++rep.cex_validated;
            agree = agree && valid;
        }
        if (agree)
            ++rep.agreements;
        else
            rep.disagreeing.push_back(t);
    }
    return rep;
}

}  // namespace relupat
