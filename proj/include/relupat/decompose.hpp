#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "relupat/explain.hpp"
#include "relupat/mine.hpp"
#include "relupat/verify.hpp"

namespace relupat {

enum class PlanStatus { Proved, Incomplete, Refuted };

inline const char* to_string(PlanStatus s) {
    switch (s) {
        case PlanStatus::Proved: return "proved";
        case PlanStatus::Incomplete: return "incomplete";
        case PlanStatus::Refuted: return "refuted";
    }
    return "?";
}

struct Obligation {
    std::string name;
    Verdict verdict;
};

struct ProofPlan {
    InputRegion contract_region;
    Postcondition contract_post = Postcondition::prediction(0);
    MinedPattern interpolant;
    std::vector<Obligation> obligations;
    PlanStatus status = PlanStatus::Incomplete;
    Vec counterexample;  // set when Refuted
    int unchecked_cells = 0;
    // Prefix-cover audit trail: the per-prefix patterns and the residual cells.
    std::vector<DecisionPattern> prefixes;
    std::vector<Bounds> cells;
};

// Candidate interpolant: among layer patterns mined for B's class, the one
// covering the most dataset inputs inside A.
inline MinedPattern select_interpolant(const Network& net, const Dataset& data,
                                       const InputRegion& A, const Postcondition& B,
                                       PredictionMode mode = PredictionMode::ArgMax) {
    (void)mode;
    std::vector<int> inside;
    for (int r = 0; r < static_cast<int>(data.inputs.size()); ++r)
        if (region_holds(A, data.inputs[r])) inside.push_back(r);
    if (inside.empty())
        throw Error("select_interpolant: no dataset input lies inside A; sample the region first");

    std::optional<MinedPattern> best;
    int best_cov = -1;
    auto consider = [&](MinedPattern mp) {
        if (mp.pattern.empty()) return;
        int cov = 0;
        for (int r : inside)
            if (satisfies(net, mp.pattern, data.inputs[r])) ++cov;
        if (cov > best_cov) {
            best_cov = cov;
            best = std::move(mp);
        }
    };
    for (int l = 1; l <= net.hidden_layers(); ++l)
        for (MinedPattern& mp : mine_layer_patterns(net, data, l, MineTarget::boolean(B)))
            consider(std::move(mp));
    // Uniformly labeled data mines to a bare root leaf; fall back to the
    // per-layer status consensus of the supporters inside A.
    if (!best) {
        for (int l = 1; l <= net.hidden_layers(); ++l) {
            MinedPattern mp;
            mp.layer = l;
            mp.target_class = 1;
            ActivationSignature sig0 = activation_signature(net, data.inputs[inside.front()]);
            for (int i = 0; i < net.width(l); ++i) {
                Status s = sig0.at({l, i});
                bool unanimous = true;
                for (int r : inside)
                    if (activation_signature(net, data.inputs[r]).at({l, i}) != s) {
                        unanimous = false;
                        break;
                    }
                if (unanimous) mp.pattern.set({l, i}, s);
            }
            mp.support.count = static_cast<int>(inside.size());
            mp.support.satisfying_indices = inside;
            consider(std::move(mp));
        }
    }
    if (!best) throw Error("select_interpolant: mining produced no candidate pattern");
    return *best;
}

// Decomposition through a layer interpolant: obligation 1 is the layer pattern
// implying B (with counter-example strengthening), obligation 2 is A implying
// the (possibly strengthened) pattern.
inline ProofPlan prove_via_interpolant(const Network& net, const InputRegion& A,
                                       const Postcondition& B, const DecisionPattern& sigma_l,
                                       const Dataset& data, const Budget& budget = {}) {
    ProofPlan plan;
    plan.contract_region = A;
    plan.contract_post = B;
    plan.interpolant.layer = sigma_l.max_layer();
    plan.interpolant.pattern = sigma_l;

    DecisionPattern sigma = sigma_l;
    Verdict ob1 = dp_layer(net, sigma, B, budget);
    if (ob1.status == VerdictStatus::Refuted) {
        std::vector<Vec> supporters;
        for (const Vec& x : data.inputs)
            if (region_holds(A, x) && satisfies(net, sigma, x)) supporters.push_back(x);
        MinedPattern mp;
        mp.layer = sigma.max_layer();
        mp.pattern = sigma;
        mp = refine_with_counterexample(net, mp, ob1.counterexample, supporters, B, budget);
        if (mp.status == MinedStatus::ProvedByDP) {
            sigma = mp.pattern;
            plan.interpolant = mp;
            ob1.status = VerdictStatus::Proved;
        }
    }
    plan.obligations.push_back({"layer_pattern_implies_post", ob1});
    if (ob1.status != VerdictStatus::Proved) {
        plan.status = PlanStatus::Incomplete;  // rule precondition unmet
        return plan;
    }

    Verdict ob2 = prove_region_implies_pattern(net, A, sigma, budget);
    plan.obligations.push_back({"region_implies_layer_pattern", ob2});
    if (ob2.status == VerdictStatus::Proved) {
        plan.status = PlanStatus::Proved;
    } else if (ob2.status == VerdictStatus::Refuted) {
        // A point of A outside the interpolant region; it refutes the contract
        // only when it concretely violates B.
        plan.counterexample = ob2.counterexample;
        plan.status = !B.holds(evaluate(net, ob2.counterexample)) ? PlanStatus::Refuted
                                                                  : PlanStatus::Incomplete;
    } else {
        plan.status = PlanStatus::Incomplete;
    }
    return plan;
}

namespace ddetail {

// Bounding box of A via per-dimension LPs (intersected with the input domain).
inline Bounds region_bounding_box(const Network& net, const InputRegion& A) {
    int n = net.input_dim();
    Bounds box(n, {-kInf, kInf});
    if (net.input_domain()) box = *net.input_domain();
    for (int d = 0; d < n; ++d) {
        for (int dir = 0; dir < 2; ++dir) {
            LinearProgram lp;
            lp.num_vars = n;
            lp.var_bounds = box;
            for (const auto& c : A) lp.add(c.coeffs, c.rel, c.rhs);
            Vec obj(n, 0.0);
            obj[d] = dir == 0 ? -1.0 : 1.0;
            lp.objective = obj;
            LpOutcome out = solve(lp);
            if (out.status == LpStatus::Infeasible)
                throw Error("prefix cover: region A is empty");
            if (out.status == LpStatus::Unbounded)
                throw Error("prefix cover: region A is unbounded in dimension " +
                            std::to_string(d));
            if (!out.feasible()) throw Error("prefix cover: LP failure bounding A");
            if (dir == 0)
                box[d].first = out.point[d];
            else
                box[d].second = out.point[d];
        }
    }
    return box;
}

// Axis-aligned complement: subtract each box from the current cell list,
// splitting a hit cell into up to 2n outside slabs per box.
inline std::vector<Bounds> subtract_boxes(const Bounds& base, const std::vector<Bounds>& boxes,
                                          std::size_t max_cells) {
    std::vector<Bounds> cells{base};
    for (const Bounds& b : boxes) {
        std::vector<Bounds> next;
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            const Bounds& cell = cells[ci];
            bool disjoint = false;
            for (std::size_t d = 0; d < cell.size(); ++d)
                if (b[d].second < cell[d].first || b[d].first > cell[d].second) {
                    disjoint = true;
                    break;
                }
            if (disjoint) {
                next.push_back(cell);
                continue;
            }
            Bounds rest = cell;
            for (std::size_t d = 0; d < cell.size(); ++d) {
                if (b[d].first > rest[d].first) {
                    Bounds slab = rest;
                    slab[d].second = b[d].first;
                    next.push_back(std::move(slab));
                    rest[d].first = b[d].first;
                }
                if (b[d].second < rest[d].second) {
                    Bounds slab = rest;
                    slab[d].first = b[d].second;
                    next.push_back(std::move(slab));
                    rest[d].second = b[d].second;
                }
            }
            // the remaining `rest` lies inside the box and is dropped
            if (next.size() > max_cells) {
                // over budget: keep the untouched cells so the result is still
                // a cover; the caller sees size > max_cells and flags Incomplete
                next.insert(next.end(), cells.begin() + ci + 1, cells.end());
                return next;
            }
        }
        cells = std::move(next);
    }
    return cells;
}

}  // namespace ddetail

// Prefix-cover decomposition: check A /\ sigma_i => B for each distinct
// signature prefix of supporting inputs, then close the residual with
// box-complement cells of A.
inline ProofPlan prove_via_prefix_cover(const Network& net, const InputRegion& A,
                                        const Postcondition& B, const DecisionPattern& sigma_l,
                                        const Dataset& data, const Budget& budget = {},
                                        std::size_t max_cells = 4096) {
    ProofPlan plan;
    plan.contract_region = A;
    plan.contract_post = B;
    plan.interpolant.layer = sigma_l.max_layer();
    plan.interpolant.pattern = sigma_l;
    int l = sigma_l.max_layer();

    // Distinct closed prefixes of inputs in A that satisfy the layer pattern.
    std::vector<DecisionPattern> cov;
    std::vector<std::vector<Vec>> cov_supports;
    for (const Vec& x : data.inputs) {
        if (!region_holds(A, x) || !satisfies(net, sigma_l, x)) continue;
        DecisionPattern prefix =
            DecisionPattern::signature_prefix(activation_signature(net, x), l);
        auto it = std::find(cov.begin(), cov.end(), prefix);
        if (it == cov.end()) {
            cov.push_back(prefix);
            cov_supports.push_back({x});
        } else {
            cov_supports[it - cov.begin()].push_back(x);
        }
    }

    bool all_proved = true;
    for (std::size_t i = 0; i < cov.size(); ++i) {
        Query q;
        q.pattern = cov[i];
        q.input_region = A;
        q.post = B;
        q.witness = cov_supports[i].front();
        Verdict v = dp(net, q, budget);
        plan.obligations.push_back({"prefix_" + std::to_string(i), v});
        if (v.status == VerdictStatus::Refuted) {
            plan.status = PlanStatus::Refuted;
            plan.counterexample = v.counterexample;
            return plan;
        }
        if (v.status != VerdictStatus::Proved) all_proved = false;
    }

    // Residual: A's box minus the union of the prefixes' under-approximation
    // boxes, split into axis-aligned cells.
    std::vector<Bounds> boxes;
    for (std::size_t i = 0; i < cov.size(); ++i) {
        BoxResult b = under_approx_box(net, cov[i], cov_supports[i]);
        if (!b.empty) boxes.push_back(b.box);
    }
    Bounds a_box = ddetail::region_bounding_box(net, A);
    std::vector<Bounds> cells = ddetail::subtract_boxes(a_box, boxes, max_cells);
    plan.prefixes = cov;
    plan.cells = cells;
    if (cells.size() > max_cells) {
        plan.status = PlanStatus::Incomplete;
        plan.unchecked_cells = static_cast<int>(cells.size());
        return plan;
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        Query q;
        q.input_region = A;
        for (const auto& c : region_from_box(cells[i])) q.input_region.push_back(c);
        q.post = B;
        Verdict v = dp(net, q, budget);
        plan.obligations.push_back({"cell_" + std::to_string(i), v});
        if (v.status == VerdictStatus::Refuted) {
            plan.status = PlanStatus::Refuted;
            plan.counterexample = v.counterexample;
            return plan;
        }
        if (v.status != VerdictStatus::Proved) all_proved = false;
    }
    plan.status = all_proved ? PlanStatus::Proved : PlanStatus::Incomplete;
    return plan;
}

inline nlohmann::ordered_json plan_to_json(const ProofPlan& plan) {
    nlohmann::ordered_json j;
    j["status"] = to_string(plan.status);
    j["interpolant"] = mined_to_json(plan.interpolant);
    auto obs = nlohmann::ordered_json::array();
    for (const Obligation& ob : plan.obligations) {
        nlohmann::ordered_json jo;
        jo["name"] = ob.name;
        jo["verdict"] = verdict_to_json(ob.verdict);
        jo["wall_secs"] = ob.verdict.stats.wall_secs;
        obs.push_back(jo);
    }
    j["obligations"] = obs;
    if (plan.status == PlanStatus::Refuted) j["counterexample"] = plan.counterexample;
    if (plan.unchecked_cells > 0) j["unchecked_cells"] = plan.unchecked_cells;
    return j;
}

}  // namespace relupat
