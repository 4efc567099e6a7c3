#pragma once

#include <map>
#include <vector>

#include <json.hpp>

#include "relupat/lp.hpp"
#include "relupat/verify.hpp"

namespace relupat {

struct BoxResult {
    bool empty = true;  // EmptyBox when the polytope admits no box at all
    Bounds box;
};

// Widest under-approximation box of a closed pattern's region. Seed bounds are
// the per-attribute min/max over the support inputs, falling back to the
// network input domain when the support is empty.
inline BoxResult under_approx_box(const Network& net, const DecisionPattern& sigma,
                                  const std::vector<Vec>& support_inputs) {
    if (!is_closed(net, sigma)) throw Error("under_approx_box: pattern is not closed");
    for (const Vec& s : support_inputs)
        if (!satisfies(net, sigma, s))
            throw Error("under_approx_box: support input does not satisfy the pattern");
    int n = net.input_dim();
    Bounds seed;
    if (!support_inputs.empty()) {
        seed.assign(n, {kInf, -kInf});
        for (const Vec& s : support_inputs)
            for (int i = 0; i < n; ++i) {
                seed[i].first = std::min(seed[i].first, s[i]);
                seed[i].second = std::max(seed[i].second, s[i]);
            }
    } else if (net.input_domain()) {
        seed = *net.input_domain();
    } else {
        throw Error("under_approx_box: no support inputs and no input domain to seed from");
    }
    Polytope poly = polytope_of(net, sigma);
    MaxBoxResult mb = max_box(poly, seed);
    BoxResult res;
    if (!mb.feasible) return res;
    res.empty = false;
    res.box = std::move(mb.box);
    return res;
}

struct MinimalAssignment {
    std::map<int, double> fixed;  // input index -> value
    std::vector<int> free;
    bool partial = false;  // set when a DP timeout stopped the greedy pass early
};

// Greedy elimination in ascending index order: an index stays free only if the
// remaining equalities plus domain bounds on the freed variables still force
// the pattern, checked through the decision procedure.
inline MinimalAssignment minimal_assignment(const Network& net, const DecisionPattern& sigma,
                                            const Vec& x, const Budget& budget = {}) {
    if (!satisfies(net, sigma, x)) throw Error("minimal_assignment: input violates the pattern");
    if (!net.input_domain()) throw Error("minimal_assignment: network has no input domain");
    int n = net.input_dim();
    const Bounds& domain = *net.input_domain();

    std::vector<bool> freed(n, false);
    auto build_region = [&]() {
        InputRegion region;
        for (int j = 0; j < n; ++j) {
            Vec e(n, 0.0);
            e[j] = 1.0;
            if (freed[j]) {
                region.push_back({e, Relation::Ge, domain[j].first});
                region.push_back({Vec(e), Relation::Le, domain[j].second});
            } else {
                region.push_back({e, Relation::Eq, x[j]});
            }
        }
        return region;
    };

    MinimalAssignment res;
    for (int i = 0; i < n; ++i) {
        freed[i] = true;
        Verdict v = prove_region_implies_pattern(net, build_region(), sigma, budget);
        if (v.status == VerdictStatus::Timeout) {
            freed[i] = false;
            res.partial = true;
            break;
        }
        if (v.status != VerdictStatus::Proved) freed[i] = false;
    }
    for (int i = 0; i < n; ++i) {
        if (freed[i])
            res.free.push_back(i);
        else
            res.fixed[i] = x[i];
    }
    return res;
}

inline nlohmann::ordered_json box_to_json(const BoxResult& b) {
    if (b.empty) return nlohmann::ordered_json{{"empty", true}};
    auto arr = nlohmann::ordered_json::array();
    for (auto [lo, hi] : b.box) arr.push_back({lo, hi});
    return nlohmann::ordered_json{{"empty", false}, {"box", arr}};
}

// Listing style: collapsed dimensions render as "attr = v".
inline std::string box_to_text(const BoxResult& b, const std::vector<std::string>& attr_names) {
    if (b.empty) return "(empty box)";
    std::string out;
    for (std::size_t i = 0; i < b.box.size(); ++i) {
        std::string name =
            i < attr_names.size() ? attr_names[i] : "x" + std::to_string(i);
        auto [lo, hi] = b.box[i];
        if (!out.empty()) out += ", ";
        if (lo == hi)
            out += name + " = " + std::to_string(lo);
        else
            out += std::to_string(lo) + " <= " + name + " <= " + std::to_string(hi);
    }
    return out;
}

inline nlohmann::ordered_json assignment_to_json(const MinimalAssignment& a) {
    nlohmann::ordered_json j;
    auto fixed = nlohmann::ordered_json::array();
    for (const auto& [idx, val] : a.fixed)
        fixed.push_back(nlohmann::ordered_json{{"index", idx}, {"value", val}});
    j["fixed"] = fixed;
    j["free"] = a.free;
    j["partial"] = a.partial;
    return j;
}

}  // namespace relupat
