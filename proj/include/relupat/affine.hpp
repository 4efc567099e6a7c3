#pragma once

#include <limits>
#include <optional>
#include <vector>

#include <json.hpp>

#include "relupat/pattern.hpp"
#include "relupat/types.hpp"

namespace relupat {

// w . X + b over the network inputs.
struct AffineForm {
    Vec w;
    double b = 0.0;

    double eval(const Vec& x) const { return dot(w, x) + b; }
};

// Conjunction of strict (w.X + b > 0) and non-strict (w.X + b <= 0) halfspaces,
// optionally intersected with an input box.
struct Polytope {
    std::vector<AffineForm> strict;
    std::vector<AffineForm> nonstrict;
    std::optional<Bounds> box;

    // Membership with a slack tolerance on the constraint values.
    bool contains(const Vec& x, double tol = 0.0) const {
        for (const auto& h : strict)
            if (!(h.eval(x) > -tol)) return false;
        for (const auto& h : nonstrict)
            if (!(h.eval(x) <= tol)) return false;
        if (box)
            for (std::size_t i = 0; i < box->size(); ++i)
                if (x[i] < (*box)[i].first - tol || x[i] > (*box)[i].second + tol) return false;
        return true;
    }

    // Smallest distance of x to any constraint boundary (for boundary exclusion).
    double min_slack(const Vec& x) const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& h : strict) m = std::min(m, std::abs(h.eval(x)));
        for (const auto& h : nonstrict) m = std::min(m, std::abs(h.eval(x)));
        return m;
    }
};

// Result of symbolic propagation under a phase-fixed prefix: per-neuron
// pre-activation forms for layers 1..L, and output forms when L covers every
// hidden layer. Under the pattern, N(X) = relu(forms[l-1][i].eval(X)).
struct Propagation {
    std::vector<std::vector<AffineForm>> forms;
    std::vector<AffineForm> outputs;  // empty unless propagated through all hidden layers
};

// Affine expansion under sigma: Off neurons contribute zero to their
// successors, On neurons contribute their pre-activation form unchanged.
inline Propagation propagate(const Network& net, const DecisionPattern& sigma,
                             int through_layer = -1) {
    int L = through_layer < 0 ? sigma.max_layer() : through_layer;
    if (!is_closed_through(net, sigma, L))
        throw Error("propagate: pattern does not constrain all neurons through layer " +
                    std::to_string(L));
    int n = net.input_dim();
    Propagation res;
    // prev[i] is the affine form of the post-ReLU value of neuron i in the
    // previous layer, as forced by the pattern.
    std::vector<AffineForm> prev(n);
    for (int i = 0; i < n; ++i) {
        prev[i].w.assign(n, 0.0);
        prev[i].w[i] = 1.0;
    }
    for (int l = 1; l <= L; ++l) {
        const Layer& layer = net.layer(l);
        std::vector<AffineForm> pre(layer.weights.size());
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            AffineForm f;
            f.w.assign(n, 0.0);
            f.b = layer.bias[i];
            for (std::size_t p = 0; p < prev.size(); ++p) {
                double wij = layer.weights[i][p];
                if (wij == 0.0) continue;
                for (int d = 0; d < n; ++d) f.w[d] += wij * prev[p].w[d];
                f.b += wij * prev[p].b;
            }
            pre[i] = std::move(f);
        }
        res.forms.push_back(pre);
        std::vector<AffineForm> post(pre.size());
        for (std::size_t i = 0; i < pre.size(); ++i) {
            Status s = *sigma.at({l, static_cast<int>(i)});
            if (s == Status::On) {
                post[i] = pre[i];
            } else {
                post[i].w.assign(n, 0.0);
                post[i].b = 0.0;
            }
        }
        prev = std::move(post);
    }
    if (L == net.hidden_layers()) {
        const Layer& out = net.output_layer();
        for (std::size_t i = 0; i < out.weights.size(); ++i) {
            AffineForm f;
            f.w.assign(n, 0.0);
            f.b = out.bias[i];
            for (std::size_t p = 0; p < prev.size(); ++p) {
                double wij = out.weights[i][p];
                if (wij == 0.0) continue;
                for (int d = 0; d < n; ++d) f.w[d] += wij * prev[p].w[d];
                f.b += wij * prev[p].b;
            }
            res.outputs.push_back(std::move(f));
        }
    }
    return res;
}

// Input-space region of a closed pattern: pre-activation > 0 for On neurons,
// pre-activation <= 0 for Off neurons, plus the input domain box if present.
inline Polytope polytope_of(const Network& net, const DecisionPattern& sigma,
                            int through_layer = -1) {
    int L = through_layer < 0 ? sigma.max_layer() : through_layer;
    Propagation prop = propagate(net, sigma, L);
    Polytope poly;
    for (int l = 1; l <= L; ++l) {
        for (int i = 0; i < static_cast<int>(prop.forms[l - 1].size()); ++i) {
            Status s = *sigma.at({l, i});
            if (s == Status::On)
                poly.strict.push_back(prop.forms[l - 1][i]);
            else
                poly.nonstrict.push_back(prop.forms[l - 1][i]);
        }
    }
    poly.box = net.input_domain();
    return poly;
}

inline nlohmann::ordered_json polytope_to_json(const Polytope& p) {
    nlohmann::ordered_json j;
    auto halfspaces = [](const std::vector<AffineForm>& hs) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& h : hs) {
            nlohmann::ordered_json jh;
            jh["w"] = h.w;
            jh["b"] = h.b;
            arr.push_back(jh);
        }
        return arr;
    };
    j["strict"] = halfspaces(p.strict);
    j["nonstrict"] = halfspaces(p.nonstrict);
    if (p.box) {
        auto arr = nlohmann::ordered_json::array();
        for (auto [lo, hi] : *p.box) arr.push_back({lo, hi});
        j["box"] = arr;
    }
    return j;
}

}  // namespace relupat
