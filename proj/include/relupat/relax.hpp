#pragma once

#include <optional>

#include "relupat/verify.hpp"

namespace relupat {

struct InputProperty {
    DecisionPattern pattern;
    Postcondition post = Postcondition::prediction(0);
    bool proved = false;
    // When proved, the deepest layer whose full unconstraining breaks the
    // implication (0 when even the empty pattern implies the postcondition).
    std::optional<int> critical_layer;
    int dp_calls = 0;
    bool timed_out = false;
};

// Iterative relaxation: start from the activation signature, unconstrain whole
// layers from the back until the implication first fails, restore that layer,
// then drop its neurons one at a time keeping only the necessary ones.
inline InputProperty infer_input_property(const Network& net, const Vec& x,
                                          const Postcondition& post, const Budget& budget = {}) {
    if (!post.holds(evaluate(net, x)))
        throw Error("infer_input_property: input does not satisfy the postcondition");
    InputProperty res;
    res.post = post;

    DecisionPattern sigma = DecisionPattern::from_signature(activation_signature(net, x));
    auto check = [&](const DecisionPattern& p) {
        ++res.dp_calls;
        Query q;
        q.pattern = p;
        q.post = post;
        q.witness = x;
        Verdict v = dp(net, q, budget);
        if (v.status == VerdictStatus::Timeout) {
            res.timed_out = true;
            throw Error("infer_input_property: decision procedure timeout");
        }
        return v.status == VerdictStatus::Proved;
    };

    try {
        if (!check(sigma)) {
            // Fallback: the signature conjoined with the postcondition over the
            // affine outputs is an input property, but carries no DP proof.
            res.pattern = sigma;
            res.proved = false;
            return res;
        }
        int cl = 0;
        DecisionPattern saved = sigma;
        for (int l = net.hidden_layers(); l >= 1; --l) {
            saved = sigma;
            sigma.erase_layer(l);
            if (!check(sigma)) {
                cl = l;
                sigma = saved;  // restore the critical layer
                break;
            }
        }
        if (cl == 0) {
            // Even the empty pattern implies the postcondition.
            res.pattern = sigma;
            res.proved = true;
            res.critical_layer = 0;
            return res;
        }
        for (int i = 0; i < net.width(cl); ++i) {
            DecisionPattern trial = sigma;
            trial.erase({cl, i});
            if (check(trial)) sigma = trial;  // neuron can remain unconstrained
        }
        res.pattern = sigma;
        res.proved = true;
        res.critical_layer = cl;
        return res;
    } catch (const Error&) {
        if (!res.timed_out) throw;
        res.pattern = sigma;
        res.proved = false;
        return res;
    }
}

// Worst-case dp call bound: hidden layer count + max layer width + 1.
inline bool dp_call_count_bound(const Network& net, const InputProperty& result) {
    return result.dp_calls <= net.hidden_layers() + net.max_width() + 1;
}

}  // namespace relupat
