#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include <json.hpp>

#include "relupat/pattern.hpp"
#include "relupat/verify.hpp"

namespace relupat {

enum class MinedStatus { Candidate, EmpiricallyValid, ProvedByDP, Discarded };

inline const char* to_string(MinedStatus s) {
    switch (s) {
        case MinedStatus::Candidate: return "candidate";
        case MinedStatus::EmpiricallyValid: return "empirically_valid";
        case MinedStatus::ProvedByDP: return "proved";
        case MinedStatus::Discarded: return "discarded";
    }
    return "?";
}

struct MinedPattern {
    int layer = 0;
    DecisionPattern pattern;  // constrains only layer-l neurons
    int target_class = 0;
    SupportStats support;
    double validated_accuracy = 0.0;
    std::optional<double> tau;
    MinedStatus status = MinedStatus::Candidate;
};

// Mining target: either a boolean postcondition or direct multiclass labels.
struct MineTarget {
    std::optional<Postcondition> boolean_post;  // absent -> multiclass
    PredictionMode mode = PredictionMode::ArgMax;
    static MineTarget boolean(Postcondition p) { return {std::move(p)}; }
    static MineTarget multiclass(PredictionMode m = PredictionMode::ArgMax) {
        return {std::nullopt, m};
    }
};

namespace minedetail {

struct TreeNode {
    int feature = -1;  // neuron index within the layer; -1 for leaves
    int label = -1;    // leaf class
    std::unique_ptr<TreeNode> off_child, on_child;
    bool leaf() const { return feature < 0; }
};

inline double entropy(const std::vector<int>& counts, int total) {
    if (total == 0) return 0.0;
    double h = 0.0;
    for (int c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    return h;
}

// Tree growth on binary features with normalized information-gain splits
// (gain ratio). Ties go to the lowest neuron index; growth stops at pure
// nodes, zero best gain, or depth equal to the layer width.
inline std::unique_ptr<TreeNode> grow(const std::vector<std::vector<Status>>& feats,
                                      const std::vector<int>& labels, int num_classes,
                                      const std::vector<int>& rows, std::vector<bool>& used,
                                      int depth, int max_depth) {
    auto node = std::make_unique<TreeNode>();
    std::vector<int> counts(num_classes, 0);
    for (int r : rows) ++counts[labels[r]];
    int majority = 0;
    for (int c = 1; c < num_classes; ++c)
        if (counts[c] > counts[majority]) majority = c;
    node->label = majority;

    bool pure = counts[majority] == static_cast<int>(rows.size());
    if (pure || depth >= max_depth) return node;

    double base = entropy(counts, static_cast<int>(rows.size()));
    int best_feat = -1;
    double best_score = 1e-12;
    int num_feats = static_cast<int>(feats.empty() ? 0 : feats[0].size());
    for (int f = 0; f < num_feats; ++f) {
        if (used[f]) continue;
        std::vector<int> con(num_classes, 0), coff(num_classes, 0);
        int non = 0, noff = 0;
        for (int r : rows) {
            if (feats[r][f] == Status::On) {
                ++con[labels[r]];
                ++non;
            } else {
                ++coff[labels[r]];
                ++noff;
            }
        }
        if (non == 0 || noff == 0) continue;
        double after = (non * entropy(con, non) + noff * entropy(coff, noff)) / rows.size();
        double gain = base - after;
        if (gain <= 1e-12) continue;
        double split_info = entropy({non, noff}, non + noff);
        double score = gain / split_info;
        if (score > best_score + 1e-12) {
            best_score = score;
            best_feat = f;
        }
    }
    if (best_feat < 0) return node;  // zero-gain features: root-only subtree

    std::vector<int> on_rows, off_rows;
    for (int r : rows)
        (feats[r][best_feat] == Status::On ? on_rows : off_rows).push_back(r);
    node->feature = best_feat;
    used[best_feat] = true;
    node->on_child = grow(feats, labels, num_classes, on_rows, used, depth + 1, max_depth);
    node->off_child = grow(feats, labels, num_classes, off_rows, used, depth + 1, max_depth);
    used[best_feat] = false;
    return node;
}

inline void harvest(const TreeNode* node, int layer, DecisionPattern& path,
                    std::vector<std::pair<DecisionPattern, int>>& out) {
    if (node->leaf()) {
        out.emplace_back(path, node->label);
        return;
    }
    path.set({layer, node->feature}, Status::Off);
    harvest(node->off_child.get(), layer, path, out);
    path.set({layer, node->feature}, Status::On);
    harvest(node->on_child.get(), layer, path, out);
    path.erase({layer, node->feature});
}

}  // namespace minedetail

// Learn layer patterns from the statuses of layer-l neurons across a dataset.
// One candidate per pure root-to-leaf path, sorted by descending support.
inline std::vector<MinedPattern> mine_layer_patterns(const Network& net, const Dataset& data,
                                                     int layer, const MineTarget& target) {
    if (layer < 1 || layer > net.hidden_layers()) throw Error("mine: invalid layer");
    if (data.inputs.empty()) throw Error("mine: empty dataset");

    int width = net.width(layer);
    std::vector<std::vector<Status>> feats;
    std::vector<int> labels;
    int num_classes;
    std::vector<Vec> outputs;
    outputs.reserve(data.inputs.size());
    for (const Vec& x : data.inputs) outputs.push_back(evaluate(net, x));
    for (std::size_t r = 0; r < data.inputs.size(); ++r) {
        ActivationSignature sig = activation_signature(net, data.inputs[r]);
        std::vector<Status> row(width);
        for (int i = 0; i < width; ++i) row[i] = sig.at({layer, i});
        feats.push_back(std::move(row));
    }
    if (target.boolean_post) {
        num_classes = 2;
        for (const Vec& y : outputs) labels.push_back(target.boolean_post->holds(y) ? 1 : 0);
    } else {
        num_classes = net.output_dim();
        for (const Vec& y : outputs) labels.push_back(predicted_class(y, target.mode));
    }

    std::vector<int> all_rows(data.inputs.size());
    for (std::size_t r = 0; r < all_rows.size(); ++r) all_rows[r] = static_cast<int>(r);
    std::vector<bool> used(width, false);
    auto root = minedetail::grow(feats, labels, num_classes, all_rows, used, 0, width);

    std::vector<std::pair<DecisionPattern, int>> paths;
    DecisionPattern empty;
    minedetail::harvest(root.get(), layer, empty, paths);

    std::vector<MinedPattern> mined;
    for (auto& [pat, leaf_label] : paths) {
        // Purity check over training rows: every satisfying row must meet the
        // target for the leaf's label.
        std::vector<int> sats;
        int good = 0;
        for (std::size_t r = 0; r < feats.size(); ++r) {
            bool ok = true;
            for (const auto& [id, s] : pat.constraints())
                if (feats[r][id.index] != s) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            sats.push_back(static_cast<int>(r));
            if (labels[r] == leaf_label) ++good;
        }
        if (sats.empty()) continue;
        if (good != static_cast<int>(sats.size())) continue;  // impure, filtered out
        if (target.boolean_post && leaf_label != 1) continue;  // boolean mode: True paths only
        MinedPattern mp;
        mp.layer = layer;
        mp.pattern = pat;
        if (!target.boolean_post)
            mp.target_class = leaf_label;
        else if (target.boolean_post->is_prediction())
            mp.target_class = target.boolean_post->target_class();
        else
            mp.target_class = 1;  // boolean True; no class for linear targets
        mp.support.count = static_cast<int>(sats.size());
        mp.support.satisfying_indices = std::move(sats);
        mp.support.purity = 1.0;
        mined.push_back(std::move(mp));
    }
    std::stable_sort(mined.begin(), mined.end(), [](const MinedPattern& a, const MinedPattern& b) {
        return a.support.count > b.support.count;
    });
    return mined;
}

// Held-out validation against the probabilistic-guarantee threshold tau.
inline MinedPattern validate_empirically(const Network& net, MinedPattern mp,
                                         const Dataset& holdout, double tau,
                                         const Postcondition& post) {
    SupportStats st = support(net, mp.pattern, holdout, post);
    mp.tau = tau;
    if (st.count == 0) {
        // no holdout coverage: stays Candidate
        mp.validated_accuracy = 0.0;
        return mp;
    }
    mp.validated_accuracy = *st.purity;
    if (mp.validated_accuracy >= tau && mp.status != MinedStatus::ProvedByDP)
        mp.status = MinedStatus::EmpiricallyValid;
    return mp;
}

inline MinedPattern validate_empirically(const Network& net, MinedPattern mp,
                                         const Dataset& holdout, double tau,
                                         std::optional<PredictionMode> mode = std::nullopt) {
    Postcondition post =
        Postcondition::prediction(mp.target_class, mode.value_or(PredictionMode::ArgMax));
    return validate_empirically(net, std::move(mp), holdout, tau, post);
}

// Counter-example guided strengthening: first constrain every layer-l neuron
// unanimous across the supporters, then fall back to the full layer signature
// of a single supporter; discard if the pattern still refutes.
inline MinedPattern refine_with_counterexample(const Network& net, MinedPattern mp,
                                               const Vec& /*cex*/,
                                               const std::vector<Vec>& supporters,
                                               const Postcondition& post,
                                               const Budget& budget = {}) {
    if (supporters.empty()) {
        mp.status = MinedStatus::Discarded;
        return mp;
    }
    for (const Vec& s : supporters)
        if (!satisfies(net, mp.pattern, s))
            throw Error("refine: supporter does not satisfy the pattern");

    int layer = mp.layer;
    std::vector<ActivationSignature> sigs;
    sigs.reserve(supporters.size());
    for (const Vec& s : supporters) sigs.push_back(activation_signature(net, s));

    // Stage 1: unanimous statuses across supporters.
    DecisionPattern strengthened = mp.pattern;
    for (int i = 0; i < net.width(layer); ++i) {
        NeuronId id{layer, i};
        if (strengthened.at(id)) continue;
        Status s0 = sigs[0].at(id);
        bool unanimous = true;
        for (const auto& sig : sigs)
            if (sig.at(id) != s0) {
                unanimous = false;
                break;
            }
        if (unanimous) strengthened.set(id, s0);
    }
    Verdict v = dp_layer(net, strengthened, post, budget);
    if (v.status == VerdictStatus::Proved) {
        mp.pattern = strengthened;
        mp.status = MinedStatus::ProvedByDP;
        return mp;
    }

    // Stage 2: the full layer signature of the first supporter.
    DecisionPattern full = mp.pattern;
    for (int i = 0; i < net.width(layer); ++i) {
        NeuronId id{layer, i};
        full.set(id, sigs[0].at(id));
    }
    v = dp_layer(net, full, post, budget);
    if (v.status == VerdictStatus::Proved) {
        mp.pattern = full;
        mp.status = MinedStatus::ProvedByDP;
        return mp;
    }
    mp.status = MinedStatus::Discarded;
    return mp;
}

// Alternative refinement: fold each counterexample back into the data and
// re-learn, up to `max_rounds` rounds, proving the best candidate each time.
inline MinedPattern refine_by_retraining(const Network& net, MinedPattern mp, const Vec& cex,
                                         Dataset data, const MineTarget& target,
                                         const Postcondition& post, const Budget& budget = {},
                                         int max_rounds = 3) {
    Vec current = cex;
    for (int round = 0; round < max_rounds; ++round) {
        data.inputs.push_back(current);
        auto mined = mine_layer_patterns(net, data, mp.layer, target);
        auto it = std::find_if(mined.begin(), mined.end(), [&](const MinedPattern& c) {
            return c.target_class == mp.target_class;
        });
        if (it == mined.end()) break;
        Verdict v = dp_layer(net, it->pattern, post, budget);
        if (v.status == VerdictStatus::Proved) {
            it->status = MinedStatus::ProvedByDP;
            return *it;
        }
        if (v.status != VerdictStatus::Refuted) break;
        current = v.counterexample;
    }
    mp.status = MinedStatus::Discarded;
    return mp;
}

inline nlohmann::ordered_json mined_to_json(const MinedPattern& mp) {
    nlohmann::ordered_json j;
    j["layer"] = mp.layer;
    j["pattern"] = pattern_to_json(mp.pattern);
    j["class"] = mp.target_class;
    j["support"] = mp.support.count;
    if (mp.support.purity) j["purity"] = *mp.support.purity;
    j["validated_accuracy"] = mp.validated_accuracy;
    if (mp.tau) j["tau"] = *mp.tau;
    j["status"] = to_string(mp.status);
    return j;
}

inline MinedPattern mined_from_json(const nlohmann::json& j) {
    MinedPattern mp;
    mp.layer = j.at("layer").get<int>();
    mp.pattern = pattern_from_json(j.at("pattern"));
    mp.target_class = j.at("class").get<int>();
    mp.support.count = j.value("support", 0);
    if (j.contains("purity")) mp.support.purity = j["purity"].get<double>();
    mp.validated_accuracy = j.value("validated_accuracy", 0.0);
    if (j.contains("tau")) mp.tau = j["tau"].get<double>();
    std::string st = j.value("status", "candidate");
    if (st == "proved")
        mp.status = MinedStatus::ProvedByDP;
    else if (st == "empirically_valid")
        mp.status = MinedStatus::EmpiricallyValid;
    else if (st == "discarded")
        mp.status = MinedStatus::Discarded;
    return mp;
}

}  // namespace relupat
