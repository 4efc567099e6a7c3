#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "relupat/data.hpp"
#include "relupat/model.hpp"
#include "relupat/postcondition.hpp"
#include "relupat/types.hpp"

namespace relupat {

// Partial map neuron -> {on, off}. The predicate it defines holds for an input
// when every constrained neuron's concrete status matches.
class DecisionPattern {
public:
    DecisionPattern() = default;

    static DecisionPattern from_signature(const ActivationSignature& sig) {
        DecisionPattern p;
        for (int l = 1; l <= static_cast<int>(sig.status.size()); ++l)
            for (int i = 0; i < static_cast<int>(sig.status[l - 1].size()); ++i)
                p.set({l, i}, sig.status[l - 1][i]);
        return p;
    }

    // Signature restricted to layers 1..upto (a closed prefix).
    static DecisionPattern signature_prefix(const ActivationSignature& sig, int upto) {
        DecisionPattern p;
        for (int l = 1; l <= upto && l <= static_cast<int>(sig.status.size()); ++l)
            for (int i = 0; i < static_cast<int>(sig.status[l - 1].size()); ++i)
                p.set({l, i}, sig.status[l - 1][i]);
        return p;
    }

    void set(NeuronId id, Status s) { constraints_[id] = s; }
    void erase(NeuronId id) { constraints_.erase(id); }

    void erase_layer(int layer) {
        for (auto it = constraints_.begin(); it != constraints_.end();)
            it = it->first.layer == layer ? constraints_.erase(it) : std::next(it);
    }

    std::optional<Status> at(NeuronId id) const {
        auto it = constraints_.find(id);
        if (it == constraints_.end()) return std::nullopt;
        return it->second;
    }

    bool empty() const { return constraints_.empty(); }
    std::size_t size() const { return constraints_.size(); }
    const std::map<NeuronId, Status>& constraints() const { return constraints_; }

    int max_layer() const {
        return constraints_.empty() ? 0 : constraints_.rbegin()->first.layer;
    }
    int min_layer() const {
        return constraints_.empty() ? 0 : constraints_.begin()->first.layer;
    }

    DecisionPattern restrict_to_layer(int layer) const {
        DecisionPattern p;
        for (const auto& [id, s] : constraints_)
            if (id.layer == layer) p.set(id, s);
        return p;
    }

    bool constrains_single_layer() const {
        return !constraints_.empty() && min_layer() == max_layer();
    }

    // Union of two patterns; conflicting statuses are an error.
    DecisionPattern merged_with(const DecisionPattern& other) const {
        DecisionPattern p = *this;
        for (const auto& [id, s] : other.constraints_) {
            auto prev = p.at(id);
            if (prev && *prev != s)
                throw Error("pattern union: conflicting status for neuron (" +
                            std::to_string(id.layer) + "," + std::to_string(id.index) + ")");
            p.set(id, s);
        }
        return p;
    }

    bool operator==(const DecisionPattern& other) const {
        return constraints_ == other.constraints_;
    }

private:
    std::map<NeuronId, Status> constraints_;
};

inline void check_pattern(const Network& net, const DecisionPattern& sigma) {
    for (const auto& [id, s] : sigma.constraints()) {
        (void)s;
        if (!net.valid_neuron(id))
            throw Error("pattern references neuron (" + std::to_string(id.layer) + "," +
                        std::to_string(id.index) + ") absent from the network");
    }
}

inline bool satisfies(const Network& net, const DecisionPattern& sigma, const Vec& x) {
    check_pattern(net, sigma);
    if (sigma.empty()) return true;
    ActivationSignature sig = activation_signature(net, x);
    for (const auto& [id, s] : sigma.constraints())
        if (sig.at(id) != s) return false;
    return true;
}

// In a fully connected net, feeds(N) is every hidden neuron in a strictly
// earlier layer, so closure means: all layers below the deepest constrained
// layer are fully constrained, and every non-frontier layer is full.
inline bool is_closed(const Network& net, const DecisionPattern& sigma) {
    check_pattern(net, sigma);
    if (sigma.empty()) return true;
    int deepest = sigma.max_layer();
    for (int l = 1; l < deepest; ++l)
        for (int i = 0; i < net.width(l); ++i)
            if (!sigma.at({l, i})) return false;
    return true;
}

// Closed through every layer 1..upto (every neuron of those layers constrained).
inline bool is_closed_through(const Network& net, const DecisionPattern& sigma, int upto) {
    for (int l = 1; l <= upto; ++l)
        for (int i = 0; i < net.width(l); ++i)
            if (!sigma.at({l, i})) return false;
    return true;
}

struct SupportStats {
    int count = 0;
    std::vector<int> satisfying_indices;
    std::optional<double> purity;  // defined only when count > 0
};

inline SupportStats support(const Network& net, const DecisionPattern& sigma, const Dataset& data,
                            const Postcondition& post) {
    SupportStats st;
    int good = 0;
    for (int r = 0; r < static_cast<int>(data.inputs.size()); ++r) {
        if (!satisfies(net, sigma, data.inputs[r])) continue;
        st.satisfying_indices.push_back(r);
        if (post.holds(evaluate(net, data.inputs[r]))) ++good;
    }
    st.count = static_cast<int>(st.satisfying_indices.size());
    if (st.count > 0) st.purity = static_cast<double>(good) / st.count;
    return st;
}

// Extend a layer pattern with the statuses of all feeding layers taken from a
// witness input; the result is a closed prefix through the pattern's layer.
inline DecisionPattern prefix_extension(const Network& net, const DecisionPattern& sigma_l,
                                        const Vec& x) {
    if (!satisfies(net, sigma_l, x))
        throw Error("prefix_extension: witness does not satisfy the pattern");
    int l = sigma_l.max_layer();
    ActivationSignature sig = activation_signature(net, x);
    DecisionPattern out = sigma_l;
    for (int j = 1; j < l; ++j)
        for (int i = 0; i < net.width(j); ++i)
            if (!out.at({j, i})) out.set({j, i}, sig.at({j, i}));
    return out;
}

// ---- JSON: sorted list of {"layer", "index", "status"} ----

inline nlohmann::ordered_json pattern_to_json(const DecisionPattern& sigma) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [id, s] : sigma.constraints()) {
        nlohmann::ordered_json je;
        je["layer"] = id.layer;
        je["index"] = id.index;
        je["status"] = to_string(s);
        arr.push_back(je);
    }
    return arr;
}

inline DecisionPattern pattern_from_json(const nlohmann::json& j) {
    DecisionPattern p;
    for (const auto& je : j) {
        NeuronId id{je.at("layer").get<int>(), je.at("index").get<int>()};
        std::string s = je.at("status").get<std::string>();
        if (s != "on" && s != "off") throw Error("pattern JSON: status must be 'on' or 'off'");
        if (p.at(id)) throw Error("pattern JSON: duplicate neuron entry");
        p.set(id, s == "on" ? Status::On : Status::Off);
    }
    return p;
}

}  // namespace relupat
