#pragma once

#include <algorithm>
#include <chrono>
#include <vector>

#include <json.hpp>

#include "relupat/mine.hpp"

namespace relupat {

struct Rule {
    DecisionPattern pattern;  // over the table's layer
    int target_class = 0;
    double validated_accuracy = 0.0;
    int support = 0;
    bool proved = false;
};

struct RuleTable {
    int layer = 0;
    std::vector<Rule> rules;  // descending support, first match wins
    double tau = 0.0;
};

// Admit proved rules and rules at or above the validation threshold; order by
// descending support. Duplicate patterns with conflicting classes keep the
// higher-accuracy rule.
inline RuleTable build_rule_table(const std::vector<MinedPattern>& mined, double tau) {
    RuleTable table;
    table.tau = tau;
    for (const MinedPattern& mp : mined) {
        if (!table.rules.empty() && mp.layer != table.layer)
            throw Error("build_rule_table: mined patterns span multiple layers");
        table.layer = mp.layer;
        bool admit = mp.status == MinedStatus::ProvedByDP ||
                     (mp.status != MinedStatus::Discarded && mp.validated_accuracy >= tau);
        if (!admit) continue;
        Rule r;
        r.pattern = mp.pattern;
        r.target_class = mp.target_class;
        r.validated_accuracy = mp.validated_accuracy;
        r.support = mp.support.count;
        r.proved = mp.status == MinedStatus::ProvedByDP;
        auto dup = std::find_if(table.rules.begin(), table.rules.end(),
                                [&](const Rule& q) { return q.pattern == r.pattern; });
        if (dup != table.rules.end()) {
            if (dup->target_class != r.target_class && r.validated_accuracy > dup->validated_accuracy)
                *dup = r;  // conflicting duplicate: keep the better one
            continue;
        }
        table.rules.push_back(std::move(r));
    }
    std::stable_sort(table.rules.begin(), table.rules.end(),
                     [](const Rule& a, const Rule& b) { return a.support > b.support; });
    return table;
}

struct HybridResult {
    int cls = 0;
    bool shortcut = false;
};

// Run layers 1..l once; the first matching rule answers directly, otherwise the
// forward pass continues from the already computed prefix.
inline HybridResult hybrid_evaluate(const Network& net, const RuleTable& table, const Vec& x,
                                    PredictionMode mode = PredictionMode::ArgMax) {
    int l = table.layer;
    if (table.rules.empty()) {
        Vec y = evaluate(net, x);
        return {predicted_class(y, mode), false};
    }
    if (l < 1 || l > net.hidden_layers()) throw Error("hybrid_evaluate: invalid table layer");
    Vec v = evaluate_prefix(net, x, l);
    for (const Rule& r : table.rules) {
        bool match = true;
        for (const auto& [id, s] : r.pattern.constraints()) {
            Status actual = v[id.index] > 0.0 ? Status::On : Status::Off;
            if (actual != s) {
                match = false;
                break;
            }
        }
        if (match) return {r.target_class, true};
    }
    for (int j = l + 1; j <= net.hidden_layers(); ++j) {
        const Layer& L = net.layer(j);
        Vec next(L.weights.size());
        for (std::size_t i = 0; i < L.weights.size(); ++i)
            next[i] = std::max(0.0, dot(L.weights[i], v) + L.bias[i]);
        v = std::move(next);
    }
    const Layer& out = net.output_layer();
    Vec y(out.weights.size());
    for (std::size_t i = 0; i < out.weights.size(); ++i) y[i] = dot(out.weights[i], v) + out.bias[i];
    return {predicted_class(y, mode), false};
}

struct DistillReport {
    double accuracy_full = 0.0;
    double accuracy_hybrid = 0.0;
    double shortcut_rate = 0.0;
    double time_full_secs = 0.0;
    double time_hybrid_secs = 0.0;
    int mismatches = 0;  // hybrid != full on rule-hit inputs
};

// Median-of-repeats wall-clock over whole-dataset passes, single worker.
inline DistillReport benchmark(const Network& net, const RuleTable& table, const Dataset& test,
                               int repeats = 10, PredictionMode mode = PredictionMode::ArgMax) {
    if (!test.labeled()) throw Error("benchmark: test set must be labeled");
    DistillReport rep;
    int n = static_cast<int>(test.inputs.size());
    if (n == 0) return rep;

    std::vector<int> full_cls(n), hybrid_cls(n);
    std::vector<bool> hit(n, false);

    auto time_passes = [&](auto&& body) {
        std::vector<double> times;
        for (int r = 0; r < repeats; ++r) {
            auto t0 = std::chrono::steady_clock::now();
            body();
            times.push_back(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        std::sort(times.begin(), times.end());
        return times[times.size() / 2];
    };

    rep.time_full_secs = time_passes([&]() {
        for (int i = 0; i < n; ++i)
            full_cls[i] = predicted_class(evaluate(net, test.inputs[i]), mode);
    });
    rep.time_hybrid_secs = time_passes([&]() {
        for (int i = 0; i < n; ++i) {
            HybridResult h = hybrid_evaluate(net, table, test.inputs[i], mode);
            hybrid_cls[i] = h.cls;
            hit[i] = h.shortcut;
        }
    });

    int full_ok = 0, hybrid_ok = 0, hits = 0;
    for (int i = 0; i < n; ++i) {
        if (full_cls[i] == test.labels[i]) ++full_ok;
        if (hybrid_cls[i] == test.labels[i]) ++hybrid_ok;
        if (hit[i]) {
            ++hits;
            if (hybrid_cls[i] != full_cls[i]) ++rep.mismatches;
        }
    }
    rep.accuracy_full = static_cast<double>(full_ok) / n;
    rep.accuracy_hybrid = static_cast<double>(hybrid_ok) / n;
    rep.shortcut_rate = static_cast<double>(hits) / n;
    return rep;
}

inline nlohmann::ordered_json rule_table_to_json(const RuleTable& t) {
    nlohmann::ordered_json j;
    j["layer"] = t.layer;
    j["tau"] = t.tau;
    auto rules = nlohmann::ordered_json::array();
    for (const Rule& r : t.rules) {
        nlohmann::ordered_json jr;
        jr["pattern"] = pattern_to_json(r.pattern);
        jr["class"] = r.target_class;
        jr["validated_accuracy"] = r.validated_accuracy;
        jr["support"] = r.support;
        jr["proved"] = r.proved;
        rules.push_back(jr);
    }
    j["rules"] = rules;
    return j;
}

inline RuleTable rule_table_from_json(const nlohmann::json& j) {
    RuleTable t;
    t.layer = j.at("layer").get<int>();
    t.tau = j.value("tau", 0.0);
    for (const auto& jr : j.at("rules")) {
        Rule r;
        r.pattern = pattern_from_json(jr.at("pattern"));
        r.target_class = jr.at("class").get<int>();
        r.validated_accuracy = jr.value("validated_accuracy", 0.0);
        r.support = jr.value("support", 0);
        r.proved = jr.value("proved", false);
        t.rules.push_back(std::move(r));
    }
    return t;
}

inline nlohmann::ordered_json report_to_json(const DistillReport& r) {
    nlohmann::ordered_json j;
    j["accuracy_full"] = r.accuracy_full;
    j["accuracy_hybrid"] = r.accuracy_hybrid;
    j["shortcut_rate"] = r.shortcut_rate;
    j["time_full_secs"] = r.time_full_secs;
    j["time_hybrid_secs"] = r.time_hybrid_secs;
    j["mismatches"] = r.mismatches;
    return j;
}

}  // namespace relupat
