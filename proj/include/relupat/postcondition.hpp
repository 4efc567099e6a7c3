#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "relupat/types.hpp"

namespace relupat {

enum class PredictionMode : std::uint8_t { ArgMax, ArgMin };
enum class Relation : std::uint8_t { Le, Lt, Eq, Ge, Gt };

inline const char* to_string(Relation r) {
    switch (r) {
        case Relation::Le: return "<=";
        case Relation::Lt: return "<";
        case Relation::Eq: return "=";
        case Relation::Ge: return ">=";
        case Relation::Gt: return ">";
    }
    return "?";
}

struct LinearConstraint {
    Vec coeffs;
    Relation rel = Relation::Le;
    double rhs = 0.0;

    bool holds(const Vec& v, double tol = 0.0) const {
        double lhs = dot(coeffs, v);
        switch (rel) {
            case Relation::Le: return lhs <= rhs + tol;
            case Relation::Lt: return lhs < rhs + tol;
            case Relation::Eq: return std::abs(lhs - rhs) <= tol;
            case Relation::Ge: return lhs >= rhs - tol;
            case Relation::Gt: return lhs > rhs - tol;
        }
        return false;
    }
};

// Convex output predicate: either "the predicted class is c" (argmax or argmin,
// ties resolved to the lowest index) or a conjunction of linear constraints on
// the outputs. Disjunctions are not representable by construction.
class Postcondition {
public:
    static Postcondition prediction(int cls, PredictionMode mode = PredictionMode::ArgMax) {
        Postcondition p;
        p.class_ = cls;
        p.mode_ = mode;
        return p;
    }

    static Postcondition linear(std::vector<LinearConstraint> rows) {
        for (const auto& r : rows)
            if (r.rel == Relation::Ge || r.rel == Relation::Gt)
                throw Error("postcondition: linear rows must use <=, < or =");
        Postcondition p;
        p.rows_ = std::move(rows);
        return p;
    }

    bool is_prediction() const { return class_.has_value(); }
    int target_class() const { return *class_; }
    PredictionMode mode() const { return mode_; }
    const std::vector<LinearConstraint>& rows() const { return rows_; }

    // Concrete check on an output vector. Argmax ties go to the lowest index.
    bool holds(const Vec& y) const {
        if (is_prediction()) return predicted_class(y) == *class_;
        for (const auto& r : rows_)
            if (!r.holds(y)) return false;
        return true;
    }

    int predicted_class(const Vec& y) const {
        int best = 0;
        for (int i = 1; i < static_cast<int>(y.size()); ++i) {
            if (mode_ == PredictionMode::ArgMax ? y[i] > y[best] : y[i] < y[best]) best = i;
        }
        return best;
    }

private:
    std::optional<int> class_;
    PredictionMode mode_ = PredictionMode::ArgMax;
    std::vector<LinearConstraint> rows_;
};

// Concrete argmax/argmin class of an output vector, lowest index on ties.
inline int predicted_class(const Vec& y, PredictionMode mode = PredictionMode::ArgMax) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(y.size()); ++i)
        if (mode == PredictionMode::ArgMax ? y[i] > y[best] : y[i] < y[best]) best = i;
    return best;
}

inline Relation relation_from_string(const std::string& s) {
    if (s == "<=") return Relation::Le;
    if (s == "<") return Relation::Lt;
    if (s == "=" || s == "==") return Relation::Eq;
    if (s == ">=") return Relation::Ge;
    if (s == ">") return Relation::Gt;
    throw Error("unknown relation: " + s);
}

inline nlohmann::ordered_json postcondition_to_json(const Postcondition& p) {
    nlohmann::ordered_json j;
    if (p.is_prediction()) {
        j["kind"] = "prediction";
        j["class"] = p.target_class();
        j["mode"] = p.mode() == PredictionMode::ArgMax ? "argmax" : "argmin";
    } else {
        j["kind"] = "linear";
        auto rows = nlohmann::ordered_json::array();
        for (const auto& r : p.rows()) {
            nlohmann::ordered_json jr;
            jr["coeffs"] = r.coeffs;
            jr["rel"] = to_string(r.rel);
            jr["rhs"] = r.rhs;
            rows.push_back(jr);
        }
        j["rows"] = rows;
    }
    return j;
}

inline Postcondition postcondition_from_json(const nlohmann::json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "prediction") {
        auto mode = PredictionMode::ArgMax;
        if (j.contains("mode") && j["mode"] == "argmin") mode = PredictionMode::ArgMin;
        return Postcondition::prediction(j.at("class").get<int>(), mode);
    }
    if (kind == "linear") {
        std::vector<LinearConstraint> rows;
        for (const auto& jr : j.at("rows")) {
            LinearConstraint r;
            r.coeffs = jr.at("coeffs").get<Vec>();
            r.rel = relation_from_string(jr.at("rel").get<std::string>());
            r.rhs = jr.at("rhs").get<double>();
            rows.push_back(std::move(r));
        }
        return Postcondition::linear(std::move(rows));
    }
    throw Error("postcondition JSON: unknown kind '" + kind + "'");
}

}  // namespace relupat
