#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace relupat {

using Vec = std::vector<double>;
using Matrix = std::vector<Vec>;

// Hidden-neuron address: layer is 1-based, index is 0-based within the layer.
struct NeuronId {
    int layer = 0;
    int index = 0;

    auto operator<=>(const NeuronId&) const = default;
};

enum class Status : std::uint8_t { Off = 0, On = 1 };

inline Status flip(Status s) { return s == Status::On ? Status::Off : Status::On; }

inline const char* to_string(Status s) { return s == Status::On ? "on" : "off"; }

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size())
        throw Error("dot: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Per-dimension interval bounds, [lo, hi] each.
using Bounds = std::vector<std::pair<double, double>>;

}  // namespace relupat
