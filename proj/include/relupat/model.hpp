#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "relupat/types.hpp"

namespace relupat {

struct Layer {
    Matrix weights;  // rows x cols
    Vec bias;        // rows
};

// Optional NNet normalization metadata. Entries 0..n-1 describe inputs,
// entry n (of means/ranges) describes the outputs.
struct NNetNormalization {
    Vec input_min, input_max, means, ranges;
};

// Immutable after load; all operations on it are pure.
class Network {
public:
    Network(int input_dim, int output_dim, std::vector<Layer> layers,
            std::optional<Bounds> input_domain = std::nullopt)
        : input_dim_(input_dim),
          output_dim_(output_dim),
          layers_(std::move(layers)),
          input_domain_(std::move(input_domain)) {
        validate();
    }

    int input_dim() const { return input_dim_; }
    int output_dim() const { return output_dim_; }
    // Hidden layer count k (the final layer is the affine output layer).
    int hidden_layers() const { return static_cast<int>(layers_.size()) - 1; }
    int width(int layer) const { return static_cast<int>(layers_.at(layer - 1).weights.size()); }
    const Layer& layer(int l) const { return layers_.at(l - 1); }
    const Layer& output_layer() const { return layers_.back(); }
    const std::optional<Bounds>& input_domain() const { return input_domain_; }
    const std::optional<NNetNormalization>& normalization() const { return normalization_; }
    void set_normalization(NNetNormalization n) { normalization_ = std::move(n); }

    int max_width() const {
        int w = 0;
        for (int l = 1; l <= hidden_layers(); ++l) w = std::max(w, width(l));
        return w;
    }

    int total_hidden() const {
        int t = 0;
        for (int l = 1; l <= hidden_layers(); ++l) t += width(l);
        return t;
    }

    bool valid_neuron(NeuronId id) const {
        return id.layer >= 1 && id.layer <= hidden_layers() && id.index >= 0 &&
               id.index < width(id.layer);
    }

private:
    void validate() const {
        if (input_dim_ <= 0 || output_dim_ <= 0) throw Error("network: non-positive dimension");
        if (layers_.size() < 2) throw Error("network: need at least one hidden layer");
        int cols = input_dim_;
        for (std::size_t j = 0; j < layers_.size(); ++j) {
            const Layer& L = layers_[j];
            if (L.weights.empty()) throw Error("network: empty layer " + std::to_string(j + 1));
            if (L.bias.size() != L.weights.size())
                throw Error("network: bias/weight row mismatch in layer " + std::to_string(j + 1));
            for (const Vec& row : L.weights) {
                if (static_cast<int>(row.size()) != cols)
                    throw Error("network: layer " + std::to_string(j + 1) + " expects " +
                                std::to_string(cols) + " columns, row has " +
                                std::to_string(row.size()));
                if (!all_finite(row)) throw Error("network: non-finite weight in layer " +
                                                  std::to_string(j + 1));
            }
            if (!all_finite(L.bias))
                throw Error("network: non-finite bias in layer " + std::to_string(j + 1));
            cols = static_cast<int>(L.weights.size());
        }
        if (cols != output_dim_) throw Error("network: output layer rows != output_dim");
        if (input_domain_) {
            if (static_cast<int>(input_domain_->size()) != input_dim_)
                throw Error("network: input_domain size != input_dim");
            for (auto [lo, hi] : *input_domain_)
                if (!(lo <= hi)) throw Error("network: input_domain lo > hi");
        }
    }

    int input_dim_;
    int output_dim_;
    std::vector<Layer> layers_;
    std::optional<Bounds> input_domain_;
    std::optional<NNetNormalization> normalization_;
};

// Total on/off map for every hidden neuron of one network.
struct ActivationSignature {
    // status[l-1][i] for neuron (l, i)
    std::vector<std::vector<Status>> status;

    Status at(NeuronId id) const { return status.at(id.layer - 1).at(id.index); }
};

inline Vec evaluate(const Network& net, const Vec& x) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw Error("evaluate: input has dimension " + std::to_string(x.size()) + ", expected " +
                    std::to_string(net.input_dim()));
    if (!all_finite(x)) throw Error("evaluate: non-finite input");
    Vec v = x;
    for (int l = 1; l <= net.hidden_layers(); ++l) {
        const Layer& L = net.layer(l);
        Vec next(L.weights.size());
        for (std::size_t i = 0; i < L.weights.size(); ++i)
            next[i] = std::max(0.0, dot(L.weights[i], v) + L.bias[i]);
        v = std::move(next);
    }
    const Layer& out = net.output_layer();
    Vec y(out.weights.size());
    for (std::size_t i = 0; i < out.weights.size(); ++i) y[i] = dot(out.weights[i], v) + out.bias[i];
    return y;
}

inline ActivationSignature activation_signature(const Network& net, const Vec& x) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw Error("activation_signature: dimension mismatch");
    ActivationSignature sig;
    Vec v = x;
    for (int l = 1; l <= net.hidden_layers(); ++l) {
        const Layer& L = net.layer(l);
        Vec next(L.weights.size());
        std::vector<Status> st(L.weights.size());
        for (std::size_t i = 0; i < L.weights.size(); ++i) {
            double pre = dot(L.weights[i], v) + L.bias[i];
            next[i] = std::max(0.0, pre);
            st[i] = pre > 0.0 ? Status::On : Status::Off;
        }
        sig.status.push_back(std::move(st));
        v = std::move(next);
    }
    return sig;
}

// Forward pass restricted to layers 1..l; returns the post-ReLU values of layer l.
inline Vec evaluate_prefix(const Network& net, const Vec& x, int upto_layer) {
    Vec v = x;
    for (int l = 1; l <= upto_layer; ++l) {
        const Layer& L = net.layer(l);
        Vec next(L.weights.size());
        for (std::size_t i = 0; i < L.weights.size(); ++i)
            next[i] = std::max(0.0, dot(L.weights[i], v) + L.bias[i]);
        v = std::move(next);
    }
    return v;
}

// ---- JSON loading ----
// Schema: {"input_dim", "output_dim", "layers":[{"weights":[[...]],"bias":[...]}],
//          "input_domain":[[lo,hi],...]?}

inline Network network_from_json(const nlohmann::json& j) {
    try {
        int n = j.at("input_dim").get<int>();
        int m = j.at("output_dim").get<int>();
        std::vector<Layer> layers;
        for (const auto& jl : j.at("layers")) {
            Layer L;
            L.weights = jl.at("weights").get<Matrix>();
            L.bias = jl.at("bias").get<Vec>();
            layers.push_back(std::move(L));
        }
        std::optional<Bounds> domain;
        if (j.contains("input_domain") && !j["input_domain"].is_null()) {
            Bounds b;
            for (const auto& jd : j["input_domain"])
                b.emplace_back(jd.at(0).get<double>(), jd.at(1).get<double>());
            domain = std::move(b);
        }
        return Network(n, m, std::move(layers), std::move(domain));
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("network JSON: ") + e.what());
    }
}

inline nlohmann::ordered_json network_to_json(const Network& net) {
    nlohmann::ordered_json j;
    j["input_dim"] = net.input_dim();
    j["output_dim"] = net.output_dim();
    j["layers"] = nlohmann::ordered_json::array();
    for (int l = 1; l <= net.hidden_layers() + 1; ++l) {
        nlohmann::ordered_json jl;
        jl["weights"] = net.layer(l).weights;
        jl["bias"] = net.layer(l).bias;
        j["layers"].push_back(jl);
    }
    if (net.input_domain()) {
        auto arr = nlohmann::ordered_json::array();
        for (auto [lo, hi] : *net.input_domain()) arr.push_back({lo, hi});
        j["input_domain"] = arr;
    }
    return j;
}

// ---- NNet loading ----
// Header "//" comment lines, then:
//   numLayers,inputSize,outputSize,maxLayerSize
//   layer sizes (numLayers+1 entries)
//   flag line (unused)
//   input mins / input maxes / means / ranges
//   per layer: weight rows, then biases, comma-separated decimals.

namespace detail {

inline Vec parse_csv_numbers(const std::string& line, int lineno) {
    Vec out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        // trim whitespace
        std::size_t a = tok.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        std::size_t b = tok.find_last_not_of(" \t\r");
        tok = tok.substr(a, b - a + 1);
        if (tok.empty()) continue;
        try {
            std::size_t pos = 0;
            double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw Error("NNet line " + std::to_string(lineno) + ": cannot parse number '" + tok +
                        "'");
        }
    }
    return out;
}

inline std::string next_data_line(std::istream& in, int& lineno) {
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.rfind("//", 0) == 0) continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        return line;
    }
    throw Error("NNet: unexpected end of file at line " + std::to_string(lineno));
}

}  // namespace detail

inline Network load_nnet(std::istream& in) {
    int lineno = 0;
    Vec header = detail::parse_csv_numbers(detail::next_data_line(in, lineno), lineno);
    if (header.size() < 4) throw Error("NNet line " + std::to_string(lineno) + ": short header");
    int num_layers = static_cast<int>(header[0]);
    int input_size = static_cast<int>(header[1]);
    int output_size = static_cast<int>(header[2]);
    Vec sizes = detail::parse_csv_numbers(detail::next_data_line(in, lineno), lineno);
    if (static_cast<int>(sizes.size()) < num_layers + 1)
        throw Error("NNet line " + std::to_string(lineno) + ": layer sizes line too short");
    detail::next_data_line(in, lineno);  // flag line, ignored
    NNetNormalization norm;
    norm.input_min = detail::parse_csv_numbers(detail::next_data_line(in, lineno), lineno);
    norm.input_max = detail::parse_csv_numbers(detail::next_data_line(in, lineno), lineno);
    norm.means = detail::parse_csv_numbers(detail::next_data_line(in, lineno), lineno);
    norm.ranges = detail::parse_csv_numbers(detail::next_data_line(in, lineno), lineno);

    std::vector<Layer> layers;
    for (int l = 0; l < num_layers; ++l) {
        int rows = static_cast<int>(sizes[l + 1]);
        int cols = static_cast<int>(sizes[l]);
        Layer L;
        for (int r = 0; r < rows; ++r) {
            Vec row = detail::parse_csv_numbers(detail::next_data_line(in, lineno), lineno);
            if (static_cast<int>(row.size()) != cols)
                throw Error("NNet line " + std::to_string(lineno) + ": expected " +
                            std::to_string(cols) + " weights, got " + std::to_string(row.size()));
            L.weights.push_back(std::move(row));
        }
        for (int r = 0; r < rows; ++r) {
            Vec b = detail::parse_csv_numbers(detail::next_data_line(in, lineno), lineno);
            if (b.empty())
                throw Error("NNet line " + std::to_string(lineno) + ": missing bias value");
            L.bias.push_back(b[0]);
        }
        layers.push_back(std::move(L));
    }
    Network net(input_size, output_size, std::move(layers));
    net.set_normalization(std::move(norm));
    return net;
}

enum class NetFormat { Json, NNet, Auto };

inline Network load_network(const std::string& path, NetFormat fmt = NetFormat::Auto) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open network file: " + path);
    if (fmt == NetFormat::Auto)
        fmt = path.size() >= 5 && path.substr(path.size() - 5) == ".nnet" ? NetFormat::NNet
                                                                         : NetFormat::Json;
    if (fmt == NetFormat::NNet) return load_nnet(in);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("network JSON parse error in " + path + ": " + e.what());
    }
    return network_from_json(j);
}

// Evaluate with NNet normalization applied: inputs are clipped to [min,max] and
// standardized with (x - mean) / range; outputs are de-standardized.
inline Vec evaluate_normalized(const Network& net, const Vec& x) {
    if (!net.normalization()) throw Error("evaluate_normalized: no normalization metadata");
    const auto& nm = *net.normalization();
    int n = net.input_dim();
    if (static_cast<int>(nm.means.size()) < n + 1 ||
        static_cast<int>(nm.ranges.size()) < n + 1)
        throw Error("evaluate_normalized: incomplete normalization metadata");
    Vec z(x.size());
    for (int i = 0; i < n; ++i) {
        double v = x[i];
        if (i < static_cast<int>(nm.input_min.size())) v = std::max(v, nm.input_min[i]);
        if (i < static_cast<int>(nm.input_max.size())) v = std::min(v, nm.input_max[i]);
        z[i] = (v - nm.means[i]) / nm.ranges[i];
    }
    Vec y = evaluate(net, z);
    for (double& v : y) v = v * nm.ranges[n] + nm.means[n];
    return y;
}

}  // namespace relupat
