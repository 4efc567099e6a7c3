#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "relupat/types.hpp"

namespace relupat {

// Rows of input vectors, optionally with an integer class label each.
struct Dataset {
    std::vector<Vec> inputs;
    std::vector<int> labels;  // empty, or one per row

    bool labeled() const { return !labels.empty(); }
    std::size_t size() const { return inputs.size(); }
};

// CSV: one row per input, n numeric columns, optional trailing integer label.
// Set `labeled` when the last column carries a class label.
inline Dataset load_dataset_csv(const std::string& path, bool labeled = false) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset file: " + path);
    Dataset d;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
        Vec row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                row.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw Error("dataset " + path + " line " + std::to_string(lineno) +
                            ": bad number '" + tok + "'");
            }
        }
        if (labeled) {
            if (row.size() < 2)
                throw Error("dataset " + path + " line " + std::to_string(lineno) +
                            ": labeled row needs at least 2 columns");
            d.labels.push_back(static_cast<int>(row.back()));
            row.pop_back();
        }
        if (!d.inputs.empty() && row.size() != d.inputs.front().size())
            throw Error("dataset " + path + " line " + std::to_string(lineno) +
                        ": inconsistent column count");
        d.inputs.push_back(std::move(row));
    }
    return d;
}

inline Vec parse_vector(const std::string& csv) {
    Vec v;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            v.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw Error("bad number in vector: '" + tok + "'");
        }
    }
    return v;
}

}  // namespace relupat
