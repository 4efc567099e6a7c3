#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "relupat/relupat.hpp"

namespace testutil {

using namespace relupat;

// The running-example network: 2 inputs, two hidden layers of 2, 2 outputs,
// all biases zero.
//   N11 = relu(x1 - x2)        N12 = relu(x1 + x2)
//   N21 = relu(0.5 v11 - 0.2 v12)   N22 = relu(-0.5 v11 + 0.1 v12)
//   y1 = v21 - v22             y2 = -v21 + v22
inline Network example_net(std::optional<Bounds> domain = std::nullopt) {
    std::vector<Layer> layers;
    layers.push_back({{{1.0, -1.0}, {1.0, 1.0}}, {0.0, 0.0}});
    layers.push_back({{{0.5, -0.2}, {-0.5, 0.1}}, {0.0, 0.0}});
    layers.push_back({{{1.0, -1.0}, {-1.0, 1.0}}, {0.0, 0.0}});
    return Network(2, 2, std::move(layers), std::move(domain));
}

// Postcondition of the worked example: y1 > y2, written as y2 - y1 < 0.
inline Postcondition top_is_first() {
    return Postcondition::linear({{{-1.0, 1.0}, Relation::Lt, 0.0}});
}

// The five-row dataset used to learn the example's layer-1 tree.
inline Dataset tree_dataset() {
    Dataset d;
    d.inputs = {{0.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}, {4.0, 3.0}, {1.0, -1.0}};
    return d;
}

inline DecisionPattern wedge_pattern() {
    DecisionPattern p;
    p.set({1, 0}, Status::On);
    p.set({1, 1}, Status::Off);
    return p;
}

inline Vec sample_box(std::mt19937& rng, const Bounds& box) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vec x(box.size());
    for (std::size_t i = 0; i < box.size(); ++i)
        x[i] = box[i].first + (box[i].second - box[i].first) * unit(rng);
    return x;
}

// ---- CLI subprocess helpers ----

inline std::string cli_path() {
#ifdef RELUPAT_CLI_PATH
    return RELUPAT_CLI_PATH;
#else
    return "./relupat";
#endif
}

struct CliResult {
    int exit_code = -1;
    std::string output;
};

inline CliResult run_cli(const std::string& args) {
    std::string cmd = cli_path() + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    CliResult res;
    if (!pipe) return res;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) res.output.append(buf, n);
    int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

class TempDir {
public:
    TempDir() {
        char tmpl[] = "/tmp/relupat_test_XXXXXX";
        path_ = mkdtemp(tmpl);
    }
    ~TempDir() {
        if (std::system(("rm -rf " + path_).c_str()) != 0) {}
    }
    const std::string& path() const { return path_; }

    std::string write(const std::string& name, const std::string& content) const {
        std::string full = path_ + "/" + name;
        std::ofstream f(full);
        f << content;
        return full;
    }

    static std::string slurp(const std::string& path) {
        std::ifstream f(path);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    }

private:
    std::string path_;
};

}  // namespace testutil
