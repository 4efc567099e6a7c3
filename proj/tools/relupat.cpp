#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "relupat/relupat.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using namespace relupat;

int log_level() {
    const char* env = std::getenv("RELUPAT_LOG");
    if (!env) return 0;
    std::string s(env);
    if (s == "debug") return 2;
    if (s == "info") return 1;
    return 0;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[info] " << msg << "\n";
}

void write_out(const std::string& out_path, const ordered_json& j) {
    if (out_path.empty()) return;
    std::ofstream f(out_path);
    if (!f) throw Error("cannot write output file: " + out_path);
    f << j.dump(2) << "\n";
    log_info("wrote " + out_path);
}

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw Error("JSON parse error in " + path + ": " + e.what());
    }
    return j;
}

// Post spec grammar: class:<c>[:argmin] or lin:<file.json>
Postcondition parse_post(const std::string& spec) {
    if (spec.rfind("class:", 0) == 0) {
        std::string rest = spec.substr(6);
        auto colon = rest.find(':');
        PredictionMode mode = PredictionMode::ArgMax;
        if (colon != std::string::npos) {
            std::string m = rest.substr(colon + 1);
            if (m == "argmin")
                mode = PredictionMode::ArgMin;
            else if (m != "argmax")
                throw Error("post spec: unknown mode '" + m + "'");
            rest = rest.substr(0, colon);
        }
        try {
            return Postcondition::prediction(std::stoi(rest), mode);
        } catch (const std::exception&) {
            throw Error("post spec: bad class '" + rest + "'");
        }
    }
    if (spec.rfind("lin:", 0) == 0) {
        json j = read_json_file(spec.substr(4));
        if (j.is_object() && j.contains("kind")) return postcondition_from_json(j);
        std::vector<LinearConstraint> rows;
        for (const auto& jr : j) {
            LinearConstraint r;
            r.coeffs = jr.at("coeffs").get<Vec>();
            r.rel = relation_from_string(jr.at("rel").get<std::string>());
            r.rhs = jr.at("rhs").get<double>();
            rows.push_back(std::move(r));
        }
        return Postcondition::linear(std::move(rows));
    }
    throw Error("post spec must be class:<c>[:argmin] or lin:<file.json>");
}

// Region JSON: {"box": [[lo,hi],...]} and/or {"rows":[{"coeffs","rel","rhs"}]}
InputRegion parse_region(const json& j) {
    InputRegion region;
    if (j.contains("box")) {
        Bounds box;
        for (const auto& jb : j["box"])
            box.emplace_back(jb.at(0).get<double>(), jb.at(1).get<double>());
        region = region_from_box(box);
    }
    if (j.contains("rows")) {
        for (const auto& jr : j["rows"]) {
            LinearConstraint c;
            c.coeffs = jr.at("coeffs").get<Vec>();
            c.rel = relation_from_string(jr.at("rel").get<std::string>());
            c.rhs = jr.at("rhs").get<double>();
            region.push_back(std::move(c));
        }
    }
    if (region.empty()) throw Error("region JSON needs a 'box' or 'rows' entry");
    return region;
}

int run(int argc, char** argv) {
    CLI::App app{"Decision-pattern analysis of feed-forward ReLU networks"};
    app.require_subcommand(1);

    std::string net_path, out_path, x_csv, pattern_path, data_path, post_spec = "class:0";
    std::string region_path, rules_path, holdout_path, support_path, method = "interpolant";
    int layer = 1, seed = 42, jobs = 0, trials = 100, repeats = 10, rand_nets = 0;
    long max_nodes = 10'000'000;
    double timeout_secs = 300.0, tau = 0.95;
    bool prove = false, argmin = false, normalized = false;

    app.add_option("--seed", seed, "RNG seed recorded in outputs")->capture_default_str();
    app.add_option("--jobs", jobs, "worker count (results are identical for any value)");
    app.add_option("--out", out_path, "write the JSON result to this path");

    auto add_net = [&](CLI::App* c) {
        c->add_option("--net", net_path, "network file (.json or .nnet)")->required();
    };
    auto add_budget = [&](CLI::App* c) {
        c->add_option("--max-nodes", max_nodes, "search node budget")->capture_default_str();
        c->add_option("--timeout-secs", timeout_secs, "wall-clock budget")->capture_default_str();
    };

    auto* c_eval = app.add_subcommand("eval", "evaluate the network on an input");
    add_net(c_eval);
    c_eval->add_option("--x", x_csv, "comma-separated input")->required();
    c_eval->add_flag("--normalized", normalized, "apply NNet normalization");

    auto* c_sig = app.add_subcommand("signature", "activation signature of an input");
    add_net(c_sig);
    c_sig->add_option("--x", x_csv, "comma-separated input")->required();

    auto* c_verify = app.add_subcommand("verify", "decide pattern /\\ region => postcondition");
    add_net(c_verify);
    c_verify->add_option("--pattern", pattern_path, "pattern JSON file")->required();
    c_verify->add_option("--post", post_spec, "class:<c>[:argmin] or lin:<file.json>");
    c_verify->add_option("--region", region_path, "input region JSON file");
    c_verify->add_option("--witness", x_csv, "warm-start input row");
    add_budget(c_verify);

    auto* c_infer = app.add_subcommand("infer-input", "minimal input property of an input");
    add_net(c_infer);
    c_infer->add_option("--input", x_csv, "comma-separated input")->required();
    c_infer->add_option("--post", post_spec, "class:<c>[:argmin] or lin:<file.json>");
    c_infer->add_flag("--argmin", argmin, "argmin prediction semantics");
    add_budget(c_infer);

    auto* c_mine = app.add_subcommand("mine-layer", "mine layer patterns from a dataset");
    add_net(c_mine);
    c_mine->add_option("--data", data_path, "training CSV")->required();
    c_mine->add_option("--layer", layer, "hidden layer to mine")->required();
    c_mine->add_option("--post", post_spec, "boolean target; omit for multiclass");
    c_mine->add_flag("--argmin", argmin, "argmin prediction semantics");
    c_mine->add_option("--tau", tau, "validation threshold")->capture_default_str();
    c_mine->add_option("--holdout", holdout_path, "held-out CSV for tau validation");
    c_mine->add_flag("--prove", prove, "attempt DP proofs with CE-guided strengthening");
    add_budget(c_mine);

    auto* c_box = app.add_subcommand("box", "under-approximation box of a closed pattern");
    add_net(c_box);
    c_box->add_option("--pattern", pattern_path, "pattern JSON file")->required();
    c_box->add_option("--support", support_path, "support inputs CSV");

    auto* c_min = app.add_subcommand("minassign", "minimal fixed-input assignment for a pattern");
    add_net(c_min);
    c_min->add_option("--pattern", pattern_path, "pattern JSON file")->required();
    c_min->add_option("--input", x_csv, "comma-separated input")->required();
    add_budget(c_min);

    auto* c_dist = app.add_subcommand("distill", "benchmark hybrid rule-table inference");
    add_net(c_dist);
    c_dist->add_option("--rules", rules_path, "rule table JSON")->required();
    c_dist->add_option("--test", data_path, "labeled test CSV")->required();
    c_dist->add_option("--tau", tau, "threshold recorded in the report")->capture_default_str();
    c_dist->add_option("--repeats", repeats, "timing repeats")->capture_default_str();
    c_dist->add_flag("--argmin", argmin, "argmin prediction semantics");

    auto* c_dec = app.add_subcommand("decompose", "prove A => B through a layer interpolant");
    add_net(c_dec);
    c_dec->add_option("--A", region_path, "region JSON file")->required();
    c_dec->add_option("--B", post_spec, "class:<c>[:argmin] or lin:<file.json>")->required();
    c_dec->add_option("--data", data_path, "dataset CSV for interpolant selection")->required();
    c_dec->add_option("--layer", layer, "restrict interpolant mining to this layer");
    c_dec->add_option("--method", method, "interpolant | prefix-cover")->capture_default_str();
    add_budget(c_dec);

    auto* c_oracle = app.add_subcommand("oracle-check", "dp vs brute-force oracle agreement");
    c_oracle->add_option("--net", net_path, "network file (omit to use random networks)");
    c_oracle->add_option("--trials", trials, "queries per network")->capture_default_str();
    c_oracle->add_option("--random-nets", rand_nets, "number of random 3-3-3-2 networks");

    // let --seed/--jobs/--out appear after the subcommand name
    for (CLI::App* sc : app.get_subcommands([](const CLI::App*) { return true; }))
        sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    Budget budget{max_nodes, timeout_secs};
    std::optional<Network> net;
    if (!net_path.empty()) {
        net = load_network(net_path);
        log_info("loaded network " + net_path + " (" + std::to_string(net->hidden_layers()) +
                 " hidden layers)");
    }

    if (*c_eval) {
        Vec x = parse_vector(x_csv);
        Vec y = normalized ? evaluate_normalized(*net, x) : evaluate(*net, x);
        ordered_json j;
        j["output"] = y;
        std::cout << json(y).dump() << "\n";
        write_out(out_path, j);
        return 0;
    }
    if (*c_sig) {
        Vec x = parse_vector(x_csv);
        auto sigma = DecisionPattern::from_signature(activation_signature(*net, x));
        ordered_json j = pattern_to_json(sigma);
        std::cout << j.dump() << "\n";
        write_out(out_path, j);
        return 0;
    }
    if (*c_verify) {
        Query q;
        q.pattern = pattern_from_json(read_json_file(pattern_path));
        q.post = parse_post(post_spec);
        if (!region_path.empty()) q.input_region = parse_region(read_json_file(region_path));
        if (!x_csv.empty()) q.witness = parse_vector(x_csv);
        Verdict v = dp(*net, q, budget);
        ordered_json j = verdict_to_json(v);
        std::cout << "verdict: " << to_string(v.status) << " (nodes " << v.stats.nodes
                  << ", lp calls " << v.stats.lp_calls << ")\n";
        write_out(out_path, j);
        return v.status == VerdictStatus::Proved ? 0 : 1;
    }
    if (*c_infer) {
        Vec x = parse_vector(x_csv);
        Postcondition post = parse_post(post_spec);
        if (argmin && post.is_prediction())
            post = Postcondition::prediction(post.target_class(), PredictionMode::ArgMin);
        InputProperty p = infer_input_property(*net, x, post, budget);
        ordered_json j;
        j["pattern"] = pattern_to_json(p.pattern);
        j["proved"] = p.proved;
        if (p.critical_layer) j["critical_layer"] = *p.critical_layer;
        j["dp_calls"] = p.dp_calls;
        j["timed_out"] = p.timed_out;
        std::cout << (p.proved ? "proved" : "unproved") << " input property with "
                  << p.pattern.size() << " constraints (" << p.dp_calls << " dp calls)\n";
        write_out(out_path, j);
        return p.proved ? 0 : 1;
    }
    if (*c_mine) {
        Dataset data = load_dataset_csv(data_path);
        MineTarget target =
            post_spec == "class:0" && !c_mine->count("--post")
                ? MineTarget::multiclass(argmin ? PredictionMode::ArgMin : PredictionMode::ArgMax)
                : MineTarget::boolean(parse_post(post_spec));
        auto mined = mine_layer_patterns(*net, data, layer, target);
        std::optional<Dataset> holdout;
        if (!holdout_path.empty()) holdout = load_dataset_csv(holdout_path);
        auto mode = argmin ? PredictionMode::ArgMin : PredictionMode::ArgMax;
        for (auto& mp : mined) {
            Postcondition post = target.boolean_post
                                     ? *target.boolean_post
                                     : Postcondition::prediction(mp.target_class, mode);
            if (prove) {
                Verdict v = dp_layer(*net, mp.pattern, post, budget);
                if (v.status == VerdictStatus::Proved) {
                    mp.status = MinedStatus::ProvedByDP;
                } else if (v.status == VerdictStatus::Refuted) {
                    std::vector<Vec> supporters;
                    for (int r : mp.support.satisfying_indices)
                        supporters.push_back(data.inputs[r]);
                    mp = refine_with_counterexample(*net, mp, v.counterexample, supporters, post,
                                                    budget);
                }
            }
            if (holdout && mp.status != MinedStatus::Discarded)
                mp = validate_empirically(*net, mp, *holdout, tau, post);
        }
        ordered_json j = ordered_json::array();
        for (const auto& mp : mined) j.push_back(mined_to_json(mp));
        std::cout << mined.size() << " patterns mined at layer " << layer << "\n";
        write_out(out_path, j);
        return 0;
    }
    if (*c_box) {
        DecisionPattern sigma = pattern_from_json(read_json_file(pattern_path));
        std::vector<Vec> support;
        if (!support_path.empty()) support = load_dataset_csv(support_path).inputs;
        BoxResult b = under_approx_box(*net, sigma, support);
        std::cout << box_to_text(b, {}) << "\n";
        write_out(out_path, box_to_json(b));
        return 0;
    }
    if (*c_min) {
        DecisionPattern sigma = pattern_from_json(read_json_file(pattern_path));
        Vec x = parse_vector(x_csv);
        MinimalAssignment a = minimal_assignment(*net, sigma, x, budget);
        std::cout << a.fixed.size() << " fixed, " << a.free.size() << " free\n";
        write_out(out_path, assignment_to_json(a));
        return a.partial ? 1 : 0;
    }
    if (*c_dist) {
        RuleTable table = rule_table_from_json(read_json_file(rules_path));
        table.tau = tau;
        Dataset test = load_dataset_csv(data_path, true);
        auto mode = argmin ? PredictionMode::ArgMin : PredictionMode::ArgMax;
        DistillReport rep = benchmark(*net, table, test, repeats, mode);
        std::cout << "full acc " << rep.accuracy_full << ", hybrid acc " << rep.accuracy_hybrid
                  << ", shortcut rate " << rep.shortcut_rate << ", mismatches " << rep.mismatches
                  << "\n";
        write_out(out_path, report_to_json(rep));
        return 0;
    }
    if (*c_dec) {
        InputRegion A = parse_region(read_json_file(region_path));
        Postcondition B = parse_post(post_spec);
        Dataset data = load_dataset_csv(data_path);
        MinedPattern interp;
        if (c_dec->count("--layer")) {
            auto mined = mine_layer_patterns(*net, data, layer, MineTarget::boolean(B));
            if (mined.empty()) throw Error("decompose: no candidate pattern at layer " +
                                           std::to_string(layer));
            interp = mined.front();
        } else {
            interp = select_interpolant(*net, data, A, B);
        }
        ProofPlan plan = method == "prefix-cover"
                             ? prove_via_prefix_cover(*net, A, B, interp.pattern, data, budget)
                             : prove_via_interpolant(*net, A, B, interp.pattern, data, budget);
        std::cout << "plan: " << to_string(plan.status) << " (" << plan.obligations.size()
                  << " obligations)\n";
        write_out(out_path, plan_to_json(plan));
        return plan.status == PlanStatus::Proved ? 0 : 1;
    }
    if (*c_oracle) {
        std::mt19937 rng(static_cast<std::uint32_t>(seed));
        ordered_json j;
        j["seed"] = seed;
        int total = 0, agree = 0;
        auto run_net = [&](const Network& n, const std::string& name) {
            if (n.total_hidden() > kOracleMaxHidden)
                throw Error("oracle-check: network has " + std::to_string(n.total_hidden()) +
                            " hidden neurons, limit is " + std::to_string(kOracleMaxHidden));
            OracleReport rep = oracle_agreement(n, rng, trials);
            ordered_json je;
            je["network"] = name;
            je["instances"] = rep.instances;
            je["agreements"] = rep.agreements;
            je["disagreeing"] = rep.disagreeing;
            j["runs"].push_back(je);
            total += rep.instances;
            agree += rep.agreements;
        };
        if (net) run_net(*net, net_path);
        for (int k = 0; k < rand_nets; ++k)
            run_net(random_network(rng, 3, {3, 3}, 2), "random-" + std::to_string(k));
        if (total == 0) throw Error("oracle-check: give --net and/or --random-nets");
        j["instances"] = total;
        j["agreements"] = agree;
        std::cout << "agreement " << agree << "/" << total << "\n";
        write_out(out_path, j);
        return agree == total ? 0 : 1;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const relupat::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
