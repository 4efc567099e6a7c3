// Acceptance suite: one pass/fail line per criterion, exit 0 only if all pass.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "helpers.hpp"

using namespace relupat;
using testutil::TempDir;
using testutil::example_net;
using testutil::run_cli;
using testutil::sample_box;
using testutil::top_is_first;
using testutil::tree_dataset;
using testutil::wedge_pattern;

namespace {

int failures = 0;

void report(int idx, const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("%s  %2d  %s%s%s\n", ok ? "PASS" : "FAIL", idx, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++failures;
}

double secs_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool approx(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// 1: golden results on the worked two-layer example.
void criterion_golden() {
    auto t0 = std::chrono::steady_clock::now();
    Network net = example_net();
    bool ok = true;

    Vec y = evaluate(net, {1.0, -1.0});
    ok = ok && approx(y[0], 1.0, 1e-12) && approx(y[1], -1.0, 1e-12);

    ActivationSignature sig = activation_signature(net, {1.0, -1.0});
    ok = ok && sig.at({1, 0}) == Status::On && sig.at({1, 1}) == Status::Off &&
         sig.at({2, 0}) == Status::On && sig.at({2, 1}) == Status::Off;

    Polytope poly = polytope_of(net, wedge_pattern());
    ok = ok && poly.strict.size() == 1 && poly.nonstrict.size() == 1;
    ok = ok && approx(poly.strict[0].w[0], 1.0, 1e-12) && approx(poly.strict[0].w[1], -1.0, 1e-12) &&
         approx(poly.strict[0].b, 0.0, 1e-12);
    ok = ok && approx(poly.nonstrict[0].w[0], 1.0, 1e-12) &&
         approx(poly.nonstrict[0].w[1], 1.0, 1e-12) && approx(poly.nonstrict[0].b, 0.0, 1e-12);

    Propagation prop = propagate(net, DecisionPattern::from_signature(sig));
    ok = ok && approx(prop.outputs[0].w[0], 0.5, 1e-12) && approx(prop.outputs[0].w[1], -0.5, 1e-12) &&
         approx(prop.outputs[1].w[0], -0.5, 1e-12) && approx(prop.outputs[1].w[1], 0.5, 1e-12) &&
         approx(prop.outputs[0].b, 0.0, 1e-12) && approx(prop.outputs[1].b, 0.0, 1e-12);

    Query q;
    q.pattern = wedge_pattern();
    q.post = top_is_first();
    ok = ok && dp(net, q).status == VerdictStatus::Proved;

    DecisionPattern layer2;
    layer2.set({2, 0}, Status::On);
    layer2.set({2, 1}, Status::Off);
    ok = ok && dp_layer(net, layer2, top_is_first()).status == VerdictStatus::Proved;

    double el = secs_since(t0);
    report(1, "worked-example golden suite", ok && el < 1.0,
           "elapsed " + std::to_string(el) + "s");
}

// 2: iterative relaxation golden run.
void criterion_relaxation() {
    auto t0 = std::chrono::steady_clock::now();
    Network net = example_net();
    InputProperty p = infer_input_property(net, {1.0, -1.0}, top_is_first());
    bool ok = p.proved && p.pattern == wedge_pattern() && p.critical_layer &&
              *p.critical_layer == 1 && p.dp_calls <= 5;
    double el = secs_since(t0);
    report(2, "iterative relaxation golden suite", ok && el < 1.0,
           "dp calls " + std::to_string(p.dp_calls) + ", elapsed " + std::to_string(el) + "s");
}

// 3: decision-tree mining reproduces the expected layer-1 pattern.
void criterion_mining() {
    Network net = example_net();
    auto mined = mine_layer_patterns(net, tree_dataset(), 1, MineTarget::boolean(top_is_first()));
    bool ok = mined.size() == 1 && mined[0].pattern == wedge_pattern() &&
              mined[0].support.count == 2 && mined[0].support.purity &&
              approx(*mined[0].support.purity, 1.0, 0.0);
    report(3, "decision-tree mining suite", ok);
}

// 4: dp agrees with the brute-force oracle on random desk-scale instances.
void criterion_oracle() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(42);
    std::uniform_int_distribution<int> ndist(2, 3), ldist(1, 3), wdist(1, 4);
    int instances = 0, agreements = 0, cex_ok = 0, cex_total = 0;
    for (int t = 0; t < 200; ++t) {
        int n = ndist(rng);
        std::vector<int> widths(ldist(rng));
        for (int& w : widths) w = wdist(rng);
        Network net = random_network(rng, n, widths, 2);
        Query q;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        q.pattern = random_pattern(rng, net, unit(rng) * 0.6);
        q.post = random_post(rng, 2);
        Verdict got = dp(net, q);
        Verdict want = oracle_dp(net, q);
        ++instances;
        bool agree = got.status == want.status;
        if (got.status == VerdictStatus::Refuted) {
            ++cex_total;
            bool valid = satisfies(net, q.pattern, got.counterexample) &&
                         !q.post.holds(evaluate(net, got.counterexample));
            if (valid) ++cex_ok;
            agree = agree && valid;
        }
        if (agree) ++agreements;
    }
    double el = secs_since(t0);
    bool ok = instances >= 200 && agreements == instances && cex_ok == cex_total && el < 300.0;
    report(4, "verifier oracle equivalence", ok,
           std::to_string(agreements) + "/" + std::to_string(instances) + " agree, " +
               std::to_string(cex_total) + " counterexamples validated, elapsed " +
               std::to_string(el) + "s");
}

// 5: symbolic propagation equals concrete evaluation on in-pattern samples.
void criterion_symbolic() {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> jdist(-1.0, 1.0);
    long checked = 0, violations = 0, membership_violations = 0;
    for (int netidx = 0; netidx < 100; ++netidx) {
        Network net = random_network(rng, 2, {3, 2}, 2);
        for (int p = 0; p < 10; ++p) {
            Vec x0 = sample_box(rng, *net.input_domain());
            ActivationSignature sig0 = activation_signature(net, x0);
            std::uniform_int_distribution<int> depth(1, net.hidden_layers());
            int L = depth(rng);
            DecisionPattern sigma = DecisionPattern::signature_prefix(sig0, L);
            Propagation prop = propagate(net, sigma, L);
            Polytope poly = polytope_of(net, sigma, L);
            for (int s = 0; s < 100; ++s) {
                Vec x = x0;
                double scale = 1.0;
                const Bounds& dom = *net.input_domain();
                for (int tries = 0; tries < 20; ++tries) {
                    Vec cand(2);
                    for (int j = 0; j < 2; ++j)
                        cand[j] = std::clamp(x0[j] + scale * jdist(rng), dom[j].first,
                                             dom[j].second);
                    if (satisfies(net, sigma, cand)) {
                        x = cand;
                        break;
                    }
                    scale *= 0.5;
                }
                ++checked;
                Vec v = x;
                for (int l = 1; l <= L; ++l) {
                    const Layer& layer = net.layer(l);
                    Vec next(layer.weights.size());
                    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
                        double pre = dot(layer.weights[i], v) + layer.bias[i];
                        if (!approx(prop.forms[l - 1][i].eval(x), pre, 1e-9)) ++violations;
                        next[i] = std::max(0.0, pre);
                    }
                    v = std::move(next);
                }
                if (!poly.contains(x, 1e-9)) ++membership_violations;
            }
        }
    }
    bool ok = violations == 0 && membership_violations == 0;
    report(5, "symbolic-propagation property suite", ok,
           std::to_string(checked) + " samples, " + std::to_string(violations) + " value and " +
               std::to_string(membership_violations) + " membership violations");
}

// 6: under-approximation boxes are sound under uniform sampling.
void criterion_box() {
    std::mt19937 rng(42);
    int patterns = 0, nonempty = 0, violations = 0;
    while (patterns < 50) {
        Network net = random_network(rng, 2, {3, 2}, 2);
        DecisionPattern sigma = random_closed_pattern(rng, net);
        ++patterns;
        BoxResult b = under_approx_box(net, sigma, {});
        if (b.empty) continue;
        ++nonempty;
        for (int s = 0; s < 10000; ++s)
            if (!satisfies(net, sigma, sample_box(rng, b.box))) ++violations;
    }
    bool ok = violations == 0 && nonempty > 10;
    report(6, "box soundness", ok,
           std::to_string(nonempty) + "/" + std::to_string(patterns) + " non-empty boxes, " +
               std::to_string(violations) + " violations");
}

// 7: proved relaxation results are minimal neuron by neuron.
void criterion_minimality() {
    std::mt19937 rng(13);
    std::uniform_int_distribution<int> ndist(2, 3), ldist(1, 3), wdist(1, 4);
    int results = 0, drops = 0, non_refuted = 0;

    auto check_result = [&](const Network& net, const InputProperty& p, const Postcondition& post) {
        if (!p.proved) return;
        ++results;
        for (const auto& [id, s] : p.pattern.constraints()) {
            (void)s;
            DecisionPattern weakened = p.pattern;
            weakened.erase(id);
            Query q;
            q.pattern = weakened;
            q.post = post;
            ++drops;
            if (dp(net, q).status != VerdictStatus::Refuted) ++non_refuted;
        }
    };

    Network fig = example_net();
    check_result(fig, infer_input_property(fig, {1.0, -1.0}, top_is_first()), top_is_first());

    for (int t = 0; t < 60; ++t) {
        int n = ndist(rng);
        std::vector<int> widths(ldist(rng));
        for (int& w : widths) w = wdist(rng);
        Network net = random_network(rng, n, widths, 2);
        Vec x = sample_box(rng, *net.input_domain());
        Postcondition post = Postcondition::prediction(predicted_class(evaluate(net, x)));
        check_result(net, infer_input_property(net, x, post), post);
    }
    bool ok = results > 30 && drops >= 10 && non_refuted == 0;
    report(7, "relaxation minimality", ok,
           std::to_string(results) + " proved results, " + std::to_string(drops) +
               " single-neuron drops, " + std::to_string(non_refuted) + " stayed proved");
}

// 8: hybrid rule-table inference is exact and directionally faster.
void criterion_distill() {
    std::mt19937 rng(42);
    std::vector<int> widths(6, 32);
    // shrink the input domain until interval propagation leaves few unstable
    // neurons, so layer patterns admit genuine decision-procedure proofs
    Network net = random_network(rng, 6, widths, 3, 1.0);
    Bounds domain;
    int free_count = 0;
    for (double delta = 0.05;; delta *= 0.5) {
        domain.assign(6, {-delta, delta});
        Network probe(6, 3,
                      [&] {
                          std::vector<Layer> ls;
                          for (int l = 1; l <= net.hidden_layers() + 1; ++l) ls.push_back(net.layer(l));
                          return ls;
                      }(),
                      domain);
        auto forced = vdetail::forced_phases(probe, domain);
        free_count = 0;
        for (const auto& layer : forced)
            for (const auto& f : layer)
                if (!f) ++free_count;
        if (free_count <= 10 || delta < 1e-6) {
            net = std::move(probe);
            break;
        }
    }

    Dataset train, test;
    for (int i = 0; i < 400; ++i) train.inputs.push_back(sample_box(rng, domain));
    for (int i = 0; i < 2000; ++i) {
        Vec x = sample_box(rng, domain);
        test.labels.push_back(predicted_class(evaluate(net, x)));
        test.inputs.push_back(std::move(x));
    }

    auto mined = mine_layer_patterns(net, train, 2, MineTarget::multiclass());
    std::vector<MinedPattern> proved;
    for (auto& mp : mined) {
        Verdict v = dp_layer(net, mp.pattern, Postcondition::prediction(mp.target_class),
                             Budget{2'000'000, 60.0});
        if (v.status == VerdictStatus::Proved) {
            mp.status = MinedStatus::ProvedByDP;
            proved.push_back(mp);
        }
    }
    bool ok = !proved.empty();
    RuleTable table = build_rule_table(proved, 0.95);

    int expect_hits = 0;
    for (const Vec& x : test.inputs) {
        for (const Rule& r : table.rules)
            if (satisfies(net, r.pattern, x)) {
                ++expect_hits;
                break;
            }
    }
    DistillReport rep = benchmark(net, table, test, 11);
    ok = ok && rep.mismatches == 0;
    ok = ok && approx(rep.shortcut_rate, expect_hits / 2000.0, 1e-12);

    RuleTable empty;
    DistillReport base = benchmark(net, empty, test, 3);
    ok = ok && base.accuracy_hybrid == base.accuracy_full;

    bool direction_checked = rep.shortcut_rate >= 0.5;
    if (direction_checked) ok = ok && rep.time_hybrid_secs < rep.time_full_secs;
    report(8, "distillation exactness", ok && direction_checked,
           std::to_string(proved.size()) + " proved rules, " + std::to_string(free_count) +
               " unstable neurons, shortcut rate " + std::to_string(rep.shortcut_rate) +
               ", mismatches " + std::to_string(rep.mismatches) + ", hybrid " +
               std::to_string(rep.time_hybrid_secs) + "s vs full " +
               std::to_string(rep.time_full_secs) + "s");
}

// 9: decomposition agrees with the direct check; obligations cover A.
void criterion_decompose() {
    std::mt19937 rng(42);
    int contracts = 0, mismatches = 0, interp_contradictions = 0;
    long coverage_points = 0, uncovered = 0;
    while (contracts < 50) {
        Network net = random_network(rng, 2, {2, 2}, 2);
        Bounds abox;
        Vec c = sample_box(rng, *net.input_domain());
        const Bounds& dom = *net.input_domain();
        for (int j = 0; j < 2; ++j) {
            double w = 0.2 + 0.3 * std::abs(c[j]);
            // keep A inside the input domain so the obligations cover all of it
            abox.push_back({std::max(c[j] - w, dom[j].first), std::min(c[j] + w, dom[j].second)});
        }
        InputRegion A = region_from_box(abox);
        Dataset data;
        for (int i = 0; i < 30; ++i) data.inputs.push_back(sample_box(rng, abox));
        Postcondition B = Postcondition::prediction(predicted_class(evaluate(net, data.inputs[0])));
        DecisionPattern sigma_l =
            DecisionPattern::signature_prefix(activation_signature(net, data.inputs[0]), 1);
        ++contracts;

        Query q;
        q.input_region = A;
        q.post = B;
        Verdict direct = dp(net, q);

        ProofPlan cover = prove_via_prefix_cover(net, A, B, sigma_l, data);
        bool agree = (cover.status == PlanStatus::Proved &&
                      direct.status == VerdictStatus::Proved) ||
                     (cover.status == PlanStatus::Refuted &&
                      direct.status == VerdictStatus::Refuted);
        if (!agree) ++mismatches;

        ProofPlan interp = prove_via_interpolant(net, A, B, sigma_l, data);
        if (interp.status == PlanStatus::Proved && direct.status != VerdictStatus::Proved)
            ++interp_contradictions;
        if (interp.status == PlanStatus::Refuted && direct.status != VerdictStatus::Refuted)
            ++interp_contradictions;

        // a refuted plan's deliverable is the counterexample, not a cover
        if (cover.status == PlanStatus::Refuted) continue;
        for (int s = 0; s < 250; ++s) {
            Vec x = sample_box(rng, abox);
            ++coverage_points;
            bool covered = false;
            for (const auto& p : cover.prefixes)
                if (satisfies(net, p, x)) covered = true;
            for (const auto& cell : cover.cells) {
                bool inside = true;
                for (std::size_t j = 0; j < cell.size(); ++j)
                    if (x[j] < cell[j].first - 1e-9 || x[j] > cell[j].second + 1e-9) inside = false;
                if (inside) covered = true;
            }
            if (!covered) ++uncovered;
        }
    }
    bool ok = mismatches == 0 && interp_contradictions == 0 && coverage_points >= 10000 &&
              uncovered == 0;
    report(9, "decomposition equivalence", ok,
           std::to_string(contracts) + " contracts, " + std::to_string(mismatches) +
               " status mismatches, " + std::to_string(uncovered) + "/" +
               std::to_string(coverage_points) + " uncovered samples");
}

// 10: byte-identical CLI outputs across --jobs settings.
void criterion_determinism() {
    TempDir dir;
    Network net = example_net();
    std::string net_path = dir.write("net.json", network_to_json(net).dump());
    std::string post = dir.write(
        "post.json", R"({"kind":"linear","rows":[{"coeffs":[-1.0,1.0],"rel":"<","rhs":0.0}]})");
    std::string data = dir.write("data.csv", "0,-1\n1,0\n0,1\n4,3\n1,-1\n");
    bool ok = true;
    std::vector<std::pair<std::string, std::string>> runs = {
        {"mine-layer --net " + net_path + " --data " + data + " --layer 1 --post lin:" + post +
             " --prove --seed 42",
         "mine"},
        {"verify --net " + net_path + " --pattern " +
             dir.write("wedge.json",
                       R"([{"layer":1,"index":0,"status":"on"},{"layer":1,"index":1,"status":"off"}])") +
             " --post lin:" + post + " --seed 42",
         "verify"},
        {"infer-input --net " + net_path + " --input 1,-1 --post lin:" + post + " --seed 42",
         "infer"},
    };
    for (const auto& [args, name] : runs) {
        std::string a = dir.path() + "/" + name + "_j1.json";
        std::string b = dir.path() + "/" + name + "_j4.json";
        run_cli(args + " --jobs 1 --out " + a);
        run_cli(args + " --jobs 4 --out " + b);
        std::string ca = TempDir::slurp(a), cb = TempDir::slurp(b);
        ok = ok && !ca.empty() && ca == cb;
    }
    report(10, "seeded determinism across --jobs", ok);
}

}  // namespace

int main() {
    criterion_golden();
    criterion_relaxation();
    criterion_mining();
    criterion_oracle();
    criterion_symbolic();
    criterion_box();
    criterion_minimality();
    criterion_distill();
    criterion_decompose();
    criterion_determinism();
    if (failures == 0)
        std::printf("ALL 10 ACCEPTANCE CRITERIA PASSED\n");
    else
        std::printf("%d ACCEPTANCE CRITERIA FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
