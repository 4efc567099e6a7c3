#include <doctest.h>

#include <random>

#include "helpers.hpp"

using namespace relupat;
using testutil::example_net;
using testutil::sample_box;
using testutil::wedge_pattern;

TEST_CASE("wedge box from its two supporters stays in the region") {
    Bounds domain{{-5.0, 5.0}, {-5.0, 5.0}};
    Network net = example_net(domain);
    std::vector<Vec> supporters = {{0.0, -1.0}, {1.0, -1.0}};
    BoxResult b = under_approx_box(net, wedge_pattern(), supporters);
    REQUIRE_FALSE(b.empty);
    std::mt19937 rng(3);
    for (int s = 0; s < 2000; ++s) CHECK(satisfies(net, wedge_pattern(), sample_box(rng, b.box)));
}

TEST_CASE("box requests validate their inputs") {
    Network net = example_net(Bounds{{-5.0, 5.0}, {-5.0, 5.0}});
    DecisionPattern frontier;
    frontier.set({2, 0}, Status::On);
    CHECK_THROWS_AS(under_approx_box(net, frontier, {}), Error);  // not closed
    CHECK_THROWS_AS(under_approx_box(net, wedge_pattern(), {{0.0, 1.0}}), Error);  // bad support
    // no support: seed falls back to the input domain
    CHECK_NOTHROW(under_approx_box(net, wedge_pattern(), {}));
    Network bare = example_net();
    CHECK_THROWS_AS(under_approx_box(bare, wedge_pattern(), {}), Error);  // nothing to seed from
}

TEST_CASE("random closed patterns give sound boxes") {
    std::mt19937 rng(13);
    for (int t = 0; t < 25; ++t) {
        Network net = random_network(rng, 2, {3, 2}, 2);
        DecisionPattern sigma = random_closed_pattern(rng, net);
        BoxResult b = under_approx_box(net, sigma, {});
        if (b.empty) continue;
        for (int s = 0; s < 400; ++s) {
            Vec x = sample_box(rng, b.box);
            CHECK(satisfies(net, sigma, x));
        }
    }
}

TEST_CASE("minimal assignment on the wedge frees nothing spurious") {
    Bounds domain{{-5.0, 5.0}, {-5.0, 5.0}};
    Network net = example_net(domain);
    MinimalAssignment a = minimal_assignment(net, wedge_pattern(), {1.0, -2.0});
    CHECK_FALSE(a.partial);
    CHECK(a.fixed.size() + a.free.size() == 2);
    // whichever indices stay fixed must be jointly sufficient:
    InputRegion region;
    for (int j = 0; j < 2; ++j) {
        Vec e(2, 0.0);
        e[j] = 1.0;
        if (a.fixed.count(j)) {
            region.push_back({e, Relation::Eq, a.fixed.at(j)});
        } else {
            region.push_back({e, Relation::Ge, domain[j].first});
            region.push_back({Vec(e), Relation::Le, domain[j].second});
        }
    }
    CHECK(prove_region_implies_pattern(net, region, wedge_pattern()).status ==
          VerdictStatus::Proved);
    // and greedily minimal: re-freeing any fixed index must break the implication
    for (const auto& [idx, val] : a.fixed) {
        InputRegion weaker;
        for (int j = 0; j < 2; ++j) {
            Vec e(2, 0.0);
            e[j] = 1.0;
            if (a.fixed.count(j) && j != idx) {
                weaker.push_back({e, Relation::Eq, a.fixed.at(j)});
            } else {
                weaker.push_back({e, Relation::Ge, domain[j].first});
                weaker.push_back({Vec(e), Relation::Le, domain[j].second});
            }
        }
        CHECK(prove_region_implies_pattern(net, weaker, wedge_pattern()).status !=
              VerdictStatus::Proved);
    }
}

TEST_CASE("minimal assignment requires a satisfying input and a domain") {
    Network net = example_net(Bounds{{-5.0, 5.0}, {-5.0, 5.0}});
    CHECK_THROWS_AS(minimal_assignment(net, wedge_pattern(), {0.0, 1.0}), Error);
    Network bare = example_net();
    CHECK_THROWS_AS(minimal_assignment(bare, wedge_pattern(), {1.0, -2.0}), Error);
}

TEST_CASE("box text collapses point dimensions") {
    BoxResult b;
    b.empty = false;
    b.box = {{1.0, 1.0}, {-2.0, 3.0}};
    std::string txt = box_to_text(b, {"psi", "rho"});
    CHECK(txt.find("psi = ") != std::string::npos);
    CHECK(txt.find("<= rho <=") != std::string::npos);
    CHECK(box_to_text(BoxResult{}, {}) == "(empty box)");
}

TEST_CASE("assignment JSON shape") {
    MinimalAssignment a;
    a.fixed = {{0, 1.5}};
    a.free = {1};
    auto j = assignment_to_json(a);
    CHECK(j["fixed"][0]["index"] == 0);
    CHECK(j["free"][0] == 1);
    CHECK(j["partial"] == false);
}
