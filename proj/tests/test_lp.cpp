#include <doctest.h>

#include <random>

#include "helpers.hpp"

using namespace relupat;

TEST_CASE("bounded maximization hits the known optimum") {
    // max 3x + 2y  s.t.  x + y <= 4, x <= 2, x,y >= 0  ->  10 at (2,2)
    LinearProgram lp;
    lp.num_vars = 2;
    lp.var_bounds = {{0.0, kInf}, {0.0, kInf}};
    lp.objective = Vec{3.0, 2.0};
    lp.add({1.0, 1.0}, Relation::Le, 4.0);
    lp.add({1.0, 0.0}, Relation::Le, 2.0);
    LpOutcome out = solve(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    CHECK(out.value == doctest::Approx(10.0));
    CHECK(out.point[0] == doctest::Approx(2.0));
    CHECK(out.point[1] == doctest::Approx(2.0));
    CHECK(check_point(lp, out.point));
}

TEST_CASE("infeasible and unbounded programs are classified") {
    LinearProgram infeas;
    infeas.num_vars = 1;
    infeas.add({1.0}, Relation::Ge, 1.0);
    infeas.add({1.0}, Relation::Le, 0.0);
    CHECK(solve(infeas).status == LpStatus::Infeasible);

    LinearProgram unbounded;
    unbounded.num_vars = 1;
    unbounded.var_bounds = {{0.0, kInf}};
    unbounded.objective = Vec{1.0};
    CHECK(solve(unbounded).status == LpStatus::Unbounded);
}

TEST_CASE("strict inequalities receive an epsilon separation") {
    LinearProgram lp;
    lp.num_vars = 1;
    lp.add({1.0}, Relation::Gt, 0.0);
    lp.add({1.0}, Relation::Lt, 1.0);
    LpOutcome out = solve(lp);
    REQUIRE(out.feasible());
    CHECK(out.point[0] > 0.0);
    CHECK(out.point[0] < 1.0);
    CHECK(check_point(lp, out.point));

    // strict constraints with no interior are infeasible under epsilon
    LinearProgram knife;
    knife.num_vars = 1;
    knife.add({1.0}, Relation::Gt, 0.0);
    knife.add({1.0}, Relation::Le, 0.0);
    CHECK_FALSE(solve(knife).feasible());
}

TEST_CASE("equalities and free variables") {
    // x + y = 3, x - y = 1 with both variables free -> (2, 1)
    LinearProgram lp;
    lp.num_vars = 2;
    lp.add({1.0, 1.0}, Relation::Eq, 3.0);
    lp.add({1.0, -1.0}, Relation::Eq, 1.0);
    LpOutcome out = solve(lp);
    REQUIRE(out.feasible());
    CHECK(out.point[0] == doctest::Approx(2.0));
    CHECK(out.point[1] == doctest::Approx(1.0));
}

TEST_CASE("negative and mixed variable bounds") {
    // max -x with x in [-5, 7] -> 5 at x = -5
    LinearProgram lp;
    lp.num_vars = 1;
    lp.var_bounds = {{-5.0, 7.0}};
    lp.objective = Vec{-1.0};
    LpOutcome out = solve(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    CHECK(out.point[0] == doctest::Approx(-5.0));
    CHECK(out.value == doctest::Approx(5.0));

    // upper-bounded-only variable: max x with x <= 3
    LinearProgram ub;
    ub.num_vars = 1;
    ub.var_bounds = {{-kInf, 3.0}};
    ub.objective = Vec{1.0};
    LpOutcome o2 = solve(ub);
    REQUIRE(o2.status == LpStatus::Optimal);
    CHECK(o2.point[0] == doctest::Approx(3.0));
}

TEST_CASE("random feasibility agrees with rejection sampling") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> cdist(-1.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        LinearProgram lp;
        lp.num_vars = 2;
        lp.var_bounds = {{-3.0, 3.0}, {-3.0, 3.0}};
        int rows = 1 + trial % 4;
        for (int r = 0; r < rows; ++r)
            lp.add({cdist(rng), cdist(rng)}, r % 2 ? Relation::Le : Relation::Ge,
                   cdist(rng));
        LpOutcome out = solve(lp);
        // sampling oracle: find any satisfying point
        bool sampled = false;
        Vec pt(2);
        for (int s = 0; s < 4000 && !sampled; ++s) {
            pt = {3.0 * cdist(rng), 3.0 * cdist(rng)};
            sampled = check_point(lp, pt, 1e-12);
        }
        if (out.feasible()) {
            CHECK(check_point(lp, out.point));
            ++checked;
        } else {
            // solver says infeasible: sampling must not find a point
            CHECK_FALSE(sampled);
        }
    }
    CHECK(checked > 50);  // the suite exercises both outcomes
}

TEST_CASE("max_box fills a triangle-bounded region") {
    // region: x + y <= 2 (nonstrict), x > 0, y > 0 within seed [0,2]^2
    Polytope poly;
    poly.nonstrict.push_back({{1.0, 1.0}, -2.0});  // x + y - 2 <= 0
    poly.strict.push_back({{1.0, 0.0}, 0.0});
    poly.strict.push_back({{0.0, 1.0}, 0.0});
    MaxBoxResult mb = max_box(poly, {{0.0, 2.0}, {0.0, 2.0}});
    REQUIRE(mb.feasible);
    double widths = 0.0;
    for (auto [lo, hi] : mb.box) {
        CHECK(lo <= hi);
        widths += hi - lo;
    }
    CHECK(widths == doctest::Approx(2.0).epsilon(1e-3));
    // every corner of the box satisfies the halfspaces
    for (int cx = 0; cx < 2; ++cx)
        for (int cy = 0; cy < 2; ++cy) {
            Vec corner = {cx ? mb.box[0].second : mb.box[0].first,
                          cy ? mb.box[1].second : mb.box[1].first};
            CHECK(poly.contains(corner, 1e-9));
        }
}

TEST_CASE("max_box shrinking seeds never enlarge the box") {
    Polytope poly;
    poly.nonstrict.push_back({{1.0, 1.0}, -2.0});
    auto widths = [](const MaxBoxResult& mb) {
        double w = 0.0;
        for (auto [lo, hi] : mb.box) w += hi - lo;
        return w;
    };
    MaxBoxResult wide = max_box(poly, {{-1.0, 2.0}, {-1.0, 2.0}});
    MaxBoxResult narrow = max_box(poly, {{-0.5, 1.0}, {-0.5, 1.0}});
    REQUIRE(wide.feasible);
    REQUIRE(narrow.feasible);
    CHECK(widths(narrow) <= widths(wide) + 1e-9);
}

TEST_CASE("max_box reports empty on contradictory seeds") {
    Polytope poly;
    poly.nonstrict.push_back({{1.0}, 5.0});  // x <= -5
    MaxBoxResult mb = max_box(poly, {{0.0, 1.0}});
    CHECK_FALSE(mb.feasible);
}
