#include <cmath>

#include "counterchain/diagnostics.hpp"
#include "counterchain/errors.hpp"
#include "doctest.h"

using namespace cchain;

namespace {

DiscreteDist law(std::vector<double> x, std::vector<double> p) {
    DiscreteDist d;
    d.support = std::move(x);
    d.probs = std::move(p);
    return d;
}

}  // namespace

TEST_CASE("quantile of a three-point law") {
    // P(W=0)=0.5, P(W=1)=0.3, P(W=4)=0.2.
    const QuantileFn q = quantile_of(law({0, 1, 4}, {0.5, 0.3, 0.2}));
    CHECK(q(0.9) == 0.0);
    CHECK(q(0.5) == 0.0);
    CHECK(q(0.49) == 1.0);
    CHECK(q(0.2) == 1.0);
    CHECK(q(0.19) == 4.0);
    CHECK(q(0.0) == 4.0);
    CHECK_THROWS_AS(quantile_of(law({-1, 1}, {0.5, 0.5})), RangeError);
}

TEST_CASE("tail integral oracle") {
    const QuantileFn q = quantile_of(law({0, 1, 4}, {0.5, 0.3, 0.2}));
    CHECK(tail_integral(q, 1.0) == doctest::Approx(16 * 0.2 + 1 * 0.3));
    CHECK(tail_integral(q, 0.1) == doctest::Approx(1.6));
    CHECK(tail_integral(q, 0.3) == doctest::Approx(3.2 + 0.1));
    CHECK_THROWS_AS(tail_integral(q, 0.0), RangeError);
}

TEST_CASE("concentration counts the fullest open window") {
    CHECK(concentration({0, 0.5, 1.9, 5}, 1.0) == doctest::Approx(0.75));
    CHECK(concentration({0, 2}, 1.0) == doctest::Approx(0.5));  // width 2 is open
    CHECK(concentration({3, 3, 3}, 0.1) == 1.0);
}

TEST_CASE("quantile intervals hold for h = (1, 2, 4, 8)") {
    const ReportFragment f = verify_quantile_intervals({1, 2, 4, 8}, {0.25, 0.0625, 0.015625, 0.00390625});
    CHECK(f.all_passed());
    CHECK(f.checks.size() == 4);
    CHECK_THROWS_AS(verify_quantile_intervals({1, 1.5}, {0.25, 0.1}), RangeError);
    CHECK_THROWS_AS(verify_quantile_intervals({1, 2}, {0.6, 0.1}), RangeError);
}

TEST_CASE("log tail integral agrees with the direct quantile integral") {
    const SuperChain c = make_super_chain(schedule_small_i(3), 3);
    const QuantileFn q = quantile_of(abs_marginal_law(c));
    for (double u : {1e-6, 1e-3, 0.05, 0.2}) {
        CHECK(log_tail_integral(c, std::log(u)) == doctest::Approx(std::log(tail_integral(q, u))).epsilon(1e-9));
    }
}

TEST_CASE("absolute marginal law sums to one") {
    const SuperChain c = make_super_chain(schedule_small_i(3), 3);
    const DiscreteDist d = abs_marginal_law(c);
    CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.support.size() == 14);  // zero plus 13 distinct magnitudes from 26 nonzero configurations
}

TEST_CASE("quantile bound passes for the power preset") {
    const ConvexRate phi = log_power_rate(2.0);
    const LevelSchedule s = schedule_t55(phi, log_e_plus_sequence(), find_w(phi), 1);
    REQUIRE(s.emitted() == 1);
    const SuperChain c = make_super_chain(s, 1);
    const ReportFragment f = verify_t55_quantile_bound(c, phi, log_e_plus_sequence(), {2, 16, 128, 1024});
    CHECK(f.all_passed());
}

TEST_CASE("verify on the small-horizon chain passes and is reproducible") {
    const SuperChain c = make_super_chain(schedule_small_i(3), 3);
    VerifyBudget b;
    b.dissipation_replicates = 2000;
    b.limit_replicates = 20000;
    const RunReport r1 = verify_theorem(c, {}, b, 17);
    const RunReport r2 = verify_theorem(c, {}, b, 17);
    CHECK(r1.to_json().dump() == r2.to_json().dump());
    const CheckRecord* lim = r1.body.find("limit law distance");
    REQUIRE(lim != nullptr);
    CHECK(lim->measured < 0.1);
}

TEST_CASE("feasible levels respect the budget") {
    const SuperChain c = make_super_chain(schedule_small_i(3), 3);
    const auto levels = feasible_limit_levels(c, 100000, CostBudget{});
    REQUIRE(levels.size() == 1);
    CHECK(levels[0] == 1);
    CHECK(feasible_limit_levels(c, 10, CostBudget{1e9}).size() == 2);
}

TEST_CASE("property: integral of Q^2 over (0, 1] is E(W^2)") {
    const SuperChain c = make_super_chain(schedule_small_i(3), 3);
    const DiscreteDist d = abs_marginal_law(c);
    CHECK(tail_integral(quantile_of(d), 1.0) == doctest::Approx(d.second_moment()).epsilon(1e-10));
    const DiscreteDist w = law({0, 0.5, 2, 7}, {0.4, 0.3, 0.2, 0.1});
    CHECK(tail_integral(quantile_of(w), 1.0) == doctest::Approx(w.second_moment()).epsilon(1e-12));
}

TEST_CASE("property: quantile function is nonincreasing and right-continuous") {
    const QuantileFn q = quantile_of(law({0, 1, 4, 9}, {0.4, 0.3, 0.2, 0.1}));
    double prev = INFINITY;
    for (int k = 1; k < 1000; ++k) {
        const double u = k / 1000.0;
        CHECK(q(u) <= prev);
        prev = q(u);
        CHECK(q(u) >= 0.0);
    }
    CHECK(q(0.1) == q(0.1 + 1e-12));
}
