#include <cmath>
#include <set>

#include "counterchain/errors.hpp"
#include "counterchain/superchain.hpp"
#include "doctest.h"

using namespace cchain;

TEST_CASE("truncation and separation are enforced") {
    const LevelSchedule s = schedule_small_i(3);
    CHECK_THROWS_AS(make_super_chain(s, 4), RangeError);
    CHECK_THROWS_AS(make_super_chain(s, 0), RangeError);
    LevelSchedule bad = s;
    bad.levels[1].h = bad.levels[0].h;
    CHECK_THROWS_AS(make_super_chain(bad, 2), RangeError);
}

TEST_CASE("encoding is injective over level configurations") {
    const SuperChain c = make_super_chain(schedule_small_i(4), 4);
    std::set<double> seen;
    for (int i = 0; i < 81; ++i) seen.insert(encode(c, config_of_index(i, 4)));
    CHECK(seen.size() == 81);
    CHECK(encode(c, {0, 0, 0, 0}) == 0.0);
}

TEST_CASE("two-time joint sums to one and is symmetric") {
    const SuperChain c = make_super_chain(schedule_small_i(3), 3);
    for (std::int64_t n : {1, 3, 40}) {
        const auto j = two_time_joint(c, n);
        REQUIRE(j.size() == 27u * 27u);
        double total = 0.0;
        for (double p : j) total += p;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        for (int a = 0; a < 27; ++a)
            for (int b = 0; b < a; ++b) CHECK(std::fabs(j[a * 27 + b] - j[b * 27 + a]) <= 1e-13);
    }
}

TEST_CASE("beta bound dominates the exact product-chain beta") {
    const SuperChain c = make_super_chain(schedule_small_i(3), 3);
    for (std::int64_t n : {1, 5, 50}) {
        const double exact = super_beta_exact_small_j(c, n);
        CHECK(exact <= super_beta_bound(c, n));
        CHECK(exact >= 0.0);
    }
}

TEST_CASE("super variance sums the level variances") {
    const SuperChain c = make_super_chain(schedule_small_i(2), 2);
    for (double n : {1.0, 10.0, 1000.0}) {
        double v = 0.0;
        for (int j = 1; j <= 2; ++j) {
            const BlockParams b = c.level(j).block();
            v += c.h(j) * c.h(j) * partial_sum_variance(b.epsilon, b.theta, n);
        }
        CHECK(super_variance(c, LogReal::from_value(n)).value() == doctest::Approx(v).epsilon(1e-10));
    }
}

TEST_CASE("block variance ratio agrees with the exact formula across branches") {
    for (double theta : {1e-2, 1e-6, 1e-12}) {
        for (double n : {10.0, 1e4, 1e8, 1e12}) {
            const double exact = partial_sum_variance(1.0, theta, n);
            CHECK(log_block_variance_ratio(std::log(theta), std::log(n)) ==
                  doctest::Approx(std::log(exact)).epsilon(1e-9));
        }
    }
    // Frozen block: Var(S_n) = eps n^2.
    CHECK(log_block_variance_ratio(-INFINITY, std::log(1e30)) == doctest::Approx(2 * std::log(1e30)));
    // Far beyond double range in n with theta underflowing.
    const double v = log_block_variance_ratio(-1e5, 1e4);
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(2e4).epsilon(1e-12));
}

TEST_CASE("block sum law matches simulation moments") {
    const auto [bp, k] = construct_block(1.0 / 9, 1.0 / 9);
    const DiscreteDist d = block_sum_law(k, 72);
    CHECK(d.mass() + d.tail_mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(d.mean()) < 1e-12);
    CHECK(d.second_moment() == doctest::Approx(partial_sum_variance(bp, 72)).epsilon(1e-10));
}

TEST_CASE("sampling is reproducible and stationary") {
    const SuperChain c = make_super_chain(schedule_small_i(2), 2);
    CHECK(sample_super_path(c, 500, 9) == sample_super_path(c, 500, 9));
    const auto configs = sample_super_configs(c, 100, 9);
    const auto path = sample_super_path(c, 100, 9);
    REQUIRE(configs.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) CHECK(encode(c, configs[i]) == path[i]);

    const auto sums = partial_sum_samples(c, 200, 20000, 4);
    double s2 = 0.0;
    for (double x : sums) s2 += x * x;
    CHECK(s2 / sums.size() == doctest::Approx(super_variance(c, LogReal::from_value(200)).value()).epsilon(0.05));
}

TEST_CASE("budget errors are raised before sampling") {
    const SuperChain c = make_super_chain(schedule_small_i(2), 2);
    CHECK_THROWS_AS(normalized_sum_samples(c, 2, 100000, 1), BudgetError);
    CostBudget tiny{100.0};
    CHECK_THROWS_AS(partial_sum_samples(c, 1000, 1000, 1, tiny), BudgetError);
    CHECK(normalized_sum_samples(c, 1, 1000, 1).size() == 1000);
}

TEST_CASE("property: marginal second moment is sum h_j^2 eps_j") {
    const SuperChain c = make_super_chain(schedule_small_i(3), 3);
    double m2 = 0.0, direct = 0.0;
    for (int j = 1; j <= 3; ++j) m2 += c.h(j) * c.h(j) * c.level(j).epsilon.value();
    for (int idx = 0; idx < 27; ++idx) {
        const LevelConfig cfg = config_of_index(idx, 3);
        double p = 1.0;
        for (int j = 0; j < 3; ++j) {
            const double e = c.level(j + 1).epsilon.value();
            p *= cfg[j] == 0 ? 1.0 - e : e / 2.0;
        }
        const double x = encode(c, cfg);
        direct += p * x * x;
    }
    CHECK(direct == doctest::Approx(m2).epsilon(1e-12));
    CHECK(super_variance(c, LogReal::one()).value() == doctest::Approx(m2).epsilon(1e-12));
}

TEST_CASE("property: bounded schedules keep |X| <= 1/2") {
    for (const LevelSchedule& s : {schedule_t34(log_inverse_sequence(), 5), schedule_t44(log_sequence(), 5)}) {
        const SuperChain c = make_super_chain(s, 5);
        double total = 0.0;
        for (int j = 1; j <= 5; ++j) total += c.h(j);
        CHECK(total <= 0.5);
        CHECK(encode(c, LevelConfig(5, 1)) <= 0.5);
    }
}

TEST_CASE("property: encoding injective over sampled configuration pairs") {
    const SuperChain c = make_super_chain(schedule_t44(log_sequence(), 6), 6);
    Engine eng = make_engine(99, 1);
    std::uniform_int_distribution<int> state(-1, 1);
    int collisions = 0;
    for (int r = 0; r < 100000; ++r) {
        LevelConfig a(6), b(6);
        for (int j = 0; j < 6; ++j) {
            a[j] = state(eng);
            b[j] = state(eng);
        }
        if (a != b && encode(c, a) == encode(c, b)) ++collisions;
    }
    CHECK(collisions == 0);
}

TEST_CASE("block sum law small cases") {
    const auto [bp, k] = construct_block(1.0 / 9, 1.0 / 9);
    const DiscreteDist one = block_sum_law(k, 1);
    CHECK(one.prob_at(1) == doctest::Approx(1.0 / 18));
    CHECK(one.prob_at(0) == doctest::Approx(8.0 / 9));
    CHECK(block_sum_law(k, 2).prob_at(2) == doctest::Approx(4.0 / 81));
    CHECK_THROWS_AS(block_sum_law(k, 100001), RangeError);
}
