#include <cmath>

#include "counterchain/errors.hpp"
#include "counterchain/limit_laws.hpp"
#include "doctest.h"

using namespace cchain;

TEST_CASE("g pmf sums to one and is symmetric") {
    for (double a : {0.9, 0.1, 1e-3}) {
        for (double p : {0.5, 0.1, 0.01}) {
            const DiscreteDist d = g_dist(a, p);
            CHECK_NOTHROW(d.validate());
            CHECK(d.mass() + d.tail_mass == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(d.prob_at(0) == doctest::Approx(1 - a));
            for (int k = 1; k <= 5; ++k) CHECK(g_pmf(a, p, k) == g_pmf(a, p, -k));
            CHECK(std::fabs(d.mean()) < 1e-12);
            // Second moment of g_{a,p}: a (2 - p) / p^2, less the k^2-weighted mass cut at 1e-12.
            CHECK(d.second_moment() == doctest::Approx(a * (2 - p) / (p * p)).epsilon(1e-6));
        }
    }
}

TEST_CASE("g sampler frequencies match the pmf") {
    const double a = 0.3, p = 0.4;
    const auto s = g_sampler(a, p, 21, 400000);
    double zero = 0, one = 0, minus_two = 0;
    for (auto k : s) {
        zero += k == 0;
        one += k == 1;
        minus_two += k == -2;
    }
    CHECK(zero / s.size() == doctest::Approx(g_pmf(a, p, 0)).epsilon(0.01));
    CHECK(one / s.size() == doctest::Approx(g_pmf(a, p, 1)).epsilon(0.03));
    CHECK(minus_two / s.size() == doctest::Approx(g_pmf(a, p, -2)).epsilon(0.04));
}

TEST_CASE("mu_P1sL char function oracle") {
    CHECK(mu_p1sl_char_fn(0.0) == 1.0);
    CHECK(mu_p1sl_char_fn(1.0) == doctest::Approx(std::exp(-0.5)));
    CHECK(mu_p1sl_char_fn(1e6) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("mu_P1sL samples are reproducible and centered") {
    const auto a = sample_mu_p1sl(5, 100000);
    CHECK(a == sample_mu_p1sl(5, 100000));
    double m = 0;
    for (double x : a) m += x;
    CHECK(std::fabs(m / a.size()) < 0.02);
}

TEST_CASE("compound pmf of a two-point law is binomial") {
    DiscreteDist b;
    b.support = {0, 1};
    b.probs = {0.7, 0.3};
    const DiscreteDist c = compound_pmf(b, 10);
    CHECK(c.prob_at(0) == doctest::Approx(std::pow(0.7, 10)));
    CHECK(c.prob_at(3) == doctest::Approx(120 * std::pow(0.3, 3) * std::pow(0.7, 7)));
    CHECK(c.mean() == doctest::Approx(3.0));
    CHECK_THROWS_AS(compound_pmf(b, 0), RangeError);
}

TEST_CASE("compound variance adds") {
    const DiscreteDist g = g_dist(0.2, 0.3);
    const DiscreteDist c = compound_pmf(g, 25);
    CHECK(c.second_moment() == doctest::Approx(25 * g.second_moment()).epsilon(1e-9));
}

TEST_CASE("tv distance") {
    const DiscreteDist x = DiscreteDist::point_mass(0), y = DiscreteDist::point_mass(1);
    CHECK(tv_distance(x, x) == 0.0);
    CHECK(tv_distance(x, y) == doctest::Approx(1.0));
}

TEST_CASE("ks distances") {
    CHECK(ks_distance({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(ks_distance({0, 0}, {1, 1}) == doctest::Approx(1.0));
    const auto u = ks_distance_to_cdf({0.25, 0.75}, [](double x) { return std::clamp(x, 0.0, 1.0); });
    CHECK(u == doctest::Approx(0.25));
}

TEST_CASE("scaled geometric sums need a j_count in [0.5, 2]") {
    CHECK_THROWS_AS(check_scaled_geometric_sums(0.1, 0.1, 100, 1, 10), RangeError);
    const ScaledGeometricSample s = scaled_geometric_samples(0.1, 0.1, 10, 1, 1000);
    CHECK(s.scaled_sums.size() == 1000);
    CHECK(s.reference.size() == 1000);
}

TEST_CASE("scaled geometric sums approach mu_P1sL as p shrinks") {
    const double far = check_scaled_geometric_sums(0.2, 0.2, 5, 9, 20000);
    const double near = check_scaled_geometric_sums(0.002, 0.002, 500, 9, 20000);
    CHECK(near < far);
    CHECK(near < 0.02);
}
