#include <cmath>

#include "counterchain/errors.hpp"
#include "counterchain/rng.hpp"
#include "counterchain/sequences.hpp"
#include "counterchain/tangent.hpp"
#include "doctest.h"

using namespace cchain;

TEST_CASE("preset rates pass validation") {
    CHECK_NOTHROW(validate_rate(neg_log_rate()));
    CHECK_NOTHROW(validate_rate(log_power_rate(2.0)));
    CHECK_NOTHROW(validate_rate(log_subexp_rate(0.5)));
    CHECK_THROWS_AS(log_power_rate(0.0), RangeError);
    CHECK_THROWS_AS(log_subexp_rate(1.0), RangeError);
}

TEST_CASE("validation names a concave rate") {
    ConvexRate bad;
    bad.name = "concave";
    bad.value = [](double x) { return -x * x / 1e6; };
    bad.derivative = [](double x) { return -2 * x / 1e6; };
    CHECK_THROWS_AS(validate_rate(bad), RangeError);
}

TEST_CASE("log forms agree with the plain forms") {
    for (const ConvexRate& r : {neg_log_rate(), log_power_rate(3.0), log_subexp_rate(0.3)}) {
        for (double x : {1.5, 10.0, 1e4, 1e12}) {
            const double v = std::log(x);
            CHECK(r.phi_log(v) == doctest::Approx(r.value(x)).epsilon(1e-12));
            CHECK(r.log_neg_slope(v) == doctest::Approx(std::log(-r.derivative(x))).epsilon(1e-12));
            const AffineLine l = tangent_at(r, x);
            CHECK(r.intercept_log(v) == doctest::Approx(l.intercept).epsilon(1e-9));
        }
    }
}

TEST_CASE("tangent lines are supporting lines") {
    Engine eng = make_engine(1, 2);
    for (int i = 0; i < 300; ++i) {
        const ConvexRate r = i % 2 ? log_subexp_rate(0.5) : log_power_rate(2.0);
        const double y = 1.0 + std::exp(10 * uniform_open(eng));
        const AffineLine l = tangent_at(r, y);
        CHECK(l.at(y) == doctest::Approx(r.value(y)));
        for (double x : {1.0, y / 2 + 0.5, 2 * y, 100 * y}) CHECK(l.at(x) <= r.value(x) + 1e-9 * (1 + std::fabs(r.value(x))));
    }
    CHECK_THROWS_AS(tangent_at(neg_log_rate(), 1.0), RangeError);
}

TEST_CASE("find_T matches the analytic threshold for -log x") {
    for (double d : {-0.5, -2.0, -8.0})
        for (double s : {0.5, 1e-2, 1e-5}) {
            const double oracle = std::max(1 / s, std::exp(1 - d));
            CHECK(find_T(neg_log_rate(), d, s) == doctest::Approx(oracle).epsilon(1e-12));
        }
    CHECK_THROWS_AS(find_T(neg_log_rate(), 0.0, 0.1), RangeError);
    CHECK_THROWS_AS(find_T(neg_log_rate(), -1.0, 0.0), RangeError);
}

TEST_CASE("find_T conditions hold for the power and subexp rates") {
    for (const ConvexRate& r : {log_power_rate(2.0), log_subexp_rate(0.5)}) {
        const double t = find_T(r, -3.0, 1e-3);
        for (double m : {1.0, 3.0, 50.0}) {
            const AffineLine l = tangent_at(r, t * m);
            CHECK(l.slope >= -1e-3 * (1 + 1e-12));
            CHECK(l.intercept <= -3.0 + 1e-9);
        }
    }
}

TEST_CASE("log search runs far past the double range") {
    const double v = find_T_log(neg_log_rate(), -1e6, std::log(1e-3), kLogSearchCap);
    CHECK(v == doctest::Approx(1e6 + 1).epsilon(1e-12));
}

TEST_CASE("first_log_crossing reports a missing crossing") {
    CHECK_THROWS_AS(first_log_crossing([](double) { return false; }, 0.0, 100.0, "never"), SearchError);
    const double v = first_log_crossing([](double v) { return v >= 3.0; }, 0.0, 100.0, "three");
    CHECK(v == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("find_T_star satisfies its inequalities") {
    PsiFunction psi;
    psi.value = [](double x) { return std::log(x); };
    psi.value_at_log = [](double v) { return v; };
    for (double b : {0.5, 4.0}) {
        const TStarResult r = find_T_star_log(neg_log_rate(), psi, b, -1.0, std::log(0.05), kLogSearchCap);
        CHECK(r.log_q >= std::log(b) - 1e-12);
        CHECK(t_star_violation(neg_log_rate(), psi, b, -1.0, r.log_t) <= 1e-9);
        CHECK(find_T_star(neg_log_rate(), psi, b, -1.0, 0.05) == doctest::Approx(std::exp(r.log_t)));
    }
}

TEST_CASE("rate builder h: bounds, monotonicity, divergence") {
    const ConvexRate r = log_power_rate(2.0);
    const PositiveSequence g = log_e_plus_sequence();
    PiecewiseH h = build_h([r](double v) { return r.log_neg_slope(v); },
                           [g](double v) { return std::exp(g.log_at_log(v)); }, 60.0);
    CHECK(h.levels() >= 2);
    CHECK(h.at(1.0) == 1.0);
    double prev = 0.0, prev_hf = INFINITY;
    for (int k = 0; k <= 600; ++k) {
        const double v = 0.1 * k;
        const double hv = h.at_log(v);
        CHECK(hv >= 1.0);
        CHECK(hv <= std::exp(g.log_at_log(v)) * (1 + 1e-12));
        CHECK(hv >= prev);
        const double hf = std::log(hv) + r.log_neg_slope(v);
        CHECK(hf <= prev_hf + 1e-12 * std::fabs(hf));
        prev = hv;
        prev_hf = hf;
    }
    const double v5 = h.first_log_reaching(5.0);
    CHECK(h.at_log(v5) >= 5.0);
    CHECK(h.at_log(v5 * (1 - 1e-9)) < 5.0);
}
