#include <cmath>
#include <numeric>

#include "counterchain/block.hpp"
#include "counterchain/errors.hpp"
#include "doctest.h"

using namespace cchain;

namespace {

const double kGrid[] = {1.0 / 9, 1.0 / 27, 1.0 / 81, 1.0 / 243};

}  // namespace

TEST_CASE("construct_block rejects parameters outside (0, 1/9]") {
    CHECK_THROWS_AS(construct_block(0.0, 0.1), RangeError);
    CHECK_THROWS_AS(construct_block(0.12, 0.1), RangeError);
    CHECK_THROWS_AS(construct_block(0.1, 0.2), RangeError);
    CHECK_THROWS_AS(construct_block(std::nan(""), 0.1), RangeError);
    CHECK_NOTHROW(construct_block(1.0 / 9, 1.0 / 9));
}

TEST_CASE("horizon for (1/9, 1/9) is 72") {
    const auto [bp, k] = construct_block(1.0 / 9, 1.0 / 9);
    CHECK(bp.theta_star == doctest::Approx(1.0 / 8));
    CHECK(bp.i_cap == 72);
    CHECK(block_horizon(1.0 / 27, 1.0 / 27) == 702);
}

TEST_CASE("rows are stochastic and the marginal is stationary") {
    for (double e : kGrid) {
        for (double t : kGrid) {
            const auto [bp, k] = construct_block(e, t);
            CHECK(k.marginal[0] == doctest::Approx(e / 2));
            CHECK(k.marginal[1] == doctest::Approx(1 - e));
            for (int i = 0; i < 3; ++i) {
                double row = 0.0, col = 0.0;
                for (int j = 0; j < 3; ++j) {
                    CHECK(k.transition[i][j] >= 0.0);
                    row += k.transition[i][j];
                    col += k.marginal[j] * k.transition[j][i];
                }
                CHECK(std::fabs(row - 1.0) <= 1e-15);
                CHECK(std::fabs(col - k.marginal[i]) <= 1e-15);
            }
        }
    }
}

TEST_CASE("one-step joint is symmetric") {
    for (double e : kGrid)
        for (double t : kGrid) {
            const auto [bp, k] = construct_block(e, t);
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) CHECK(std::fabs(k.joint[a][b] - k.joint[b][a]) <= 1e-14);
        }
}

TEST_CASE("covariance equals eps (1 - theta)^n") {
    for (double e : kGrid)
        for (double t : kGrid) {
            const auto [bp, k] = construct_block(e, t);
            for (std::int64_t n : {1, 2, 7, 50, 200}) {
                const double closed = e * std::pow(1 - t, static_cast<double>(n));
                CHECK(std::fabs(exact_cov(k, n) - closed) <= 1e-12 * closed);
            }
        }
}

TEST_CASE("mixing coefficients obey 2 alpha <= beta <= 6 eps (1 - theta)^n") {
    for (double e : kGrid)
        for (double t : kGrid) {
            const auto [bp, k] = construct_block(e, t);
            double prev = 1.0;
            for (std::int64_t n = 1; n <= 60; ++n) {
                const double beta = exact_beta(k, n), alpha = exact_alpha(k, n);
                CHECK(2 * alpha <= beta + 1e-16);
                CHECK(beta <= 6 * e * std::pow(1 - t, static_cast<double>(n)));
                CHECK(beta <= prev + 1e-16);
                prev = beta;
            }
        }
}

TEST_CASE("n-step joint preserves the marginals") {
    const auto [bp, k] = construct_block(1.0 / 27, 1.0 / 81);
    for (std::int64_t n : {1, 10, 1000, 1000000}) {
        const Mat3 j = n_step_joint(k, n);
        for (int a = 0; a < 3; ++a) {
            double row = 0.0;
            for (int b = 0; b < 3; ++b) row += j[a][b];
            CHECK(row == doctest::Approx(k.marginal[a]).epsilon(1e-12));
        }
    }
}

TEST_CASE("partial sum variance matches the covariance sum") {
    const auto [bp, k] = construct_block(1.0 / 9, 1.0 / 27);
    for (std::int64_t n : {1, 2, 10, 100}) {
        double v = n * bp.epsilon;
        for (std::int64_t l = 1; l < n; ++l) v += 2.0 * (n - l) * exact_cov(k, l);
        CHECK(partial_sum_variance(bp, n) == doctest::Approx(v).epsilon(1e-12));
        CHECK(partial_sum_variance(bp.epsilon, bp.theta, static_cast<double>(n)) == doctest::Approx(v).epsilon(1e-12));
    }
    // theta = 0: a frozen block has Var(S_n) = eps n^2.
    CHECK(partial_sum_variance(0.01, 0.0, 1000.0) == doctest::Approx(0.01 * 1e6));
}

TEST_CASE("sampled path frequencies approach the marginal") {
    const auto [bp, k] = construct_block(1.0 / 9, 1.0 / 9);
    const auto path = sample_block_path(bp, k, 200000, 11);
    REQUIRE(path.size() == 200000);
    double nonzero = 0.0, sum = 0.0;
    for (auto x : path) {
        nonzero += x != 0;
        sum += x;
    }
    CHECK(nonzero / 200000 == doctest::Approx(1.0 / 9).epsilon(0.05));
    CHECK(std::fabs(sum / 200000) < 0.01);
    CHECK(sample_block_path(bp, k, 1000, 11) == sample_block_path(bp, k, 1000, 11));
}

TEST_CASE("walker sums agree with per-step paths in law") {
    const auto [bp, k] = construct_block(1.0 / 9, 1.0 / 9);
    Engine eng = make_engine(3, 1);
    double s2 = 0.0;
    const int reps = 20000;
    for (int r = 0; r < reps; ++r) {
        BlockWalker w(k, eng);
        const double s = static_cast<double>(w.advance_sum(100, eng));
        s2 += s * s;
    }
    CHECK(s2 / reps == doctest::Approx(partial_sum_variance(bp, 100)).epsilon(0.05));
}
