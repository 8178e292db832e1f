#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "counterchain/limit_laws.hpp"
#include "counterchain/report.hpp"
#include "counterchain/sequences.hpp"
#include "counterchain/superchain.hpp"
#include "counterchain/tangent.hpp"

namespace cchain {

// Upper-tail quantile Q(u) = inf{t >= 0 : P(W > t) <= u} of a nonnegative
// discrete W, as a step function: Q(u) = values[k] on [tails[k], tails[k-1]),
// with tails[-1] = 1. values ascend, tails = P(W > values[k]) descend to 0.
struct QuantileFn {
    std::vector<double> values;
    std::vector<double> tails;

    double operator()(double u) const;
};

// Throws RangeError on negative support. Mass held in tail_mass is ignored.
QuantileFn quantile_of(const DiscreteDist& dist);
// Integral of Q^2 over (0, c], 0 < c <= 1.
double tail_integral(const QuantileFn& q, double c);

// sup_r of the empirical probability of (r - width, r + width).
double concentration(std::vector<double> samples, double width);

// Law of |X_0| for the truncated chain (double-range amplitudes only).
DiscreteDist abs_marginal_law(const SuperChain& chain);
// log of the integral of Q^2_{|X_0|} over (0, e^log_c], evaluated in logs
// over the 3^J level configurations; J <= 6.
double log_tail_integral(const SuperChain& chain, double log_c);

// Y = sum_j h_j 1(A_j) with independent A_j: Q_Y = 0 on [a_1, 1) and
// Q_Y <= 2 h_{j-1} on [a_j, a_{j-1}), a_j = 2 P(A_j).
ReportFragment verify_quantile_intervals(const std::vector<double>& h, const std::vector<double>& probs);

// For x on the grid: integral of Q^2 over (0, f(x)] <= g~(x) (-phi'(x)), with g~ the
// rate builder's nondecreasing minorant of g, and per level
// h_j^2 min(f(x), eps_j) <= 2^-(j+6) g~(x) (-phi'(x)).
ReportFragment verify_t55_quantile_bound(const SuperChain& chain, const ConvexRate& phi, const PositiveSequence& g,
                                         const std::vector<double>& x_grid);

struct VerifyInputs {
    std::optional<PositiveSequence> q;  // T34 target q_n
    std::optional<PositiveSequence> g;  // T44 g_n or T55 g
    std::optional<ConvexRate> phi;      // T55 log f
};

struct VerifyBudget {
    CostBudget steps;
    std::size_t dissipation_replicates = 10'000;
    std::size_t limit_replicates = 100'000;
    std::int64_t beta_n_max = 500;
    std::int64_t variance_span = 1000;
    double ks_tolerance = 0.05;
    double concentration_slack = 0.02;
};

// Runs the checks that apply to the schedule's theorem: variance growth,
// dissipation trend and limit law (T34, SmallI); beta bound (T44, T55);
// quantile bound (T55). Budget overruns become skipped checks.
RunReport verify_theorem(const SuperChain& chain, const VerifyInputs& in, const VerifyBudget& budget,
                         std::uint64_t seed);

// Levels whose I_j is simulable within the budget, thinned so that I_j strictly increases.
std::vector<int> feasible_limit_levels(const SuperChain& chain, std::size_t n_rep, const CostBudget& budget);

}  // namespace cchain
