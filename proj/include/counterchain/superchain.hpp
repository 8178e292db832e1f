#pragma once

#include <cstdint>
#include <vector>

#include "counterchain/block.hpp"
#include "counterchain/limit_laws.hpp"
#include "counterchain/log_real.hpp"
#include "counterchain/schedule.hpp"

namespace cchain {

// X_k = sum_{j <= J} h_j X_k^(j) over independent stationary blocks.
// Internally a state is a level configuration; encode() maps it to a real.
struct SuperChain {
    LevelSchedule schedule;
    int truncation_j = 0;
    std::vector<Kernel3> level_kernels;  // built from double rates, which may be 0
    std::vector<double> log_h;           // log h_j, j = 1 .. J
    LogReal trunc_eps_tail;              // bound on sum_{j > J} eps_j

    double h(int j) const;  // may be +inf for unbounded schedules
    const LevelRecord& level(int j) const { return schedule.levels[j - 1]; }
};

// Throws RangeError when J exceeds the emitted levels or the amplitudes are not
// separated (h_{j+1}/h_j >= 3 for T55, <= 1/3 otherwise).
SuperChain make_super_chain(const LevelSchedule& schedule, int truncation_j);

using LevelConfig = std::vector<int>;

// sum_j h_j s_j; zero states contribute exactly 0 even when h_j is infinite.
double encode(const SuperChain& chain, const LevelConfig& config);

// X_1 .. X_n; level j runs on its own derived seed.
std::vector<double> sample_super_path(const SuperChain& chain, std::int64_t n, std::uint64_t seed);
// Joint states (X_1 .. X_n), one configuration per time.
std::vector<LevelConfig> sample_super_configs(const SuperChain& chain, std::int64_t n, std::uint64_t seed);

// Var(X_1 + ... + X_n) = sum_j h_j^2 Var(S_n^(j)), evaluated in logs so that
// n may be far beyond 2^53 and eps_j, theta_j far below the double range.
LogReal super_variance(const SuperChain& chain, LogReal n);
// Var(S_n) / eps for one block, as a log; valid for theta = 0.
double log_block_variance_ratio(double log_theta, double log_n);

// sum_j exact_beta(kernel_j, n) + 6 * trunc_eps_tail.
double super_beta_bound(const SuperChain& chain, std::int64_t n);
// Exact beta(n) of the J-level product chain by enumerating 3^J x 3^J cells; J <= 6.
double super_beta_exact_small_j(const SuperChain& chain, std::int64_t n);
// P(config at 0 = a, config at n = b) over 3^J x 3^J cells, row-major; J <= 6.
// Configuration index: sum_j (s_j + 1) 3^(j-1).
std::vector<double> two_time_joint(const SuperChain& chain, std::int64_t n);
LevelConfig config_of_index(int index, int levels);

// Exact law of X_1 + ... + X_n for one stationary block, by forward dynamic program; n <= 1e5.
DiscreteDist block_sum_law(const Kernel3& kernel, std::int64_t n);

struct CostBudget {
    double max_steps = 1e9;  // I_j * replicates
};

// Replicates of (theta_j / h_j) sum_{k=1}^{I_j} X_k over all J levels.
// Throws BudgetError when I_j * n_rep exceeds the budget.
std::vector<double> normalized_sum_samples(const SuperChain& chain, int level_j, std::size_t n_rep,
                                           std::uint64_t seed, const CostBudget& budget = {});
// Replicates of X_1 + ... + X_n over all J levels.
std::vector<double> partial_sum_samples(const SuperChain& chain, std::int64_t n, std::size_t n_rep,
                                        std::uint64_t seed, const CostBudget& budget = {});
// Replicates of S_n for one block.
std::vector<double> block_partial_sums(const Kernel3& kernel, std::int64_t n, std::size_t n_rep,
                                       std::uint64_t seed);

}  // namespace cchain
