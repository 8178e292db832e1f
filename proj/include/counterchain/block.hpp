#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "counterchain/rng.hpp"

namespace cchain {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

// States are always ordered (-1, 0, +1); index = state + 1.
inline constexpr std::array<int, 3> kStates = {-1, 0, 1};
constexpr int state_index(int s) { return s + 1; }

struct BlockParams {
    double epsilon = 0.0;
    double theta = 0.0;
    double theta_star = 0.0;
    std::int64_t i_cap = 0;  // floor(1 / (theta_star * epsilon))
};

struct Kernel3 {
    Mat3 transition{};
    Vec3 marginal{};
    Mat3 joint{};
    // Probability of leaving each state in one step, kept separately so that
    // rates far below machine epsilon survive (1 - p_00 would round to 0).
    Vec3 leave{};
};

// Building block with marginal (eps/2, 1-eps, eps/2); throws RangeError outside (0, 1/9]^2.
std::pair<BlockParams, Kernel3> construct_block(double epsilon, double theta);

// floor(1 / (theta_star * epsilon)), exact for rational inputs near an integer.
std::int64_t block_horizon(double epsilon, double theta);

// Same matrices without the range checks. Accepts epsilon = 0 (inert level) or
// theta = 0 (frozen level); used for schedule levels whose rates underflow.
Kernel3 make_kernel(double epsilon, double theta);

// P(X_0 = i, X_n = j); n <= 1e6.
Mat3 n_step_joint(const Kernel3& kernel, std::int64_t n);

double exact_cov(const Kernel3& kernel, std::int64_t n);
// Absolute regularity between sigma(X_0) and sigma(X_n); n >= 1.
double exact_beta(const Kernel3& kernel, std::int64_t n);
// Strong mixing between sigma(X_0) and sigma(X_n) over all 64 event pairs; n >= 1.
double exact_alpha(const Kernel3& kernel, std::int64_t n);

// Var(X_1 + ... + X_n) for a stationary block.
double partial_sum_variance(const BlockParams& block, std::int64_t n);
// Real-valued extension in n >= 1, valid for theta in [0, 1) including theta = 0.
double partial_sum_variance(double epsilon, double theta, double n);

// Stationary path X_1..X_n.
std::vector<std::int8_t> sample_block_path(const BlockParams& block, const Kernel3& kernel,
                                           std::int64_t n, std::uint64_t seed);

// Sojourn-based stationary walker: cost per call is proportional to the number
// of state changes, not the number of steps.
class BlockWalker {
public:
    BlockWalker(const Kernel3& kernel, Engine& eng);

    int state() const { return state_; }
    // Sum of the next m states (the current one included), then moves past them.
    std::int64_t advance_sum(std::int64_t m, Engine& eng);

private:
    void redraw_sojourn(Engine& eng);
    void jump(Engine& eng);

    const Kernel3* kernel_;
    int state_ = 0;
    std::int64_t remaining_ = 0;  // steps left in the current state, current included
};

}  // namespace cchain
