#include "counterchain/block.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "counterchain/errors.hpp"

namespace cchain {

namespace {

void require_probability(double x, const char* name) {
    if (!(x > 0.0 && x <= 1.0 / 9.0))
        throw RangeError(std::string(name) + " must lie in (0, 1/9], got " + std::to_string(x));
}

constexpr std::int64_t kMaxSteps = 1'000'000;
constexpr std::int64_t kForever = std::numeric_limits<std::int64_t>::max() / 4;

}  // namespace

Kernel3 make_kernel(double epsilon, double theta) {
    Kernel3 k;
    const double exit0 = theta * epsilon / (1.0 - epsilon);  // theta* eps
    k.marginal = {epsilon / 2.0, 1.0 - epsilon, epsilon / 2.0};

    k.transition[1] = {exit0 / 2.0, 1.0 - exit0, exit0 / 2.0};
    k.transition[0] = {1.0 - theta, theta, 0.0};
    k.transition[2] = {0.0, theta, 1.0 - theta};

    const double side = theta * epsilon / 2.0;
    const double stay = (1.0 - theta) * epsilon / 2.0;
    k.joint[0] = {stay, side, 0.0};
    k.joint[1] = {side, 1.0 - epsilon - theta * epsilon, side};
    k.joint[2] = {0.0, side, stay};

    k.leave = {theta, exit0, theta};
    return k;
}

std::int64_t block_horizon(double epsilon, double theta) {
    // Rational inputs such as (1/9, 1/9) land within a few ulps of an integer;
    // snap those so the floor does not drop to 71.
    const double horizon = (1.0 - epsilon) / (theta * epsilon);
    if (!(horizon < 9.0e15)) throw RangeError("block horizon exceeds 2^53");
    const double nearest = std::round(horizon);
    const double snapped = std::fabs(horizon - nearest) <= 1e-12 * horizon ? nearest : std::floor(horizon);
    return static_cast<std::int64_t>(snapped);
}

std::pair<BlockParams, Kernel3> construct_block(double epsilon, double theta) {
    require_probability(epsilon, "epsilon");
    require_probability(theta, "theta");
    BlockParams b;
    b.epsilon = epsilon;
    b.theta = theta;
    b.theta_star = theta / (1.0 - epsilon);
    b.i_cap = block_horizon(epsilon, theta);
    return {b, make_kernel(epsilon, theta)};
}

namespace {

// P^n(i, j) - pi_j, from the two invariant pieces of the block: the odd mode
// v = (-1, 0, 1) with eigenvalue lambda = p_{++} - p_{+-}, and the lumped chain
// |X| on {0, 1} with eigenvalue mu = 1 - P(0 -> nonzero) - P(nonzero -> 0).
// Working with deviations avoids subtracting nearly equal probabilities.
Mat3 n_step_deviation(const Kernel3& kernel, std::int64_t n) {
    const double eps = 1.0 - kernel.marginal[1];
    const double nn = static_cast<double>(n);
    const double r = kernel.leave[1], s = kernel.transition[2][1];
    const double mu_n = std::exp(nn * std::log1p(-(r + s)));
    const double lambda_n = std::exp(nn * std::log1p(-(kernel.leave[2] + kernel.transition[2][0])));
    const double even = (1.0 - eps) * mu_n;
    Mat3 d{};
    d[0] = {0.5 * (even + lambda_n), -even, 0.5 * (even - lambda_n)};
    d[2] = {0.5 * (even - lambda_n), -even, 0.5 * (even + lambda_n)};
    d[1] = {-0.5 * eps * mu_n, eps * mu_n, -0.5 * eps * mu_n};
    return d;
}

void require_lag(std::int64_t n, const char* what) {
    if (n < 0 || n > kMaxSteps) throw RangeError(std::string(what) + ": n must lie in [0, 1e6]");
}

}  // namespace

Mat3 n_step_joint(const Kernel3& kernel, std::int64_t n) {
    require_lag(n, "n_step_joint");
    const Mat3 d = n_step_deviation(kernel, n);
    Mat3 out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i][j] = kernel.marginal[i] * (kernel.marginal[j] + d[i][j]);
    return out;
}

double exact_cov(const Kernel3& kernel, std::int64_t n) {
    require_lag(n, "exact_cov");
    // E(X_0 X_n) = sum_i pi_i v_i E(v(X_n) | X_0 = i) = eps lambda^n; only the odd mode survives.
    const double eps = 1.0 - kernel.marginal[1];
    return eps * std::exp(static_cast<double>(n) * std::log1p(-(kernel.leave[2] + kernel.transition[2][0])));
}

double exact_beta(const Kernel3& kernel, std::int64_t n) {
    if (n < 1) throw RangeError("exact_beta: n must be >= 1");
    require_lag(n, "exact_beta");
    const Mat3 d = n_step_deviation(kernel, n);
    double total = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) total += kernel.marginal[a] * std::fabs(d[a][b]);
    return 0.5 * total;
}

double exact_alpha(const Kernel3& kernel, std::int64_t n) {
    if (n < 1) throw RangeError("exact_alpha: n must be >= 1");
    require_lag(n, "exact_alpha");
    const Mat3 d = n_step_deviation(kernel, n);
    double best = 0.0;
    // P(A, B) - P(A) P(B) = sum_{a in A, b in B} pi_a (P^n(a, b) - pi_b).
    for (int amask = 1; amask < 8; ++amask) {
        for (int bmask = 1; bmask < 8; ++bmask) {
            double diff = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    if ((amask & (1 << a)) && (bmask & (1 << b))) diff += kernel.marginal[a] * d[a][b];
            best = std::fmax(best, std::fabs(diff));
        }
    }
    return best;
}

double partial_sum_variance(double epsilon, double theta, double n) {
    if (!(n >= 1.0)) throw RangeError("partial_sum_variance: n must be >= 1");
    // S = sum_{m=1}^{n-1} (n-m) (1-theta)^m.
    double s;
    const double x = n * theta;
    if (x >= 0.1) {
        const double rho = 1.0 - theta;
        const double rho_n = std::exp(n * std::log1p(-theta));
        s = rho * (x - 1.0 + rho_n) / (theta * theta);
    } else {
        // Binomial expansion: S = C(n+1,2) - n + sum_{k>=1} (-theta)^k C(n+1, k+2).
        s = n * (n - 1.0) / 2.0;
        double term = n * (n + 1.0) / 2.0;  // C(n+1, 2)
        for (int k = 0; k < 200; ++k) {
            const double ratio = -theta * (n - k - 1.0) / (k + 3.0);
            if (ratio == 0.0) break;
            term *= ratio;
            s += term;
            if (std::fabs(term) <= 1e-18 * std::fabs(s)) break;
        }
    }
    return epsilon * (n + 2.0 * s);
}

double partial_sum_variance(const BlockParams& block, std::int64_t n) {
    return partial_sum_variance(block.epsilon, block.theta, static_cast<double>(n));
}

BlockWalker::BlockWalker(const Kernel3& kernel, Engine& eng) : kernel_(&kernel) {
    const double u = uniform_open(eng);
    const double half = kernel.marginal[0];
    state_ = u < half ? -1 : (u < 2.0 * half ? 1 : 0);
    redraw_sojourn(eng);
}

void BlockWalker::redraw_sojourn(Engine& eng) {
    const double q = kernel_->leave[state_index(state_)];
    if (q <= 0.0) {
        remaining_ = kForever;
        return;
    }
    if (q >= 1.0) {
        remaining_ = 1;
        return;
    }
    // Geometric on {1, 2, ...} by inversion of an exponential variate.
    const double extra = standard_exponential(eng) / -std::log1p(-q);
    remaining_ = extra >= static_cast<double>(kForever) ? kForever : 1 + static_cast<std::int64_t>(extra);
}

void BlockWalker::jump(Engine& eng) {
    if (state_ == 0)
        state_ = uniform_open(eng) < 0.5 ? -1 : 1;
    else
        state_ = 0;
    redraw_sojourn(eng);
}

std::int64_t BlockWalker::advance_sum(std::int64_t m, Engine& eng) {
    std::int64_t sum = 0;
    while (m > 0) {
        const std::int64_t take = m < remaining_ ? m : remaining_;
        sum += state_ * take;
        m -= take;
        remaining_ -= take;
        if (remaining_ == 0) jump(eng);
    }
    return sum;
}

std::vector<std::int8_t> sample_block_path(const BlockParams& block, const Kernel3& kernel,
                                           std::int64_t n, std::uint64_t seed) {
    (void)block;
    if (n < 1) throw RangeError("sample_block_path: n must be >= 1");
    Engine eng = make_engine(seed, stream::kBlockPath);
    BlockWalker walker(kernel, eng);
    std::vector<std::int8_t> path(static_cast<std::size_t>(n));
    for (auto& x : path) {
        x = static_cast<std::int8_t>(walker.state());
        walker.advance_sum(1, eng);
    }
    return path;
}

}  // namespace cchain
