#include "counterchain/superchain.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <string>

#include "counterchain/errors.hpp"
#include "counterchain/rng.hpp"

namespace cchain {

namespace {

constexpr int kMaxEnumLevels = 6;
constexpr std::int64_t kMaxDpSteps = 100'000;

int ipow3(int k) {
    int r = 1;
    while (k-- > 0) r *= 3;
    return r;
}

}  // namespace

double SuperChain::h(int j) const { return std::exp(log_h[j - 1]); }

SuperChain make_super_chain(const LevelSchedule& schedule, int truncation_j) {
    if (truncation_j < 1 || truncation_j > schedule.emitted())
        throw RangeError("truncation level " + std::to_string(truncation_j) + " outside the " +
                         std::to_string(schedule.emitted()) + " emitted levels");
    SuperChain c;
    c.schedule = schedule;
    c.truncation_j = truncation_j;
    const bool growing = schedule.tag == TheoremTag::T55;
    for (int j = 1; j <= truncation_j; ++j) {
        const LevelRecord& r = schedule.levels[j - 1];
        c.level_kernels.push_back(make_kernel(r.epsilon.value(), r.theta.value()));
        c.log_h.push_back(r.h.log());
        if (j >= 2) {
            const double step = c.log_h[j - 1] - c.log_h[j - 2];
            const double need = std::log(3.0);
            const bool ok = growing ? step >= need * (1.0 - 1e-12) : -step >= need * (1.0 - 1e-12);
            if (!ok) throw RangeError("amplitudes of levels " + std::to_string(j - 1) + " and " + std::to_string(j) +
                                      " are not separated by a factor 3");
        }
    }
    c.trunc_eps_tail = tail_eps_bound(schedule, truncation_j);
    return c;
}

double encode(const SuperChain& chain, const LevelConfig& config) {
    if (static_cast<int>(config.size()) != chain.truncation_j)
        throw RangeError("configuration length " + std::to_string(config.size()) + " != truncation level " +
                         std::to_string(chain.truncation_j));
    double x = 0.0;
    for (int j = 1; j <= chain.truncation_j; ++j) {
        const int s = config[j - 1];
        if (s != 0) x += s * chain.h(j);
    }
    return x;
}

std::vector<LevelConfig> sample_super_configs(const SuperChain& chain, std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw RangeError("path length must be >= 1");
    std::vector<LevelConfig> out(static_cast<std::size_t>(n), LevelConfig(chain.truncation_j, 0));
    for (int j = 1; j <= chain.truncation_j; ++j) {
        Engine eng = make_engine(seed, stream::kSuperLevel, static_cast<std::uint64_t>(j));
        BlockWalker w(chain.level_kernels[j - 1], eng);
        for (auto& cfg : out) {
            cfg[j - 1] = w.state();
            w.advance_sum(1, eng);
        }
    }
    return out;
}

std::vector<double> sample_super_path(const SuperChain& chain, std::int64_t n, std::uint64_t seed) {
    const auto configs = sample_super_configs(chain, n, seed);
    std::vector<double> path;
    path.reserve(configs.size());
    for (const auto& c : configs) path.push_back(encode(chain, c));
    return path;
}

double log_block_variance_ratio(double log_theta, double log_n) {
    if (log_n < 340.0) {
        const double n = std::exp(log_n);
        if (n >= 1.0) return std::log(partial_sum_variance(1.0, std::exp(log_theta), n));
    }
    if (log_theta < -18.0) {
        // n + 2S = (2 / theta^2)(x - 1 + e^-x) (1 + O(theta)) with x = theta n; the
        // small- and large-x forms avoid cancelling log theta against log n.
        const double lx = log_theta + log_n;
        const double x = std::exp(lx);
        if (x < 1e-4) return 2.0 * log_n + std::log1p(-x / 3.0);
        if (lx > 40.0) return std::log(2.0) - log_theta + log_n;
        return std::log(2.0) - 2.0 * log_theta + std::log(x + std::expm1(-x));
    }
    // theta n > e^300: n + 2S = n (2 / theta - 1) up to a relative e^-300.
    return log_n + std::log(2.0 / std::exp(log_theta) - 1.0);
}

LogReal super_variance(const SuperChain& chain, LogReal n) {
    LogReal total = LogReal::zero();
    for (int j = 1; j <= chain.truncation_j; ++j) {
        const LevelRecord& r = chain.level(j);
        total += LogReal::from_log(2.0 * r.h.log() + r.epsilon.log() +
                                   log_block_variance_ratio(r.theta.log(), n.log()));
    }
    return total;
}

double super_beta_bound(const SuperChain& chain, std::int64_t n) {
    double total = 0.0;
    for (const auto& k : chain.level_kernels) total += exact_beta(k, n);
    return total + 6.0 * chain.trunc_eps_tail.value();
}

LevelConfig config_of_index(int index, int levels) {
    LevelConfig c(levels);
    for (int j = 0; j < levels; ++j) {
        c[j] = index % 3 - 1;
        index /= 3;
    }
    return c;
}

std::vector<double> two_time_joint(const SuperChain& chain, std::int64_t n) {
    const int levels = chain.truncation_j;
    if (levels > kMaxEnumLevels) throw RangeError("two-time enumeration needs J <= 6");
    std::vector<Mat3> joints;
    for (const auto& k : chain.level_kernels) joints.push_back(n_step_joint(k, n));
    const int m = ipow3(levels);
    std::vector<double> out(static_cast<std::size_t>(m) * m);
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            double p = 1.0;
            int ia = a, ib = b;
            for (int j = 0; j < levels; ++j) {
                p *= joints[j][ia % 3][ib % 3];
                ia /= 3;
                ib /= 3;
            }
            out[static_cast<std::size_t>(a) * m + b] = p;
        }
    }
    return out;
}

double super_beta_exact_small_j(const SuperChain& chain, std::int64_t n) {
    const int levels = chain.truncation_j;
    if (levels > kMaxEnumLevels) throw RangeError("exact beta enumeration needs J <= 6");
    const auto joint = two_time_joint(chain, n);
    const int m = ipow3(levels);
    std::vector<double> marg(m);
    for (int a = 0; a < m; ++a) {
        double p = 1.0;
        int ia = a;
        for (int j = 0; j < levels; ++j) {
            p *= chain.level_kernels[j].marginal[ia % 3];
            ia /= 3;
        }
        marg[a] = p;
    }
    double total = 0.0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) total += std::fabs(joint[static_cast<std::size_t>(a) * m + b] - marg[a] * marg[b]);
    return 0.5 * total;
}

DiscreteDist block_sum_law(const Kernel3& kernel, std::int64_t n) {
    if (n < 1 || n > kMaxDpSteps) throw RangeError("block_sum_law: n must lie in [1, 1e5]");
    const std::size_t width = static_cast<std::size_t>(2 * n + 1);
    const std::int64_t off = n;
    // p[s][sum + off]: probability of current state s with running sum.
    std::array<std::vector<double>, 3> p, q;
    for (int s = 0; s < 3; ++s) {
        p[s].assign(width, 0.0);
        q[s].assign(width, 0.0);
    }
    for (int s = 0; s < 3; ++s) p[s][static_cast<std::size_t>(off + kStates[s])] = kernel.marginal[s];
    for (std::int64_t k = 2; k <= n; ++k) {
        const std::int64_t lo = off - (k - 1), hi = off + (k - 1);
        for (int t = 0; t < 3; ++t) std::fill(q[t].begin() + (lo - 1), q[t].begin() + (hi + 2), 0.0);
        for (int s = 0; s < 3; ++s) {
            for (int t = 0; t < 3; ++t) {
                const double pr = kernel.transition[s][t];
                if (pr == 0.0) continue;
                const std::int64_t shift = kStates[t];
                for (std::int64_t x = lo; x <= hi; ++x) q[t][static_cast<std::size_t>(x + shift)] += p[s][x] * pr;
            }
        }
        std::swap(p, q);
    }
    DiscreteDist d;
    for (std::size_t x = 0; x < width; ++x) {
        const double m = p[0][x] + p[1][x] + p[2][x];
        if (m > 0.0) {
            d.support.push_back(static_cast<double>(static_cast<std::int64_t>(x) - off));
            d.probs.push_back(m);
        }
    }
    return d;
}

namespace {

void check_budget(double steps, const CostBudget& budget, const std::string& what) {
    if (steps > budget.max_steps) {
        char buf[160];
        std::snprintf(buf, sizeof buf, " needs about %.3g block steps; budget is %.3g", steps, budget.max_steps);
        throw BudgetError(what + buf);
    }
}

// Sum over levels of h_l S^(l)_m / h_ref, each level on its own derived stream.
double replicate_sum(const SuperChain& chain, std::int64_t m, double log_ref, std::uint64_t seed,
                     std::uint64_t stream_tag, std::size_t rep) {
    double total = 0.0;
    for (int l = 1; l <= chain.truncation_j; ++l) {
        Engine eng = make_engine(seed, stream_tag, static_cast<std::uint64_t>(rep) * 1024u + static_cast<std::uint64_t>(l));
        BlockWalker w(chain.level_kernels[l - 1], eng);
        const std::int64_t s = w.advance_sum(m, eng);
        if (s != 0) total += static_cast<double>(s) * std::exp(chain.log_h[l - 1] - log_ref);
    }
    return total;
}

}  // namespace

std::vector<double> normalized_sum_samples(const SuperChain& chain, int level_j, std::size_t n_rep, std::uint64_t seed,
                                           const CostBudget& budget) {
    if (level_j < 1 || level_j > chain.truncation_j) throw RangeError("level outside the truncated chain");
    const LevelRecord& r = chain.level(level_j);
    if (r.i_cap_exact <= 0) throw BudgetError("block horizon I_j = e^" + std::to_string(r.i_cap.log()) + " is not simulable");
    check_budget(static_cast<double>(r.i_cap_exact) * static_cast<double>(n_rep), budget, "normalized sums");
    const double scale = r.theta.value();
    std::vector<double> out(n_rep);
    for (std::size_t rep = 0; rep < n_rep; ++rep)
        out[rep] = scale * replicate_sum(chain, r.i_cap_exact, r.h.log(), seed, stream::kNormalizedSum, rep);
    return out;
}

std::vector<double> partial_sum_samples(const SuperChain& chain, std::int64_t n, std::size_t n_rep, std::uint64_t seed,
                                        const CostBudget& budget) {
    if (n < 1) throw RangeError("partial sums need n >= 1");
    check_budget(static_cast<double>(n) * static_cast<double>(n_rep), budget, "partial sums");
    std::vector<double> out(n_rep);
    for (std::size_t rep = 0; rep < n_rep; ++rep) out[rep] = replicate_sum(chain, n, 0.0, seed, stream::kPartialSum, rep);
    return out;
}

std::vector<double> block_partial_sums(const Kernel3& kernel, std::int64_t n, std::size_t n_rep, std::uint64_t seed) {
    if (n < 1) throw RangeError("partial sums need n >= 1");
    std::vector<double> out(n_rep);
    for (std::size_t rep = 0; rep < n_rep; ++rep) {
        Engine eng = make_engine(seed, stream::kPartialSum, rep);
        BlockWalker w(kernel, eng);
        out[rep] = static_cast<double>(w.advance_sum(n, eng));
    }
    return out;
}

}  // namespace cchain
