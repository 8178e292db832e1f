#include "counterchain/diagnostics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <map>
#include <string>

#include "counterchain/errors.hpp"
#include "counterchain/rng.hpp"

namespace cchain {

namespace {

constexpr double kL2 = 0.69314718055994530942;

double log_tol(double a, double b) { return 4.0 * DBL_EPSILON * std::max({1.0, std::fabs(a), std::fabs(b)}); }

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct LogAtom {
    double log_value;  // log |x|
    double log_prob;
};

// Atoms of |X_0| over all nonzero level configurations.
std::vector<LogAtom> abs_atoms_log(const SuperChain& chain) {
    const int levels = chain.truncation_j;
    if (levels > 6) throw RangeError("configuration enumeration needs J <= 6");
    int m = 1;
    for (int j = 0; j < levels; ++j) m *= 3;
    std::vector<double> lp0(levels), lp1(levels);
    for (int j = 0; j < levels; ++j) {
        const LevelRecord& r = chain.level(j + 1);
        lp0[j] = std::log1p(-r.epsilon.value());
        lp1[j] = r.epsilon.log() - kL2;
    }
    std::vector<LogAtom> atoms;
    for (int idx = 0; idx < m; ++idx) {
        const LevelConfig c = config_of_index(idx, levels);
        if (std::all_of(c.begin(), c.end(), [](int s) { return s == 0; })) continue;
        int top = -1;
        double lp = 0.0;
        for (int j = 0; j < levels; ++j) {
            lp += c[j] == 0 ? lp0[j] : lp1[j];
            if (c[j] != 0 && (top < 0 || chain.log_h[j] > chain.log_h[top])) top = j;
        }
        double rel = c[top];
        for (int j = 0; j < levels; ++j)
            if (j != top && c[j] != 0) rel += c[j] * std::exp(chain.log_h[j] - chain.log_h[top]);
        atoms.push_back({chain.log_h[top] + std::log(std::fabs(rel)), lp});
    }
    std::sort(atoms.begin(), atoms.end(), [](const LogAtom& a, const LogAtom& b) { return a.log_value > b.log_value; });
    return atoms;
}

}  // namespace

double QuantileFn::operator()(double u) const {
    // First k with tails[k] <= u; tails descend.
    auto it = std::lower_bound(tails.begin(), tails.end(), u, [](double t, double x) { return t > x; });
    if (it == tails.end()) return values.empty() ? 0.0 : values.back();
    return values[static_cast<std::size_t>(it - tails.begin())];
}

QuantileFn quantile_of(const DiscreteDist& dist) {
    QuantileFn q;
    if (!dist.support.empty() && dist.support.front() < 0.0)
        throw RangeError("quantile_of needs nonnegative support");
    q.values = dist.support;
    q.tails.assign(dist.support.size(), 0.0);
    double suffix = 0.0;
    for (std::size_t k = dist.support.size(); k-- > 0;) {
        q.tails[k] = suffix;
        suffix += dist.probs[k];
    }
    return q;
}

double tail_integral(const QuantileFn& q, double c) {
    if (!(c > 0.0 && c <= 1.0)) throw RangeError("tail_integral needs 0 < c <= 1");
    double total = 0.0;
    double upper = 1.0;  // tails[k-1]
    for (std::size_t k = 0; k < q.values.size(); ++k) {
        const double lo = q.tails[k];
        const double hi = std::min(upper, c);
        if (hi > lo) total += q.values[k] * q.values[k] * (hi - lo);
        upper = lo;
    }
    return total;
}

double concentration(std::vector<double> samples, double width) {
    if (samples.empty()) throw RangeError("concentration needs samples");
    std::sort(samples.begin(), samples.end());
    std::size_t best = 0, lo = 0;
    for (std::size_t hi = 0; hi < samples.size(); ++hi) {
        while (samples[hi] - samples[lo] >= 2.0 * width) ++lo;
        best = std::max(best, hi - lo + 1);
    }
    return static_cast<double>(best) / static_cast<double>(samples.size());
}

DiscreteDist abs_marginal_law(const SuperChain& chain) {
    std::map<double, double> mass;
    double p_zero = 1.0;
    for (int j = 1; j <= chain.truncation_j; ++j) p_zero *= 1.0 - chain.level(j).epsilon.value();
    mass[0.0] += p_zero;
    for (const auto& a : abs_atoms_log(chain)) mass[std::exp(a.log_value)] += std::exp(a.log_prob);
    DiscreteDist d;
    for (const auto& [x, p] : mass) {
        d.support.push_back(x);
        d.probs.push_back(p);
    }
    return d;
}

double log_tail_integral(const SuperChain& chain, double log_c) {
    const LogReal c = LogReal::from_log(std::min(log_c, 0.0));
    LogReal cum = LogReal::zero(), total = LogReal::zero();
    for (const auto& a : abs_atoms_log(chain)) {
        if (cum >= c) break;
        const LogReal end = cum + LogReal::from_log(a.log_prob);
        const LogReal len = min(end, c).abs_diff(cum);
        total += LogReal::from_log(2.0 * a.log_value) * len;
        cum = end;
    }
    return total.log();
}

ReportFragment verify_quantile_intervals(const std::vector<double>& h, const std::vector<double>& probs) {
    if (h.empty() || h.size() != probs.size()) throw RangeError("need equally many amplitudes and probabilities");
    if (h.size() > 24) throw RangeError("at most 24 levels");
    for (std::size_t j = 0; j < h.size(); ++j) {
        if (!(h[j] > 0.0) || !(probs[j] > 0.0)) throw RangeError("amplitudes and probabilities must be positive");
        if (j > 0 && !(h[j - 1] <= 0.5 * h[j])) throw RangeError("need h_j <= h_{j+1} / 2");
        if (j > 0 && !(probs[j] <= 0.5 * probs[j - 1])) throw RangeError("need P(A_j) <= P(A_{j-1}) / 2");
    }
    if (!(probs[0] < 0.5)) throw RangeError("need P(A_1) < 1/2");

    std::map<double, double> mass;
    const std::size_t levels = h.size();
    for (std::uint64_t mask = 0; mask < (1ull << levels); ++mask) {
        double y = 0.0, p = 1.0;
        for (std::size_t j = 0; j < levels; ++j) {
            if (mask >> j & 1u) {
                y += h[j];
                p *= probs[j];
            } else {
                p *= 1.0 - probs[j];
            }
        }
        mass[y] += p;
    }
    DiscreteDist d;
    for (const auto& [y, p] : mass) {
        d.support.push_back(y);
        d.probs.push_back(p);
    }
    const QuantileFn q = quantile_of(d);

    ReportFragment f;
    const double a1 = 2.0 * probs[0];
    // Q is nonincreasing, so each interval's supremum sits at its left end.
    f.add(check_le("Q_Y on [a_1, 1)", "Q_Y(u) = 0 for u in [a_1, 1)", q(a1), 0.0));
    for (std::size_t j = 1; j < levels; ++j) {
        const double aj = 2.0 * probs[j];
        f.add(check_le("Q_Y on [a_" + std::to_string(j + 1) + ", a_" + std::to_string(j) + ")",
                       "Q_Y(u) <= 2 h_{j-1} for u in [a_j, a_{j-1})", q(aj), 2.0 * h[j - 1]));
    }
    return f;
}

ReportFragment verify_t55_quantile_bound(const SuperChain& chain, const ConvexRate& phi, const PositiveSequence& g,
                                         const std::vector<double>& x_grid) {
    ReportFragment f;
    PiecewiseH gt([phi](double v) { return phi.log_neg_slope(v); }, [g](double v) { return std::exp(g.log_at_log(v)); });
    if (!x_grid.empty()) gt.extend_to_log_x(std::log(*std::max_element(x_grid.begin(), x_grid.end())));
    double worst = -INFINITY, worst_m = 0.0, worst_b = 0.0, worst_x = 0.0;
    bool ok = true;
    double worst4b = -INFINITY, w4_m = 0.0, w4_b = 0.0, w4_x = 0.0;
    int w4_j = 0;
    bool ok4b = true;
    for (double x : x_grid) {
        const double v = std::log(x);
        const double log_f = phi.phi_log(v);
        const double rhs = std::log(gt.at_log(v)) + phi.log_neg_slope(v);
        const double lhs = log_tail_integral(chain, log_f);
        const double excess = lhs - rhs;
        if (!(lhs <= rhs + log_tol(lhs, rhs))) ok = false;
        if (excess > worst || worst == -INFINITY) {
            worst = excess;
            worst_m = lhs;
            worst_b = rhs;
            worst_x = x;
        }
        for (int j = 1; j <= chain.truncation_j; ++j) {
            const LevelRecord& r = chain.level(j);
            const double l = 2.0 * r.h.log() + std::min(log_f, r.epsilon.log());
            const double b = -(j + 6.0) * kL2 + rhs;
            if (!(l <= b + log_tol(l, b))) ok4b = false;
            if (l - b > worst4b || worst4b == -INFINITY) {
                worst4b = l - b;
                w4_m = l;
                w4_b = b;
                w4_x = x;
                w4_j = j;
            }
        }
    }
    CheckRecord c = check_le("quantile tail bound", "integral of Q^2_{|X_0|} over (0, f(x)] <= g(x) (-phi'(x))", worst_m,
                             worst_b, log_tol(worst_m, worst_b), "log");
    c.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
    c.note = "worst x = " + fmt(worst_x) + " over " + std::to_string(x_grid.size()) + " grid points";
    f.add(c);
    CheckRecord c4 = check_le("per-level quantile bound", "h_j^2 min(f(x), eps_j) <= 2^-(j+6) g(x) (-phi'(x))", w4_m,
                              w4_b, log_tol(w4_m, w4_b), "log");
    c4.status = ok4b ? CheckStatus::Pass : CheckStatus::Fail;
    c4.note = "worst at x = " + fmt(w4_x) + ", level " + std::to_string(w4_j);
    f.add(c4);
    return f;
}

std::vector<int> feasible_limit_levels(const SuperChain& chain, std::size_t n_rep, const CostBudget& budget) {
    std::vector<int> out;
    std::int64_t last = 0;
    for (int j = 1; j <= chain.truncation_j; ++j) {
        const std::int64_t i = chain.level(j).i_cap_exact;
        if (i <= 0 || static_cast<double>(i) * static_cast<double>(n_rep) > budget.max_steps) continue;
        if (i > last) {
            out.push_back(j);
            last = i;
        }
    }
    return out;
}

namespace {

void add_variance_checks(ReportFragment& f, const SuperChain& chain, const PositiveSequence& q, std::int64_t span) {
    const LevelRecord& first = chain.level(1);
    if (!first.m) {
        f.add(check_skipped("variance growth", "Var(S_n) >= q_n n^2 for n in [M_1, M_1 + span]", "schedule has no M_1"));
        return;
    }
    const LogReal m1 = *first.m;
    double worst_m = 0.0, worst_b = 0.0, worst_slack = INFINITY;
    bool ok = true;
    for (std::int64_t k = 0; k <= span; ++k) {
        const LogReal n = m1 + LogReal::from_value(static_cast<double>(k));
        const double lv = super_variance(chain, n).log();
        const double lb = q.log_at_log(n.log()) + 2.0 * n.log();
        if (!(lb <= lv + log_tol(lb, lv))) ok = false;
        if (lv - lb < worst_slack) {
            worst_slack = lv - lb;
            worst_m = lb;
            worst_b = lv;
        }
    }
    CheckRecord c = check_le("variance growth", "q_n n^2 <= Var(S_n) for n in [M_1, M_1 + span]", worst_m, worst_b,
                             log_tol(worst_m, worst_b), "log");
    c.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
    c.note = "M_1 = e^" + fmt(m1.log()) +
             (m1.log() > 53.0 * kL2 ? "; beyond 2^53 the integer range is a single double" : "");
    f.add(c);

    // Geometric grid from M_1 up to M_{J+1}, where the truncated chain still carries the growth.
    std::optional<LogReal> upper = chain.truncation_j < chain.schedule.emitted()
                                       ? chain.level(chain.truncation_j + 1).m
                                       : chain.schedule.m_next;
    if (!upper) return;
    ok = true;
    worst_slack = INFINITY;
    constexpr int kPoints = 256;
    for (int i = 0; i < kPoints; ++i) {
        // Geometric in log n: covers every scale between M_1 and M_{J+1}.
        const double t = static_cast<double>(i) / kPoints;
        const double ln = m1.log() * std::pow(upper->log() / m1.log(), t);
        const double lv = super_variance(chain, LogReal::from_log(ln)).log();
        const double lb = q.log_at_log(ln) + 2.0 * ln;
        if (!(lb <= lv + log_tol(lb, lv))) ok = false;
        if (lv - lb < worst_slack) {
            worst_slack = lv - lb;
            worst_m = lb;
            worst_b = lv;
        }
    }
    CheckRecord g = check_le("variance growth, geometric grid", "q_n n^2 <= Var(S_n) for M_1 <= n < M_{J+1}", worst_m,
                             worst_b, log_tol(worst_m, worst_b), "log");
    g.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
    g.note = std::to_string(kPoints) + " points, log-geometric in log n";
    f.add(g);
}

void add_beta_checks(ReportFragment& f, const SuperChain& chain, const std::function<double(double)>& bound,
                     const std::string& prop, std::int64_t n_max) {
    bool ok = true;
    double worst_slack = INFINITY, wm = 0.0, wb = 0.0;
    std::int64_t wn = 0;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        const double b = super_beta_bound(chain, n);
        const double r = bound(static_cast<double>(n));
        if (!(b <= r)) ok = false;
        if (r - b < worst_slack) {
            worst_slack = r - b;
            wm = b;
            wb = r;
            wn = n;
        }
    }
    CheckRecord c = check_le("beta bound", prop, wm, wb);
    c.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
    c.note = "n in [1, " + std::to_string(n_max) + "], tightest at n = " + std::to_string(wn);
    f.add(c);
    if (chain.truncation_j <= 6) {
        for (std::int64_t n : {std::int64_t{1}, std::int64_t{10}, std::int64_t{100}}) {
            if (n > n_max) break;
            f.add(check_le("exact beta, n = " + std::to_string(n),
                           "exact beta of the truncated chain <= sum of level betas + tail",
                           super_beta_exact_small_j(chain, n), super_beta_bound(chain, n), 1e-12));
        }
    }
}

void add_dissipation_checks(ReportFragment& f, const SuperChain& chain, const VerifyBudget& budget,
                            std::uint64_t seed) {
    const std::int64_t ns[] = {100, 1000, 10000};
    std::vector<double> conc;
    for (std::int64_t n : ns) {
        try {
            auto s = partial_sum_samples(chain, n, budget.dissipation_replicates,
                                         derive_seed(seed, stream::kPartialSum, static_cast<std::uint64_t>(n)),
                                         budget.steps);
            const double root = std::sqrt(static_cast<double>(n));
            for (auto& x : s) x /= root;
            conc.push_back(concentration(std::move(s), 1.0));
        } catch (const BudgetError& e) {
            f.add(check_skipped("dissipation trend", "concentration of S_n / sqrt(n) nonincreasing in n", e.what()));
            return;
        }
    }
    for (std::size_t i = 1; i < conc.size(); ++i) {
        CheckRecord c = check_le("dissipation, n = " + std::to_string(ns[i - 1]) + " -> " + std::to_string(ns[i]),
                                 "concentration(S_n / sqrt(n), 1) nonincreasing in n up to slack", conc[i], conc[i - 1],
                                 budget.concentration_slack);
        f.add(c);
    }
}

void add_limit_checks(ReportFragment& f, const SuperChain& chain, const VerifyBudget& budget, std::uint64_t seed,
                      nlohmann::ordered_json& table) {
    const auto levels = feasible_limit_levels(chain, budget.limit_replicates, budget.steps);
    if (levels.empty()) {
        f.add(check_skipped("limit law", "normalized level sums approach mu_P1sL",
                            "no level has a simulable horizon I_j within the step budget"));
        return;
    }
    std::vector<double> ks;
    for (int j : levels) {
        auto s = normalized_sum_samples(chain, j, budget.limit_replicates,
                                        derive_seed(seed, stream::kNormalizedSum, static_cast<std::uint64_t>(j)),
                                        budget.steps);
        auto ref = sample_mu_p1sl(derive_seed(seed, stream::kReference, static_cast<std::uint64_t>(j)),
                                  budget.limit_replicates);
        ks.push_back(ks_distance(std::move(s), std::move(ref)));
        table.push_back({{"level", j}, {"i_cap", chain.level(j).i_cap_exact}, {"ks", ks.back()}});
    }
    for (std::size_t i = 1; i < ks.size(); ++i)
        f.add(check_lt("limit law trend, level " + std::to_string(levels[i]),
                       "KS distance to mu_P1sL decreases with the level", ks[i], ks[i - 1]));
    if (ks.size() == 1) {
        CheckRecord c = check_true("limit law trend", "KS distance to mu_P1sL decreases with the level", true,
                                   "only level " + std::to_string(levels[0]) + " is feasible; the trend is vacuous");
        f.add(c);
    }
    CheckRecord c = check_le("limit law distance", "KS distance to mu_P1sL at the largest feasible level", ks.back(),
                             budget.ks_tolerance);
    c.note = "level " + std::to_string(levels.back()) + ", " + std::to_string(budget.limit_replicates) + " replicates";
    f.add(c);
}

}  // namespace

RunReport verify_theorem(const SuperChain& chain, const VerifyInputs& in, const VerifyBudget& budget,
                         std::uint64_t seed) {
    RunReport rep;
    const TheoremTag tag = chain.schedule.tag;
    rep.theorem_tag = tag_name(tag);
    rep.inputs["schedule"] = chain.schedule.inputs_digest;
    rep.inputs["truncation_j"] = chain.truncation_j;
    rep.inputs["budget"] = {{"max_steps", budget.steps.max_steps},
                            {"dissipation_replicates", budget.dissipation_replicates},
                            {"limit_replicates", budget.limit_replicates},
                            {"beta_n_max", budget.beta_n_max},
                            {"variance_span", budget.variance_span},
                            {"ks_tolerance", budget.ks_tolerance},
                            {"concentration_slack", budget.concentration_slack}};
    rep.seeds.emplace_back("master", seed);

    const LogReal tail = chain.trunc_eps_tail;
    const int jt = chain.truncation_j;
    LogReal var_tail = tag == TheoremTag::T55 ? LogReal::from_log(-jt * kL2)
                                              : tail * LogReal::from_log(-2.0 * (jt + 1) * std::log(3.0));
    rep.truncation = {{"levels", jt},
                      {"log_eps_tail", tail.log()},
                      {"beta_tail", 6.0 * tail.value()},
                      {"log_variance_tail", var_tail.log()}};

    ReportFragment& f = rep.body;
    if (tag == TheoremTag::T34 || tag == TheoremTag::SmallI) {
        if (tag == TheoremTag::T34) {
            if (!in.q) throw RangeError("variance checks need the target sequence q");
            add_variance_checks(f, chain, *in.q, budget.variance_span);
        }
        add_dissipation_checks(f, chain, budget, seed);
        nlohmann::ordered_json table = nlohmann::ordered_json::array();
        add_limit_checks(f, chain, budget, seed, table);
        rep.truncation["limit_levels"] = table;
    }
    if (tag == TheoremTag::T44) {
        if (!in.g) throw RangeError("beta checks need g");
        const PositiveSequence g = *in.g;
        add_beta_checks(f, chain, [g](double n) { return g.value(n) / n; }, "beta(n) <= g_n / n", budget.beta_n_max);
    }
    if (tag == TheoremTag::T55) {
        if (!in.g || !in.phi) throw RangeError("T55 checks need f and g");
        const ConvexRate phi = *in.phi;
        add_beta_checks(f, chain, [phi](double n) { return std::exp(phi.value(n)); }, "beta(n) <= f(n)",
                        budget.beta_n_max);
        std::vector<double> grid;
        for (int x = 2; x <= 1024; x += 2) grid.push_back(x);
        f.merge(verify_t55_quantile_bound(chain, phi, *in.g, grid));
    }
    return rep;
}

}  // namespace cchain
