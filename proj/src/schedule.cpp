#include "counterchain/schedule.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "counterchain/errors.hpp"

namespace cchain {

namespace {

constexpr double kL2 = 0.69314718055994530942;
constexpr double kL3 = 1.09861228866810969140;
constexpr double kL9 = 2.0 * kL3;
// Largest log(1 / (theta_star eps)) for which the horizon is computed as an exact integer.
constexpr double kExactHorizonLog = 36.0;

std::string num17(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// Exponent k of the largest 3^-k <= e^cap with k >= k_min. Caps that sit on a
// power of 1/3 up to rounding are taken as that power.
double pow3_exponent(double log_cap, double k_min) {
    const double raw = -log_cap / kL3;
    double k = std::ceil(raw - 1e-9);
    return std::max(k, k_min);
}

LevelRecord make_level(int j, double log_eps, double log_theta, double log_h) {
    LevelRecord r;
    r.j = j;
    r.epsilon = LogReal::from_log(log_eps);
    r.theta = LogReal::from_log(log_theta);
    r.h = LogReal::from_log(log_h);
    const double eps = std::exp(log_eps);
    r.theta_star = LogReal::from_log(log_theta - std::log1p(-eps));
    const double log_horizon = -(r.theta_star.log() + log_eps);
    if (log_horizon < kExactHorizonLog) {
        r.i_cap_exact = block_horizon(eps, std::exp(log_theta));
        r.i_cap = LogReal::from_value(static_cast<double>(r.i_cap_exact));
    } else {
        r.i_cap = LogReal::from_log(log_horizon);
    }
    return r;
}

LevelRecord springboard() {
    LevelRecord r;
    r.j = 0;
    r.epsilon = r.theta = LogReal::from_value(1.0 / 9.0);
    r.theta_star = LogReal::from_value(1.0 / 8.0);
    r.i_cap = r.h = LogReal::one();
    r.i_cap_exact = 1;
    return r;
}

bool grid_stays_below(const PositiveSequence& q, double v, double log_c) {
    for (int k = 1; k <= 64; ++k) {
        const double w = v < kPlainMaxLogX ? v + k * kLn2 : v * (1.0 + k / 16.0);
        if (!(q.log_at_log(w) <= log_c)) return false;
    }
    return true;
}

// First M > M_prev with q_n <= e^log_c for every n >= M (integer scan below the
// cap, log-coordinate search beyond it).
LogReal find_m(const PositiveSequence& q, double log_c, LogReal m_prev, std::int64_t cap, int level) {
    const double c = std::exp(log_c);
    const double log_cap = std::log(static_cast<double>(cap));
    const std::int64_t start =
        m_prev.is_zero() ? 1 : (m_prev.log() < log_cap ? static_cast<std::int64_t>(std::floor(m_prev.value())) + 1 : -1);
    if (start > 0 && start <= cap && c > 0.0 && q.value(static_cast<double>(cap)) <= c) {
        std::int64_t last_bad = start - 1;
        for (std::int64_t n = start; n <= cap; ++n)
            if (q.value(static_cast<double>(n)) > c) last_bad = n;
        if (grid_stays_below(q, log_cap, log_c)) return LogReal::from_value(static_cast<double>(last_bad + 1));
    }
    const double v_lo = std::max(log_cap, m_prev.is_zero() ? 0.0 : m_prev.log());
    auto below = [&](double v) { return q.log_at_log(v) <= log_c; };
    double v = 0.0;
    try {
        v = first_log_crossing(below, v_lo, kLogSearchCap, "M search");
    } catch (const SearchError&) {
        throw ScheduleError(level, "q_n does not fall below h_j^2 eps_j / 2 = e^" + num17(log_c) +
                                       " within the log-coordinate search range");
    }
    if (!grid_stays_below(q, v, log_c))
        throw ScheduleError(level, "q_n rises above h_j^2 eps_j / 2 beyond the crossing at n = e^" + num17(v));
    return LogReal::from_log(v);
}

}  // namespace

std::string tag_name(TheoremTag t) {
    switch (t) {
        case TheoremTag::T34: return "T34";
        case TheoremTag::T44: return "T44";
        case TheoremTag::T55: return "T55";
        case TheoremTag::SmallI: return "SmallI";
    }
    return "?";
}

TheoremTag parse_tag(const std::string& s) {
    std::string u;
    for (char ch : s) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    if (u == "T34") return TheoremTag::T34;
    if (u == "T44") return TheoremTag::T44;
    if (u == "T55") return TheoremTag::T55;
    if (u == "SMALLI" || u == "SMALL-I") return TheoremTag::SmallI;
    throw RangeError("unknown schedule tag '" + s + "'");
}

BlockParams LevelRecord::block() const {
    BlockParams b;
    b.epsilon = epsilon.value();
    b.theta = theta.value();
    b.theta_star = theta_star.value();
    b.i_cap = i_cap_exact;
    return b;
}

LevelSchedule schedule_t34(const PositiveSequence& q, int j_max, const ScheduleOptions& opt) {
    if (j_max < 1) throw RangeError("j_max must be positive");
    LevelSchedule s;
    s.tag = TheoremTag::T34;
    s.requested_levels = j_max;
    s.inputs_digest = "q=" + q.name;

    // Pass 1: eps_j and M_j for j = 1 .. j_max + 1 (theta_j needs M_{j+1}).
    std::vector<double> log_eps, log_h;
    std::vector<LogReal> m;
    int reached = 0;
    for (int j = 1; j <= j_max + 1; ++j) {
        const double lh = -j * kL3;
        double k;
        if (j == 1) {
            k = 2.0;
        } else {
            double cap = std::min(-j * kL9, log_eps.back());
            for (int l = 1; l < j; ++l)
                cap = std::min(cap, -j * kL2 + 2.0 * (log_h[l - 1] + log_eps[l - 1]) - 2.0 * lh);
            k = pow3_exponent(cap, 2.0 * j);
        }
        const double le = -k * kL3;
        try {
            m.push_back(find_m(q, 2.0 * lh + le - kL2, m.empty() ? LogReal::zero() : m.back(), opt.m_scan_cap, j));
        } catch (const ScheduleError& e) {
            s.range_note = e.what();
            break;
        }
        log_eps.push_back(le);
        log_h.push_back(lh);
        reached = j;
    }

    // Pass 2: theta_j.
    LogReal ratio_sum = LogReal::zero();  // sum_{u=1}^{j-1} h_u^2 eps_u / theta_u
    double prev_log_theta = 0.0;
    for (int j = 1; j <= std::min(j_max, reached - 1); ++j) {
        const double lh = log_h[j - 1], le = log_eps[j - 1];
        double cap = j == 1 ? -kL9 : std::min(-j * kL9, prev_log_theta);
        cap = std::min(cap, -kL2 - m[j].log());
        if (j >= 2) cap = std::min(cap, 2.0 * lh + le - (std::log(static_cast<double>(j)) + (LogReal::one() + ratio_sum).log()));
        const double lt = -pow3_exponent(cap, 2.0) * kL3;
        LevelRecord r = make_level(j, le, lt, lh);
        r.m = m[j - 1];
        s.levels.push_back(r);
        ratio_sum += LogReal::from_log(2.0 * lh + le - lt);
        prev_log_theta = lt;
    }
    if (s.emitted() > 0 && reached > s.emitted()) s.m_next = m[s.emitted()];
    if (s.emitted() < j_max && s.range_note.empty()) s.range_note = "M_{j+1} unavailable";
    return s;
}

LevelSchedule schedule_small_i(int j_max) {
    if (j_max < 1) throw RangeError("j_max must be positive");
    LevelSchedule s;
    s.tag = TheoremTag::SmallI;
    s.requested_levels = j_max;
    s.inputs_digest = "largest admissible eps_j, theta_j";
    LogReal ratio_sum = LogReal::zero();
    double prev = 0.0;
    for (int j = 1; j <= j_max; ++j) {
        const double lh = -j * kL3, le = -j * kL9;
        double cap = j == 1 ? -kL9 : std::min(-j * kL9, prev);
        if (j >= 2) cap = std::min(cap, 2.0 * lh + le - (std::log(static_cast<double>(j)) + (LogReal::one() + ratio_sum).log()));
        const double lt = -pow3_exponent(cap, 2.0) * kL3;
        s.levels.push_back(make_level(j, le, lt, lh));
        ratio_sum += LogReal::from_log(2.0 * lh + le - lt);
        prev = lt;
    }
    return s;
}

LevelSchedule schedule_t44(const PositiveSequence& g, int j_max) {
    if (j_max < 1) throw RangeError("j_max must be positive");
    LevelSchedule s;
    s.tag = TheoremTag::T44;
    s.requested_levels = j_max;
    s.inputs_digest = "g=" + g.name;
    s.seed_level = springboard();

    PsiFunction psi;
    psi.value = [g](double x) {
        const double n = std::floor(x);
        const double frac = x - n;
        const double a = std::log(std::max(1.0, g.value(n)));
        const double b = std::log(std::max(1.0, g.value(n + 1.0)));
        return a + frac * (b - a);
    };
    psi.value_at_log = [g, interp = psi.value](double v) {
        // Beyond 2^52 the unit-spaced interpolant agrees with log g to rounding.
        if (v < 36.0) return interp(std::exp(v));
        return std::max(0.0, g.log_at_log(v));
    };
    const ConvexRate phi = neg_log_rate();

    LogReal ratio_sum = LogReal::one();  // sum_{u=0}^{j-1} h_u^2 eps_u / theta_u
    LevelRecord prev = *s.seed_level;
    for (int j = 1; j <= j_max; ++j) {
        const double lh = -j * kL3;
        const double b = (j + 2.0) + std::log(static_cast<double>(j)) - 2.0 * lh + ratio_sum.log();
        const double d = std::min(-j * kL9 - prev.i_cap.log(), prev.epsilon.log() - kL2);
        const double log_s = std::min(-j * kL9, prev.theta.log() - kL2);
        TStarResult ts;
        try {
            ts = find_T_star_log(phi, psi, b, d, log_s, kLogSearchCap);
        } catch (const std::exception& e) {
            s.range_note = "level " + std::to_string(j) + ": " + e.what();
            break;
        }
        const double l0 = phi.intercept_log(ts.log_t);
        const double le = l0 + b - (j + 2.0);
        const double lt = phi.log_neg_slope(ts.log_t);
        if (!std::isfinite(le) || !std::isfinite(lt)) {
            s.range_note = "level " + std::to_string(j) + ": parameters leave the log-double range";
            break;
        }
        LevelRecord r = make_level(j, le, lt, lh);
        r.b = LogReal::from_value(b);
        r.d = d;
        r.log_t = ts.log_t;
        r.l0 = l0;
        r.log_q = ts.log_q;
        s.levels.push_back(r);
        ratio_sum += LogReal::from_log(2.0 * lh + le - lt);
        prev = r;
    }
    return s;
}

double find_w(const ConvexRate& phi) {
    // x f(x) nonincreasing  <=>  x (-phi'(x)) >= 1.
    auto ok_from = [&](double v0) {
        for (int k = 0; k <= 240; ++k) {
            const double v = v0 + k * kLn2 / 4.0;
            if (v + phi.log_neg_slope(v) < -1e-12) return false;
        }
        return true;
    };
    for (int e = 1; e <= 60; ++e)
        if (ok_from(e * kLn2)) return std::exp2(e);
    throw RangeError("hypothesis 'x f(x) eventually nonincreasing' fails up to x = 2^60");
}

void validate_t55_inputs(const ConvexRate& phi, const PositiveSequence& g, double w) {
    try {
        validate_rate(phi);
    } catch (const RangeError& e) {
        throw RangeError(std::string("hypothesis 'f in (0,1], strictly decreasing, log f convex': ") + e.what());
    }
    for (double c : {1.0, 0.1, 0.01}) {
        const double x = std::exp2(40.0);
        if (!(c * x + phi.value(x) > 0.0))
            throw RangeError("hypothesis 'e^{cx} f(x) -> inf' fails at c = " + num17(c));
    }
    if (!(w > 1.0)) throw RangeError("hypothesis 'x f(x) nonincreasing beyond w' needs w > 1");
    const double vw = std::log(w);
    for (int k = 0; k <= 240; ++k) {
        const double v = vw + k * kLn2 / 4.0;
        if (v + phi.log_neg_slope(v) < -1e-12)
            throw RangeError("hypothesis 'x f(x) nonincreasing beyond w' fails at x = e^" + num17(v));
    }
    double prev = 0.0;
    for (int k = 0; k <= 160; ++k) {
        const double v = k * kLn2 / 4.0;
        const double lg = g.log_at_log(v);
        if (lg < -1e-15) throw RangeError("hypothesis 'g >= 1' fails at x = e^" + num17(v));
        prev = std::max(prev, lg);
    }
    if (!(g.log_at_log(1e6) > prev)) throw RangeError("hypothesis 'g -> inf' fails on the test grid");
}

LevelSchedule schedule_t55(const ConvexRate& phi, const PositiveSequence& g, double w, int j_max) {
    if (j_max < 1) throw RangeError("j_max must be positive");
    validate_t55_inputs(phi, g, w);
    LevelSchedule s;
    s.tag = TheoremTag::T55;
    s.requested_levels = j_max;
    s.inputs_digest = "f=" + phi.name + ";g=" + g.name + ";w=" + num17(w);
    s.w = w;
    const double vw = std::log(w);
    s.log_delta = phi.intercept_log(vw) - phi.log_neg_slope(vw);
    s.seed_level = springboard();

    PiecewiseH h([phi](double v) { return phi.log_neg_slope(v); },
                 [g](double v) { return std::exp(g.log_at_log(v)); });

    LogReal ratio_sum = LogReal::one();  // sum_{u=0}^{j-1} h_u^2 eps_u / theta_u
    LevelRecord prev = *s.seed_level;
    for (int j = 1; j <= j_max; ++j) {
        const std::string where = "level " + std::to_string(j) + ": ";
        const double log_b = std::max(kL9 + 2.0 * prev.h.log() + *s.log_delta,
                                      std::log(static_cast<double>(j)) + ratio_sum.log());
        const double log_eps_star =
            -pow3_exponent(std::min(prev.epsilon.log() - kL3, -j * kL9 - prev.i_cap.log()), 0.0) * kL3;
        const double log_s = std::min({-kL9, prev.theta.log() - kL2, -j * kL2 - log_b});
        const double log_g_threshold = (j + 6.0) * kL2 + (j + 2.0) + log_b;
        if (log_g_threshold > std::log(2.0e6)) {
            s.range_note = where + "g must reach 2^(j+6) e^(j+2) B_j = e^" + num17(log_g_threshold) +
                           "; for slowly growing g this puts log t_j beyond the log-double range";
            break;
        }
        double vt = 0.0, g_at_t = 0.0;
        try {
            const double v_slope = find_T_log(phi, log_eps_star, log_s, kLogSearchCap);
            const double v_g = h.first_log_reaching(std::exp(log_g_threshold));
            vt = std::max({v_slope, vw, v_g});
            h.extend_to_log_x(vt);
            g_at_t = h.at_log(vt);
        } catch (const std::exception& e) {
            s.range_note = where + e.what();
            break;
        }
        const double l0 = -(j + 2.0) + phi.intercept_log(vt);
        const double lt = phi.log_neg_slope(vt);
        const double lh = 0.5 * (log_b + lt - l0);
        if (!std::isfinite(l0) || !std::isfinite(lt) || !std::isfinite(lh)) {
            s.range_note = where + "t_j = e^" + num17(vt) + " gives L_j(0) = " + num17(l0) +
                           ", outside the log-double range";
            break;
        }
        LevelRecord r = make_level(j, l0, lt, lh);
        r.b = LogReal::from_log(log_b);
        r.log_t = vt;
        r.l0 = l0;
        r.eps_star = LogReal::from_log(log_eps_star);
        r.g_at_t = g_at_t;
        s.levels.push_back(r);
        ratio_sum += LogReal::from_log(log_b);
        prev = r;
    }
    return s;
}

LogReal tail_eps_bound(const LevelSchedule& s, int truncation_j) {
    const int k = s.emitted();
    const int jt = std::clamp(truncation_j, 0, k);
    LogReal tail = LogReal::zero();
    for (int j = jt + 1; j <= k; ++j) tail += s.levels[j - 1].epsilon;
    // Levels past the last stored one.
    LogReal beyond = LogReal::from_log(-k * kL9) / LogReal::from_value(8.0);
    if (k >= 1 && (s.tag == TheoremTag::T44 || s.tag == TheoremTag::T55)) {
        beyond = beyond / s.levels[k - 1].i_cap;
        // eps_j <= eps_{j-1}/2 (T44) or /3 (T55) gives a second geometric cap.
        const double ratio = s.tag == TheoremTag::T44 ? 0.5 : 1.0 / 3.0;
        beyond = min(beyond, s.levels[k - 1].epsilon * LogReal::from_value(ratio / (1.0 - ratio)));
    }
    if (k == 0 && s.tag != TheoremTag::T34 && s.tag != TheoremTag::SmallI) beyond = LogReal::from_value(1.0 / 8.0);
    return tail + beyond;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

double log_tol(double a, double b) { return 4.0 * DBL_EPSILON * std::max({1.0, std::fabs(a), std::fabs(b)}); }

CheckRecord le_log(const std::string& name, const std::string& prop, double a, double b) {
    return check_le(name, prop, a, b, log_tol(a, b), "log");
}

CheckRecord lt_log(const std::string& name, const std::string& prop, double a, double b) {
    return check_lt(name, prop, a, b, "log");
}

std::string lv(int j) { return "level " + std::to_string(j) + ": "; }

}  // namespace

ReportFragment validate_schedule(const LevelSchedule& s) {
    ReportFragment f;
    const int k = s.emitted();
    if (s.requested_levels == 0 && k == 0) {
        f.warnings.push_back("empty schedule: every property holds vacuously");
        return f;
    }
    f.add(check_le("levels emitted", "number of representable levels >= requested j_max",
                   -static_cast<double>(k), -static_cast<double>(s.requested_levels)));
    if (k < s.requested_levels) f.checks.back().note = s.range_note;

    const bool t34_like = s.tag == TheoremTag::T34 || s.tag == TheoremTag::SmallI;
    LogReal sum_eps = LogReal::zero(), sum_h2eps = LogReal::zero();
    LogReal ratio_sum = LogReal::zero();  // sum_{u=1}^{j-1} h_u^2 eps_u / theta_u
    for (int idx = 0; idx < k; ++idx) {
        const LevelRecord& r = s.levels[idx];
        const int j = r.j;
        const std::string p = lv(j);
        const double le = r.epsilon.log(), lt = r.theta.log(), lts = r.theta_star.log();
        const double li = r.i_cap.log(), lh = r.h.log();

        // (a)
        f.add(check_true(p + "eps > 0", "eps_j > 0", std::isfinite(le)));
        f.add(le_log(p + "eps <= 1/9", "eps_j <= 1/9", le, -kL9));
        f.add(check_true(p + "theta > 0", "theta_j > 0", std::isfinite(lt)));
        f.add(le_log(p + "theta <= 1/9", "theta_j <= 1/9", lt, -kL9));
        f.add(le_log(p + "theta* <= 1/8", "theta*_j <= 1/8", lts, -3.0 * kL2));
        f.add(le_log(p + "I >= 72", "I_j >= 72", -li, -std::log(72.0)));
        f.add(check_true(p + "h > 0", "h_j > 0", std::isfinite(lh)));
        // derived fields
        const double lts_re = lt - std::log1p(-r.epsilon.value());
        f.add(check_le(p + "theta* consistent", "theta*_j = theta_j / (1 - eps_j)", std::fabs(lts - lts_re), 0.0,
                       log_tol(lts, lts_re), "log"));
        if (r.i_cap_exact > 0) {
            f.add(check_true(p + "I consistent", "I_j = floor(1 / (theta*_j eps_j))",
                             r.i_cap_exact == block_horizon(r.epsilon.value(), r.theta.value())));
        } else {
            const double li_re = -(lts + le);
            f.add(check_le(p + "I consistent", "log I_j = -log(theta*_j eps_j) beyond 2^53", std::fabs(li - li_re), 0.0,
                           log_tol(li, li_re), "log"));
        }
        // (d)
        // theta_j / theta*_j = 1 - eps_j, which rounds to 1 once eps_j < 2^-53.
        f.add(check_true(p + "theta/theta* < 1", "theta_j / theta*_j = 1 - eps_j < 1",
                         std::isfinite(le) && lts >= lt));
        {
            const double prod = lts + le + li;
            f.add(check_le(p + "theta* eps I <= 1", "theta*_j eps_j I_j <= 1", prod, 0.0,
                           r.i_cap_exact > 0 ? 1e-12 : log_tol(li, lts + le), "log"));
        }

        if (idx > 0) {
            const LevelRecord& q = s.levels[idx - 1];
            // (b)
            f.add(lt_log(p + "eps decreasing", "eps_j < eps_{j-1}", le, q.epsilon.log()));
            f.add(lt_log(p + "theta decreasing", "theta_j < theta_{j-1}", lt, q.theta.log()));
            // (c)
            f.add(le_log(p + "theta* nonincreasing", "theta*_j <= theta*_{j-1}", lts, q.theta_star.log()));
            f.add(le_log(p + "I nondecreasing", "I_{j-1} <= I_j", q.i_cap.log(), li));
            // (e), finite-range surrogate
            f.add(le_log(p + "theta/h nonincreasing", "theta_j / h_j <= theta_{j-1} / h_{j-1}", lt - lh,
                         q.theta.log() - q.h.log()));
        }

        // (g)
        if (j >= 2) {
            const double lhs = 2.0 * lh + le - lt;
            const double rhs = std::log(static_cast<double>(j)) + (LogReal::one() + ratio_sum).log();
            f.add(le_log(p + "variance ratio", "h_j^2 eps_j / theta_j >= j (1 + sum_{u<j} h_u^2 eps_u / theta_u)", rhs,
                         lhs));
        }
        const LevelRecord* before = idx > 0 ? &s.levels[idx - 1] : (s.seed_level ? &*s.seed_level : nullptr);
        if (!t34_like && before && (j >= 2 || s.seed_level)) {
            f.add(le_log(p + "eps <= 9^-j / I_{j-1}", "eps_j <= 9^-j / I_{j-1}", le, -j * kL9 - before->i_cap.log()));
        }

        if (t34_like) {
            f.add(le_log(p + "h = 3^-j", "h_j = 3^-j", std::fabs(lh + j * kL3), 0.0));
            if (j >= 2) {
                f.add(le_log(p + "eps <= 9^-j", "eps_j <= 9^-j", le, -j * kL9));
                f.add(le_log(p + "theta <= 9^-j", "theta_j <= 9^-j", lt, -j * kL9));
            }
        }
        if (s.tag == TheoremTag::T34 && j >= 2) {
            for (int l = 1; l < j; ++l) {
                const LevelRecord& a = s.levels[l - 1];
                f.add(le_log(p + "amplitude ratio vs level " + std::to_string(l),
                             "h_j^2 eps_j / (h_l^2 eps_l^2) <= 2^-j", 2.0 * lh + le - 2.0 * (a.h.log() + a.epsilon.log()),
                             -j * kL2));
            }
        }
        if (s.tag == TheoremTag::T34) {
            const std::optional<LogReal> m_next = idx + 1 < k ? s.levels[idx + 1].m : s.m_next;
            if (m_next) {
                f.add(le_log(p + "theta M_{j+1} <= 1/2", "theta_j M_{j+1} <= 1/2", lt, -kL2 - m_next->log()));
            } else {
                f.add(check_skipped(p + "theta M_{j+1} <= 1/2", "theta_j M_{j+1} <= 1/2", "M_{j+1} not stored"));
            }
            if (idx > 0 && r.m && s.levels[idx - 1].m)
                f.add(lt_log(p + "M increasing", "M_{j-1} < M_j", s.levels[idx - 1].m->log(), r.m->log()));
        }
        if (s.tag == TheoremTag::T44 && before) {
            const double b = r.b ? r.b->value() : 0.0;
            const double b_re = (j + 2.0) + std::log(static_cast<double>(j)) - 2.0 * lh +
                                (LogReal::one() + ratio_sum).log();
            f.add(check_le(p + "B recomputed", "B_j = (j+2) + log(j h_j^-2 sum_{u<j} h_u^2 eps_u / theta_u)",
                           std::fabs(b - b_re), 0.0, 1e-12 * std::max(1.0, b), "linear"));
            const double d_re = std::min(-j * kL9 - before->i_cap.log(), before->epsilon.log() - kL2);
            f.add(check_le(p + "D recomputed", "D_j = log min(9^-j / I_{j-1}, eps_{j-1} / 2)",
                           std::fabs(r.d.value_or(0.0) - d_re), 0.0, log_tol(d_re, d_re), "log"));
            f.add(le_log(p + "L(0) + B <= D", "L_j(0) + B_j <= D_j", r.l0.value_or(0.0) + b, r.d.value_or(0.0)));
            f.add(check_le(p + "eps identity", "eps_j = exp(L_j(0)) exp(B_j) e^-(j+2)",
                           std::fabs(le - (r.l0.value_or(0.0) + b - (j + 2.0))), 0.0, 1e-10, "log"));
            f.add(check_le(p + "theta = 1/t", "theta_j = 1 / t_j", std::fabs(lt + r.log_t.value_or(0.0)), 0.0,
                           log_tol(lt, lt), "log"));
            f.add(le_log(p + "eps halves", "eps_j <= eps_{j-1} / 2", le, before->epsilon.log() - kL2));
            f.add(le_log(p + "theta slope bound", "theta_j <= min(9^-j, theta_{j-1} / 2)", lt,
                         std::min(-j * kL9, before->theta.log() - kL2)));
        }
        if (s.tag == TheoremTag::T55 && before) {
            const double lb = r.b ? r.b->log() : 0.0;
            const double lb_re = std::max(kL9 + 2.0 * before->h.log() + s.log_delta.value_or(0.0),
                                          std::log(static_cast<double>(j)) + (LogReal::one() + ratio_sum).log());
            f.add(check_le(p + "B recomputed", "B_j = max(9 h_{j-1}^2 Delta, j sum_{u<j} h_u^2 eps_u / theta_u)",
                           std::fabs(lb - lb_re), 0.0, log_tol(lb, lb_re) + 1e-12, "log"));
            f.add(lt_log(p + "eps/theta < Delta", "eps_j / theta_j < Delta", le - lt, s.log_delta.value_or(0.0)));
            f.add(check_le(p + "h^2 eps / theta = B", "h_j^2 eps_j / theta_j = B_j", std::fabs(2.0 * lh + le - lt - lb), 0.0,
                           log_tol(le, lt), "log"));
            f.add(le_log(p + "h^2 eps <= 2^-j", "h_j^2 eps_j = B_j theta_j <= 2^-j", lb + lt, -j * kL2));
            f.add(le_log(p + "h grows by 3", "h_j >= 3 h_{j-1}", before->h.log() + kL3, lh));
            const double es = r.eps_star ? r.eps_star->log() : 0.0;
            f.add(lt_log(p + "eps < eps*", "eps_j < eps*_j", le, es));
            f.add(le_log(p + "eps* cap", "eps*_j <= min(eps_{j-1} / 3, 9^-j / I_{j-1})", es,
                         std::min(before->epsilon.log() - kL3, -j * kL9 - before->i_cap.log())));
            f.add(le_log(p + "intercept", "L^(t_j)(0) <= log eps*_j", r.l0.value_or(0.0) + (j + 2.0), es));
            f.add(le_log(p + "theta slope bound", "theta_j <= min(1/9, theta_{j-1} / 2, 2^-j / B_j)", lt,
                         std::min({-kL9, before->theta.log() - kL2, -j * kL2 - lb})));
            f.add(le_log(p + "t >= w", "t_j >= w", std::log(s.w), r.log_t.value_or(0.0)));
            const double log_thr = (j + 6.0) * kL2 + (j + 2.0) + lb;
            f.add(le_log(p + "g threshold", "g(t_j) >= 2^(j+6) e^(j+2) B_j (g nondecreasing after preprocessing)",
                         log_thr, std::log(r.g_at_t.value_or(0.0))));
        }

        sum_eps += r.epsilon;
        sum_h2eps += LogReal::from_log(2.0 * lh + le);
        ratio_sum += LogReal::from_log(2.0 * lh + le - lt);
    }

    if (k > 0) {
        // (f)
        f.add(le_log("sum eps <= 1/8", "sum_j eps_j <= 1/8", sum_eps.log(), -3.0 * kL2));
        if (s.tag == TheoremTag::T55)
            f.add(le_log("sum h^2 eps <= 1", "sum_j h_j^2 eps_j <= 1", sum_h2eps.log(), 0.0));
        else
            f.add(lt_log("sum h^2 eps < sum eps", "sum_j h_j^2 eps_j < sum_j eps_j", sum_h2eps.log(), sum_eps.log()));
    }
    return f;
}

// ---------------------------------------------------------------------------
// Text form: one "key value" header line each, then one record per level.

namespace {

void put_opt(std::ostream& os, const char* key, const std::optional<double>& v) {
    if (v) os << ' ' << key << '=' << num17(*v);
}
void put_opt(std::ostream& os, const char* key, const std::optional<LogReal>& v) {
    if (v) os << ' ' << key << '=' << num17(v->log());
}

void write_level(std::ostream& os, const char* head, const LevelRecord& r) {
    os << head << " j=" << r.j << " log_epsilon=" << num17(r.epsilon.log()) << " log_theta=" << num17(r.theta.log())
       << " log_theta_star=" << num17(r.theta_star.log()) << " log_i_cap=" << num17(r.i_cap.log())
       << " i_cap_exact=" << r.i_cap_exact << " log_h=" << num17(r.h.log());
    put_opt(os, "log_b", r.b);
    put_opt(os, "d", r.d);
    put_opt(os, "log_t", r.log_t);
    put_opt(os, "l0", r.l0);
    put_opt(os, "log_m", r.m);
    put_opt(os, "log_eps_star", r.eps_star);
    put_opt(os, "log_q", r.log_q);
    put_opt(os, "g_at_t", r.g_at_t);
    os << '\n';
}

double to_d(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw RangeError("schedule text: bad number '" + s + "'");
    return v;
}

LevelRecord read_level(std::istringstream& is) {
    std::map<std::string, std::string> kv;
    std::string tok;
    while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw RangeError("schedule text: expected key=value, got '" + tok + "'");
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    auto need = [&](const char* k) {
        auto it = kv.find(k);
        if (it == kv.end()) throw RangeError(std::string("schedule text: missing ") + k);
        return it->second;
    };
    LevelRecord r;
    r.j = std::stoi(need("j"));
    r.epsilon = LogReal::from_log(to_d(need("log_epsilon")));
    r.theta = LogReal::from_log(to_d(need("log_theta")));
    r.theta_star = LogReal::from_log(to_d(need("log_theta_star")));
    r.i_cap = LogReal::from_log(to_d(need("log_i_cap")));
    r.i_cap_exact = std::stoll(need("i_cap_exact"));
    r.h = LogReal::from_log(to_d(need("log_h")));
    auto opt_d = [&](const char* k) -> std::optional<double> {
        auto it = kv.find(k);
        if (it == kv.end()) return std::nullopt;
        return to_d(it->second);
    };
    auto opt_l = [&](const char* k) -> std::optional<LogReal> {
        auto v = opt_d(k);
        if (!v) return std::nullopt;
        return LogReal::from_log(*v);
    };
    r.b = opt_l("log_b");
    r.d = opt_d("d");
    r.log_t = opt_d("log_t");
    r.l0 = opt_d("l0");
    r.m = opt_l("log_m");
    r.eps_star = opt_l("log_eps_star");
    r.log_q = opt_d("log_q");
    r.g_at_t = opt_d("g_at_t");
    return r;
}

}  // namespace

std::string serialize_schedule(const LevelSchedule& s) {
    std::ostringstream os;
    os << "# counterchain level schedule; magnitudes are natural logs\n";
    os << "theorem " << tag_name(s.tag) << '\n';
    os << "inputs " << s.inputs_digest << '\n';
    os << "requested " << s.requested_levels << '\n';
    if (s.tag == TheoremTag::T55) os << "w " << num17(s.w) << '\n';
    if (s.log_delta) os << "log_delta " << num17(*s.log_delta) << '\n';
    if (s.m_next) os << "log_m_next " << num17(s.m_next->log()) << '\n';
    if (!s.range_note.empty()) os << "range_note " << s.range_note << '\n';
    if (s.seed_level) write_level(os, "seed", *s.seed_level);
    for (const auto& r : s.levels) write_level(os, "level", r);
    return os.str();
}

LevelSchedule parse_schedule(const std::string& text) {
    LevelSchedule s;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        std::string key;
        is >> key;
        std::string rest;
        std::getline(is >> std::ws, rest);
        if (key == "theorem") s.tag = parse_tag(rest);
        else if (key == "inputs") s.inputs_digest = rest;
        else if (key == "requested") s.requested_levels = std::stoi(rest);
        else if (key == "w") s.w = to_d(rest);
        else if (key == "log_delta") s.log_delta = to_d(rest);
        else if (key == "log_m_next") s.m_next = LogReal::from_log(to_d(rest));
        else if (key == "range_note") s.range_note = rest;
        else if (key == "seed" || key == "level") {
            std::istringstream rec(rest);
            LevelRecord r = read_level(rec);
            if (key == "seed") s.seed_level = r;
            else s.levels.push_back(r);
        } else {
            throw RangeError("schedule text: unknown key '" + key + "'");
        }
    }
    return s;
}

}  // namespace cchain
