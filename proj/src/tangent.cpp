#include "counterchain/tangent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "counterchain/errors.hpp"

namespace cchain {

namespace {

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

constexpr int kMaxHLevels = 5'000'000;

}  // namespace

double ConvexRate::phi_log(double v) const {
    if (value_at_log) return value_at_log(v);
    return value(std::exp(v));
}

double ConvexRate::log_neg_slope(double v) const {
    if (log_neg_slope_at_log) return log_neg_slope_at_log(v);
    return std::log(-derivative(std::exp(v)));
}

double ConvexRate::intercept_log(double v) const {
    if (intercept_at_log) return intercept_at_log(v);
    return phi_log(v) + std::exp(v + log_neg_slope(v));
}

ConvexRate neg_log_rate() {
    ConvexRate r;
    r.tag = ConvexRate::Tag::LogPower;
    r.name = "neg-log";
    r.value = [](double x) { return -std::log(x); };
    r.derivative = [](double x) { return -1.0 / x; };
    r.value_at_log = [](double v) { return -v; };
    r.log_neg_slope_at_log = [](double v) { return -v; };
    return r;
}

ConvexRate log_power_rate(double p) {
    if (!(p > 0.0)) throw RangeError("power rate needs p > 0");
    ConvexRate r;
    r.tag = ConvexRate::Tag::LogOfF;
    r.name = "power:" + fmt_num(p);
    r.value = [p](double x) { return -p * std::log(x); };
    r.derivative = [p](double x) { return -p / x; };
    r.value_at_log = [p](double v) { return -p * v; };
    const double lp = std::log(p);
    r.log_neg_slope_at_log = [lp](double v) { return lp - v; };
    return r;
}

ConvexRate log_subexp_rate(double q) {
    if (!(q > 0.0 && q < 1.0)) throw RangeError("sub-exponential rate needs 0 < q < 1");
    ConvexRate r;
    r.tag = ConvexRate::Tag::LogOfF;
    r.name = "subexp:" + fmt_num(q);
    r.value = [q](double x) { return -std::pow(x, q); };
    r.derivative = [q](double x) { return -q * std::pow(x, q - 1.0); };
    r.value_at_log = [q](double v) { return -std::exp(q * v); };
    const double lq = std::log(q);
    r.log_neg_slope_at_log = [q, lq](double v) { return lq + (q - 1.0) * v; };
    // -x^q + q x^q, kept as one term so that it stays finite until x^q overflows.
    r.intercept_at_log = [q](double v) { return -(1.0 - q) * std::exp(q * v); };
    return r;
}

void validate_rate(const ConvexRate& phi) {
    if (!phi.value || !phi.derivative) throw RangeError(phi.name + ": value and derivative are required");
    double prev_val = phi.value(1.0);
    if (prev_val > 1e-12) throw RangeError(phi.name + ": phi(1) > 0");
    double prev_der = -std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 160; ++k) {
        const double x = std::exp2(k / 4.0);
        const double val = phi.value(x);
        const double der = phi.derivative(x);
        if (val > 1e-12) throw RangeError(phi.name + ": phi > 0 at x = " + fmt_num(x));
        if (!(val < prev_val)) throw RangeError(phi.name + ": not strictly decreasing at x = " + fmt_num(x));
        if (!(der < 0.0)) throw RangeError(phi.name + ": phi' >= 0 at x = " + fmt_num(x));
        if (der < prev_der - 1e-12 * std::fabs(prev_der))
            throw RangeError(phi.name + ": phi' decreases (not convex) at x = " + fmt_num(x));
        prev_val = val;
        prev_der = der;
    }
    const double big = std::exp2(40.0);
    if (!(std::fabs(phi.value(big)) / big < 1e-3))
        throw RangeError(phi.name + ": phi(x)/x does not tend to 0 on the 2^40 grid");
}

AffineLine tangent_at(const ConvexRate& phi, double y) {
    if (!(y > 1.0)) throw RangeError("tangent_at needs y > 1");
    const double slope = phi.derivative(y);
    return {phi.value(y) - y * slope, slope};
}

double first_log_crossing(const std::function<bool(double)>& pred, double v_lo, double max_log_x,
                          const std::string& what) {
    double lo = v_lo;
    double hi = 0.0;
    for (;;) {
        double next = lo < kPlainMaxLogX ? lo + kLn2 : 2.0 * lo;
        if (next > max_log_x) {
            if (lo >= max_log_x)
                throw SearchError(what + ": no crossing below x = e^" + fmt_num(max_log_x));
            next = max_log_x;
        }
        if (pred(next)) {
            hi = next;
            break;
        }
        lo = next;
    }
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (pred(mid) ? hi : lo) = mid;
    }
    return hi;
}

namespace {

bool tangent_conditions(const ConvexRate& phi, double d_bound, double log_s, double v) {
    const double lns = phi.log_neg_slope(v);
    return std::isfinite(lns) && lns <= log_s && phi.intercept_log(v) <= d_bound;
}

}  // namespace

double find_T_log(const ConvexRate& phi, double d_bound, double log_s_bound, double max_log_x) {
    if (!(d_bound < 0.0)) throw RangeError("find_T needs D < 0");
    if (std::isnan(log_s_bound)) throw RangeError("find_T needs s > 0");
    auto pred = [&](double v) { return tangent_conditions(phi, d_bound, log_s_bound, v); };
    const double v = first_log_crossing(pred, 0.0, max_log_x, "find_T");
    for (int k = 1; k <= 3; ++k) {
        const double w = v < kPlainMaxLogX ? v + k * kLn2 : v * std::exp2(k);
        if (!pred(w)) throw SearchError("find_T: conditions fail at 2^" + std::to_string(k) + " y*");
    }
    return v;
}

double find_T(const ConvexRate& phi, double d_bound, double s_bound) {
    if (!(s_bound > 0.0)) throw RangeError("find_T needs s > 0");
    return std::exp(find_T_log(phi, d_bound, std::log(s_bound), kPlainMaxLogX));
}

double PsiFunction::psi_log(double v) const {
    if (value_at_log) return value_at_log(v);
    return value(std::exp(v));
}

TStarResult find_T_star_log(const ConvexRate& phi, const PsiFunction& psi, double b, double d_bound,
                            double log_s_bound, double max_log_x) {
    if (!(b > 0.0)) throw RangeError("find_T_star needs b > 0");
    if (!(d_bound < 0.0)) throw RangeError("find_T_star needs D < 0");
    auto reaches = [&](double v) { return psi.psi_log(v) >= b; };

    double vq = reaches(0.0) ? 0.0 : first_log_crossing(reaches, 0.0, max_log_x, "find_T_star psi threshold");
    // psi need not be monotone: look for a later dip below b and restart past it.
    for (int restart = 0;; ++restart) {
        double dip = -1.0;
        for (int k = 1; k <= 256 && dip < 0.0; ++k) {
            const double w = vq < kPlainMaxLogX ? vq + k * kLn2 / 4.0 : vq * (1.0 + k / 64.0);
            if (w > max_log_x) break;
            if (!reaches(w)) dip = w;
        }
        if (dip < 0.0) break;
        if (restart >= 64) throw SearchError("find_T_star: psi keeps dipping below b");
        vq = first_log_crossing(reaches, dip, max_log_x, "find_T_star psi threshold");
    }

    TStarResult r;
    r.log_q = vq;
    r.shifted_bound = d_bound - b + phi.phi_log(vq);
    r.log_t = find_T_log(phi, r.shifted_bound, log_s_bound, max_log_x);
    const double viol = t_star_violation(phi, psi, b, d_bound, r.log_t);
    if (viol > 1e-9) throw SearchError("find_T_star: tangent inequality fails on grid by " + fmt_num(viol));
    return r;
}

double find_T_star(const ConvexRate& phi, const PsiFunction& psi, double b, double d_bound, double s_bound) {
    if (!(s_bound > 0.0)) throw RangeError("find_T_star needs s > 0");
    return std::exp(find_T_star_log(phi, psi, b, d_bound, std::log(s_bound), kPlainMaxLogX).log_t);
}

double t_star_violation(const ConvexRate& phi, const PsiFunction& psi, double b, double d_bound,
                        double log_t) {
    const double l0 = phi.intercept_log(log_t);
    const double lns = phi.log_neg_slope(log_t);
    double worst = std::max(0.0, (l0 + b - d_bound) / std::max(1.0, std::fabs(d_bound)));
    const double vmax = std::max(4.0 * log_t, log_t + 64.0 * kLn2);
    constexpr int kGrid = 4000;
    for (int k = 0; k <= kGrid; ++k) {
        // Uniform in v up to the tangent point, then geometric in v beyond it.
        const double v = k <= kGrid / 2 ? log_t * (2.0 * k / kGrid)
                                        : log_t + (vmax - log_t) * std::pow(2.0 * (k - kGrid / 2) / kGrid, 2.0);
        const double line = l0 - std::exp(lns + v);
        const double rhs = phi.phi_log(v) + psi.psi_log(v);
        const double excess = (line + b - rhs) / std::max(1.0, std::fabs(rhs));
        worst = std::max(worst, excess);
    }
    return worst;
}

PiecewiseH::PiecewiseH(std::function<double(double)> log_f_at_log, std::function<double(double)> g_at_log)
    : log_f_(std::move(log_f_at_log)), g_(std::move(g_at_log)), log_t_{0.0} {}

void PiecewiseH::add_level() {
    const int j = levels() + 1;
    if (j > kMaxHLevels) throw SearchError("build_h: level cap " + std::to_string(kMaxHLevels) + " reached");
    const double vt = log_t_.back();
    const double v_above = vt + std::log1p(std::exp(-vt));  // log(t_j + 1)
    auto g_ok = [&](double v) { return g_(v) >= j + 1.0; };
    double vu = g_ok(v_above) ? v_above : first_log_crossing(g_ok, v_above, kLogSearchCap, "build_h u_j");
    vu = std::nextafter(std::max(vu, v_above), std::numeric_limits<double>::infinity());
    const double lfu = log_f_(vu);
    if (!std::isfinite(lfu))
        throw SearchError("build_h: f not positive and finite at u_" + std::to_string(j) + " = e^" + fmt_num(vu));
    const double target = lfu + std::log(static_cast<double>(j) / (j + 1.0));
    auto f_low = [&](double v) { return log_f_(v) <= target; };
    double vt_next = 0.0;
    try {
        vt_next = first_log_crossing(f_low, vu, kLogSearchCap, "build_h t_j");
    } catch (const SearchError&) {
        throw SearchError("build_h: f does not drop by factor " + std::to_string(j) + "/" + std::to_string(j + 1) +
                          " on (e^" + fmt_num(vu) + ", inf)");
    }
    if (std::fabs(log_f_(vt_next) - target) > 1e-6 * std::max(1.0, std::fabs(target)))
        throw SearchError("build_h: f jumps across the root in (e^" + fmt_num(vu) + ", e^" + fmt_num(vt_next) + ")");
    log_u_.push_back(vu);
    log_f_u_.push_back(lfu);
    log_t_.push_back(vt_next);
}

void PiecewiseH::extend_to_log_x(double v) {
    while (log_t_.back() < v) add_level();
}

void PiecewiseH::extend_to_level(int level) {
    while (levels() < level) add_level();
}

double PiecewiseH::at_log(double v) const {
    if (v < 0.0) throw RangeError("h is defined on [1, inf)");
    if (v > log_t_.back()) throw RangeError("h evaluated beyond its constructed breakpoints");
    const auto it = std::upper_bound(log_t_.begin(), log_t_.end(), v);
    const std::size_t i = static_cast<std::size_t>(it - log_t_.begin()) - 1;  // t_{i+1} <= v
    const double j = static_cast<double>(i + 1);
    if (i >= log_u_.size() || v <= log_u_[i]) return j;
    return j * std::exp(log_f_u_[i] - log_f_(v));
}

double PiecewiseH::at(double x) const {
    if (!(x >= 1.0)) throw RangeError("h is defined on [1, inf)");
    return at_log(std::log(x));
}

double PiecewiseH::first_log_reaching(double level) {
    if (level <= 1.0) return 0.0;
    const double jf = std::floor(level);
    const int j = static_cast<int>(jf);
    extend_to_level(j);
    if (jf == level) return log_t_[j - 1];
    const std::size_t i = static_cast<std::size_t>(j - 1);
    const double target = log_f_u_[i] + std::log(jf / level);
    double lo = log_u_[i];
    double hi = log_t_[i + 1];
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (log_f_(mid) <= target ? hi : lo) = mid;
    }
    return hi;
}

PiecewiseH build_h(std::function<double(double)> log_f_at_log, std::function<double(double)> g_at_log,
                   double min_log_x) {
    PiecewiseH h(std::move(log_f_at_log), std::move(g_at_log));
    h.extend_to_log_x(min_log_x);
    return h;
}

}  // namespace cchain
