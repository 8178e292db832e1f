#pragma once

#include <functional>
#include <string>
#include <vector>

namespace cchain {

inline constexpr double kLn2 = 0.69314718055994530942;
// Horizon of the plain (non-log) searches: x = 2^60.
inline constexpr double kPlainMaxLogX = 60.0 * kLn2;

// Convex, strictly decreasing rate phi on [1, inf) with phi <= 0.
//
// Besides phi and phi' in ordinary coordinates, every rate carries its
// log-coordinate forms phi(e^v) and log(-phi'(e^v)); the schedule recursions
// evaluate rates at points like x = e^(10^14) where x itself is not a double.
struct ConvexRate {
    enum class Tag { LogPower, LogOfF, UserSupplied };

    Tag tag = Tag::UserSupplied;
    std::string name;
    std::function<double(double)> value;       // phi(x)
    std::function<double(double)> derivative;  // phi'(x) < 0
    std::function<double(double)> value_at_log;          // phi(e^v); optional
    std::function<double(double)> log_neg_slope_at_log;  // log(-phi'(e^v)); optional
    std::function<double(double)> intercept_at_log;      // closed-form intercept at e^v; optional

    double phi_log(double v) const;
    double log_neg_slope(double v) const;
    // Intercept phi(y) + y (-phi'(y)) of the tangent at y = e^v.
    double intercept_log(double v) const;
};

// phi(x) = -log x.
ConvexRate neg_log_rate();
// phi = log f for f(x) = x^(-p).
ConvexRate log_power_rate(double p);
// phi = log f for f(x) = exp(-x^q), 0 < q < 1.
ConvexRate log_subexp_rate(double q);

// Throws RangeError naming the first violated property: phi <= 0, strictly
// decreasing, phi' < 0 and nondecreasing, phi(x)/x -> 0 (grid up to 2^40).
void validate_rate(const ConvexRate& phi);

struct AffineLine {
    double intercept = 0.0;  // value at 0
    double slope = 0.0;
    double at(double x) const { return intercept + slope * x; }
};

AffineLine tangent_at(const ConvexRate& phi, double y);

// First point of a monotone predicate (false ... false true ... true) over v = log x,
// found by doubling x up to 2^60, then doubling v, then bisection. Returns the
// passing end of the final bracket. Throws SearchError past max_log_x.
double first_log_crossing(const std::function<bool(double)>& pred, double v_lo, double max_log_x,
                          const std::string& what);

// T(phi, D, s) in log coordinates: log y* with, for y >= y*, -s <= phi'(y) < 0 and
// tangent intercept <= D. Conditions are re-verified at y*, 2y*, 4y*, 8y*.
double find_T_log(const ConvexRate& phi, double d_bound, double log_s_bound, double max_log_x);
// Plain form with the 2^60 horizon.
double find_T(const ConvexRate& phi, double d_bound, double s_bound);

// Nonnegative psi with psi -> inf, given in both coordinate systems.
struct PsiFunction {
    std::function<double(double)> value;         // psi(x)
    std::function<double(double)> value_at_log;  // psi(e^v); optional
    double psi_log(double v) const;
};

struct TStarResult {
    double log_t = 0.0;       // log T*
    double log_q = 0.0;       // log q with psi >= b beyond q
    double shifted_bound = 0.0;  // D - b + phi(q)
};

TStarResult find_T_star_log(const ConvexRate& phi, const PsiFunction& psi, double b, double d_bound,
                            double log_s_bound, double max_log_x);
double find_T_star(const ConvexRate& phi, const PsiFunction& psi, double b, double d_bound, double s_bound);

// Checks L(0) + b <= D and L(x) + b <= phi(x) + psi(x) on a log grid up to
// max(4 log T*, log q + 64 log 2). Returns the largest violation (<= tol means pass).
double t_star_violation(const ConvexRate& phi, const PsiFunction& psi, double b, double d_bound,
                        double log_t);

// Nondecreasing h with 1 <= h <= g, h*f nonincreasing, h -> inf, built from
// alternating breakpoints t_1 = 1 < u_1 < t_2 < u_2 < ... (log coordinates).
// h is j on [t_j, u_j] and j f(u_j)/f(x) on (u_j, t_{j+1}).
class PiecewiseH {
public:
    PiecewiseH(std::function<double(double)> log_f_at_log, std::function<double(double)> g_at_log);

    double at(double x) const;
    double at_log(double v) const;
    // Smallest log x (up to bisection resolution) with h(x) >= level; h is
    // nondecreasing, so h >= level beyond it. Extends the breakpoints as needed.
    double first_log_reaching(double level);

    // Adds levels until t_{K+1} >= e^v or K >= level. Throws SearchError when
    // a breakpoint search fails; the message names the offending interval.
    void extend_to_log_x(double v);
    void extend_to_level(int level);

    int levels() const { return static_cast<int>(log_u_.size()); }
    const std::vector<double>& log_t() const { return log_t_; }
    const std::vector<double>& log_u() const { return log_u_; }
    double max_log_x() const { return log_t_.back(); }

private:
    void add_level();

    std::function<double(double)> log_f_;
    std::function<double(double)> g_;
    std::vector<double> log_t_;    // t_1 .. t_{K+1}
    std::vector<double> log_u_;    // u_1 .. u_K
    std::vector<double> log_f_u_;  // log f(u_j)
};

// log_f_at_log(v) = log f(e^v) for f positive, nonincreasing, f -> 0;
// g_at_log(v) = g(e^v) >= 1 with g -> inf. Breakpoints cover [1, e^min_log_x].
PiecewiseH build_h(std::function<double(double)> log_f_at_log, std::function<double(double)> g_at_log,
                   double min_log_x = 30.0 * kLn2);

// Upper end of every log-coordinate search (x = e^(1e307)).
inline constexpr double kLogSearchCap = 1e307;

}  // namespace cchain
