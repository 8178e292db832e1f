#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "counterchain/block.hpp"
#include "counterchain/log_real.hpp"
#include "counterchain/report.hpp"
#include "counterchain/sequences.hpp"
#include "counterchain/tangent.hpp"

namespace cchain {

// T34: bounded chain with variance growth above q_n n^2.
// T44: bounded chain with beta(n) <= g_n / n.
// T55: unbounded chain with beta(n) <= f(n) and a quantile tail bound.
// SmallI: T34-shaped levels with the largest admissible epsilon_j, theta_j,
// used where block horizons I_j must stay simulable.
enum class TheoremTag { T34, T44, T55, SmallI };

std::string tag_name(TheoremTag t);
TheoremTag parse_tag(const std::string& s);

// Every magnitude is stored as a log; t_j, M_j, I_j and h_j leave the double
// range after a level or two for the slowly varying inputs of interest.
struct LevelRecord {
    int j = 0;
    LogReal epsilon, theta, theta_star, i_cap, h;
    std::int64_t i_cap_exact = 0;  // floor(1/(theta_star eps)) when below 2^53, else 0

    std::optional<LogReal> b;          // B_j
    std::optional<double> d;           // D_j
    std::optional<double> log_t;       // log t_j
    std::optional<double> l0;          // L_j(0)
    std::optional<LogReal> m;          // M_j
    std::optional<LogReal> eps_star;   // epsilon*_j
    std::optional<double> log_q;       // log of the psi threshold point
    std::optional<double> g_at_t;      // preprocessed g at t_j

    // Double-precision parameters; rates below the double range become 0.
    BlockParams block() const;
};

struct LevelSchedule {
    TheoremTag tag = TheoremTag::T34;
    std::vector<LevelRecord> levels;         // j = 1 .. K
    std::optional<LevelRecord> seed_level;   // j = 0 springboard
    std::optional<LogReal> m_next;           // M_{K+1}
    std::string inputs_digest;
    int requested_levels = 0;
    std::string range_note;                  // why fewer than requested levels exist
    double w = 0.0;                          // T55
    std::optional<double> log_delta;         // T55

    int emitted() const { return static_cast<int>(levels.size()); }
};

struct ScheduleOptions {
    std::int64_t m_scan_cap = 10'000'000;
};

// epsilon_j: largest power of 1/3 meeting the cap and amplitude-ratio
// constraints; M_j: first index from which q_n <= h_j^2 eps_j / 2; theta_j:
// largest power of 1/3 meeting the cap, M_{j+1} and variance-ratio constraints.
LevelSchedule schedule_t34(const PositiveSequence& q, int j_max, const ScheduleOptions& opt = {});

// phi = -log x, psi = piecewise-affine interpolant of log g_n.
LevelSchedule schedule_t44(const PositiveSequence& g, int j_max);

// Smallest power of two w >= 2 with x f(x) nonincreasing beyond w on a log grid.
double find_w(const ConvexRate& phi);
// Throws RangeError naming the failed hypothesis on f = exp(phi), g or w.
void validate_t55_inputs(const ConvexRate& phi, const PositiveSequence& g, double w);
// phi = log f. g is replaced by the rate builder's h for f_h = -phi'. Levels whose
// parameters leave the log-double range are not emitted; range_note says why.
LevelSchedule schedule_t55(const ConvexRate& phi, const PositiveSequence& g, double w, int j_max);

// h_j = 3^-j, eps_j = 9^-j, theta_j the largest power of 1/3 with
// theta_j <= min(9^-j, theta_{j-1}) and the variance-ratio inequality.
LevelSchedule schedule_small_i(int j_max);

// Recomputes every summary property from stored values; each inequality is a check.
ReportFragment validate_schedule(const LevelSchedule& s);

// Upper bound on sum_{j > J} eps_j: stored levels past J plus the geometric
// cap implied by eps_j <= 9^-j (T34, SmallI) or eps_j <= 9^-j / I_{j-1} (T44, T55).
LogReal tail_eps_bound(const LevelSchedule& s, int truncation_j);

std::string serialize_schedule(const LevelSchedule& s);
LevelSchedule parse_schedule(const std::string& text);

}  // namespace cchain
