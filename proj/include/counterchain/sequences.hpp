#pragma once

#include <functional>
#include <string>

namespace cchain {

// Positive sequence or function on [1, inf), with an optional log-coordinate
// form log a(e^v) for arguments beyond the double range.
struct PositiveSequence {
    std::string name;
    std::function<double(double)> value;             // a(x)
    std::function<double(double)> log_value_at_log;  // log a(e^v); optional

    double log_at_log(double v) const;
};

// q_n = 1 / log(n + 2).
PositiveSequence log_inverse_sequence();
// g_n = log(n + 3).
PositiveSequence log_sequence();
// g(x) = log(e + x).
PositiveSequence log_e_plus_sequence();

// log(e^v + c) without overflow, c >= 0.
double log_exp_plus(double v, double c);

}  // namespace cchain
