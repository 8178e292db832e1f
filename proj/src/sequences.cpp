#include "counterchain/sequences.hpp"

#include <algorithm>
#include <cmath>

namespace cchain {

double PositiveSequence::log_at_log(double v) const {
    if (log_value_at_log) return log_value_at_log(v);
    return std::log(value(std::exp(v)));
}

double log_exp_plus(double v, double c) {
    if (c <= 0.0) return v;
    const double lc = std::log(c);
    const double hi = std::max(v, lc);
    return hi + std::log1p(std::exp(std::min(v, lc) - hi));
}

PositiveSequence log_inverse_sequence() {
    return {"log-inverse", [](double n) { return 1.0 / std::log(n + 2.0); },
            [](double v) { return -std::log(log_exp_plus(v, 2.0)); }};
}

PositiveSequence log_sequence() {
    return {"log", [](double n) { return std::log(n + 3.0); },
            [](double v) { return std::log(log_exp_plus(v, 3.0)); }};
}

PositiveSequence log_e_plus_sequence() {
    return {"log-e-plus", [](double x) { return std::log(std::exp(1.0) + x); },
            [](double v) { return std::log(log_exp_plus(v, std::exp(1.0))); }};
}

}  // namespace cchain
