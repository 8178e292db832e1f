#pragma once

#include <cmath>
#include <limits>

namespace cchain {

// Nonnegative real stored as its natural logarithm.
//
// Schedule parameters routinely leave the double range (t_j ~ e^(10^14)),
// so every recursion runs on logs and only converts back when the value fits.
class LogReal {
public:
    constexpr LogReal() = default;

    static LogReal from_log(double log_value) { return LogReal(log_value); }
    static LogReal from_value(double value) {
        return LogReal(value > 0.0 ? std::log(value) : -std::numeric_limits<double>::infinity());
    }
    static LogReal zero() { return LogReal(-std::numeric_limits<double>::infinity()); }
    static LogReal one() { return LogReal(0.0); }

    double log() const { return log_; }
    // May underflow to 0 or overflow to +inf.
    double value() const { return std::exp(log_); }
    bool is_zero() const { return std::isinf(log_) && log_ < 0.0; }
    // True when value() is a finite normal double (or exactly zero is not allowed).
    bool representable() const {
        return std::isfinite(log_) && log_ < kMaxLog && log_ > kMinNormalLog;
    }

    LogReal operator*(LogReal o) const { return LogReal(log_ + o.log_); }
    LogReal operator/(LogReal o) const { return LogReal(log_ - o.log_); }
    LogReal& operator*=(LogReal o) { log_ += o.log_; return *this; }
    LogReal& operator/=(LogReal o) { log_ -= o.log_; return *this; }

    LogReal operator+(LogReal o) const {
        if (is_zero()) return o;
        if (o.is_zero()) return *this;
        const double hi = std::fmax(log_, o.log_);
        const double lo = std::fmin(log_, o.log_);
        return LogReal(hi + std::log1p(std::exp(lo - hi)));
    }
    LogReal& operator+=(LogReal o) { return *this = *this + o; }

    // |this - o|; exact cancellation yields zero.
    LogReal abs_diff(LogReal o) const {
        if (o.is_zero()) return *this;
        if (is_zero()) return o;
        const double hi = std::fmax(log_, o.log_);
        const double lo = std::fmin(log_, o.log_);
        if (hi == lo) return zero();
        return LogReal(hi + std::log1p(-std::exp(lo - hi)));
    }

    LogReal pow(double k) const { return is_zero() ? *this : LogReal(log_ * k); }
    LogReal sqrt() const { return pow(0.5); }

    friend bool operator<(LogReal a, LogReal b) { return a.log_ < b.log_; }
    friend bool operator<=(LogReal a, LogReal b) { return a.log_ <= b.log_; }
    friend bool operator>(LogReal a, LogReal b) { return a.log_ > b.log_; }
    friend bool operator>=(LogReal a, LogReal b) { return a.log_ >= b.log_; }
    friend bool operator==(LogReal a, LogReal b) { return a.log_ == b.log_; }

    static constexpr double kMaxLog = 709.0;
    static constexpr double kMinNormalLog = -708.0;

private:
    explicit LogReal(double l) : log_(l) {}
    double log_ = -std::numeric_limits<double>::infinity();
};

inline LogReal min(LogReal a, LogReal b) { return a < b ? a : b; }
inline LogReal max(LogReal a, LogReal b) { return a < b ? b : a; }

}  // namespace cchain
