#pragma once

#include <stdexcept>
#include <string>

namespace cchain {

// Parameter outside its admissible range (e.g. epsilon > 1/9).
class RangeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A monotone search ran past its horizon without meeting its condition.
class SearchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A recursion could not produce the requested level.
class ScheduleError : public std::runtime_error {
public:
    ScheduleError(int level, const std::string& what)
        : std::runtime_error("level " + std::to_string(level) + ": " + what), level_(level) {}
    int level() const noexcept { return level_; }

private:
    int level_;
};

// Truncated mass exceeded the allowed budget.
class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Requested work exceeds a configured cost budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cchain
