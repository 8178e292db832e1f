#pragma once

#include <string>

#include "counterchain/sequences.hpp"
#include "counterchain/tangent.hpp"

namespace cchain {

inline constexpr const char* kVersion = "0.1.0";

// "a/b" with integers, or a decimal; a/b is the correctly rounded quotient when
// |a|, |b| <= 2^53. Throws RangeError on malformed input or b = 0.
double parse_rational(const std::string& text);

// "power:p" (f = x^-p), "subexp:q" (f = exp(-x^q)) or "neg-log"; returns phi = log f.
ConvexRate parse_rate(const std::string& text);
// "log-inverse" (1/log(n+2)), "log" (log(n+3)), "log-e-plus" (log(e+x)).
PositiveSequence parse_sequence(const std::string& text);

// Lowercase hex SHA-256 of the text.
std::string sha256_hex(const std::string& text);

}  // namespace cchain
