#include "counterchain/cli_support.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdint>

#include "counterchain/errors.hpp"

namespace cchain {

namespace {

bool parse_int(const std::string& s, std::int64_t& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (b != e && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

double parse_decimal(const std::string& s, const std::string& whole) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (b != e && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e || !std::isfinite(v)) throw RangeError("malformed number '" + whole + "'");
    return v;
}

}  // namespace

double parse_rational(const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) return parse_decimal(text, text);
    std::int64_t a = 0, b = 0;
    if (!parse_int(text.substr(0, slash), a) || !parse_int(text.substr(slash + 1), b))
        throw RangeError("malformed rational '" + text + "'");
    if (b == 0) throw RangeError("zero denominator in '" + text + "'");
    constexpr std::int64_t kExact = std::int64_t{1} << 53;
    if (a > kExact || a < -kExact || b > kExact || b < -kExact)
        throw RangeError("rational '" + text + "' has parts beyond 2^53");
    return static_cast<double>(a) / static_cast<double>(b);
}

ConvexRate parse_rate(const std::string& text) {
    if (text == "neg-log") return neg_log_rate();
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const std::string kind = text.substr(0, colon);
        const double arg = parse_rational(text.substr(colon + 1));
        if (kind == "power") return log_power_rate(arg);
        if (kind == "subexp") return log_subexp_rate(arg);
    }
    throw RangeError("unknown rate '" + text + "' (expected power:p, subexp:q or neg-log)");
}

PositiveSequence parse_sequence(const std::string& text) {
    if (text == "log-inverse") return log_inverse_sequence();
    if (text == "log") return log_sequence();
    if (text == "log-e-plus") return log_e_plus_sequence();
    throw RangeError("unknown sequence '" + text + "' (expected log-inverse, log or log-e-plus)");
}

std::string sha256_hex(const std::string& text) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

}  // namespace cchain
