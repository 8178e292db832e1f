#include "counterchain/report.hpp"

#include <algorithm>
#include <cmath>

namespace cchain {

CheckRecord check_le(std::string name, std::string property, double measured, double bound, double tolerance,
                     std::string scale) {
    CheckRecord c{std::move(name), std::move(property), measured, bound, bound - measured, tolerance,
                  std::move(scale), CheckStatus::Pass, {}};
    c.status = measured <= bound + tolerance ? CheckStatus::Pass : CheckStatus::Fail;
    return c;
}

CheckRecord check_lt(std::string name, std::string property, double measured, double bound, std::string scale) {
    CheckRecord c{std::move(name), std::move(property), measured, bound, bound - measured, 0.0, std::move(scale), CheckStatus::Pass, {}};
    c.status = measured < bound ? CheckStatus::Pass : CheckStatus::Fail;
    return c;
}

CheckRecord check_true(std::string name, std::string property, bool ok, std::string note) {
    CheckRecord c;
    c.name = std::move(name);
    c.property = std::move(property);
    c.measured = ok ? 1.0 : 0.0;
    c.bound = 1.0;
    c.slack = ok ? 0.0 : -1.0;
    c.scale = "boolean";
    c.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
    c.note = std::move(note);
    return c;
}

CheckRecord check_skipped(std::string name, std::string property, std::string reason) {
    CheckRecord c;
    c.name = std::move(name);
    c.property = std::move(property);
    c.status = CheckStatus::Skipped;
    c.note = std::move(reason);
    return c;
}

void ReportFragment::merge(const ReportFragment& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
    warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
}

bool ReportFragment::all_passed() const {
    return std::none_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.status == CheckStatus::Fail; });
}

const CheckRecord* ReportFragment::first_failure() const {
    for (const auto& c : checks)
        if (c.status == CheckStatus::Fail) return &c;
    return nullptr;
}

const CheckRecord* ReportFragment::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string status_name(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::Skipped: return "skipped";
    }
    return "unknown";
}

namespace {
nlohmann::ordered_json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}
}  // namespace

nlohmann::ordered_json to_json(const CheckRecord& c) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["property"] = c.property;
    j["status"] = status_name(c.status);
    j["measured"] = num(c.measured);
    j["bound"] = num(c.bound);
    j["slack"] = num(c.slack);
    j["tolerance"] = num(c.tolerance);
    j["scale"] = c.scale;
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

nlohmann::ordered_json RunReport::to_json() const {
    nlohmann::ordered_json j;
    j["theorem"] = theorem_tag;
    j["inputs"] = inputs;
    auto s = nlohmann::ordered_json::object();
    for (const auto& [k, v] : seeds) s[k] = v;
    j["seeds"] = s;
    j["truncation"] = truncation;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : body.checks) arr.push_back(cchain::to_json(c));
    j["checks"] = arr;
    j["warnings"] = body.warnings;
    std::size_t fails = 0, skips = 0;
    for (const auto& c : body.checks) {
        fails += c.status == CheckStatus::Fail;
        skips += c.status == CheckStatus::Skipped;
    }
    j["summary"] = {{"checks", body.checks.size()}, {"failed", fails}, {"skipped", skips},
                    {"passed", all_passed()}};
    return j;
}

}  // namespace cchain
