#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace cchain {

enum class CheckStatus { Pass, Fail, Skipped };

// One verified inequality. When scale is "log", measured/bound are natural logs.
struct CheckRecord {
    std::string name;
    std::string property;  // the inequality, stated in words
    double measured = 0.0;
    double bound = 0.0;
    double slack = 0.0;  // bound - measured on the stated scale
    double tolerance = 0.0;
    std::string scale = "linear";
    CheckStatus status = CheckStatus::Pass;
    std::string note;

    bool passed() const { return status == CheckStatus::Pass; }
};

// measured <= bound + tolerance.
CheckRecord check_le(std::string name, std::string property, double measured, double bound,
                     double tolerance = 0.0, std::string scale = "linear");
// measured < bound (strict), with no tolerance.
CheckRecord check_lt(std::string name, std::string property, double measured, double bound,
                     std::string scale = "linear");
CheckRecord check_true(std::string name, std::string property, bool ok, std::string note = {});
CheckRecord check_skipped(std::string name, std::string property, std::string reason);

struct ReportFragment {
    std::vector<CheckRecord> checks;
    std::vector<std::string> warnings;

    void add(CheckRecord c) { checks.push_back(std::move(c)); }
    void merge(const ReportFragment& other);
    bool all_passed() const;  // skipped checks do not count as failures
    const CheckRecord* first_failure() const;
    const CheckRecord* find(const std::string& name) const;
};

struct RunReport {
    std::string theorem_tag;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    std::vector<std::pair<std::string, std::uint64_t>> seeds;
    ReportFragment body;
    nlohmann::ordered_json truncation = nlohmann::ordered_json::object();

    bool all_passed() const { return body.all_passed(); }
    nlohmann::ordered_json to_json() const;
};

nlohmann::ordered_json to_json(const CheckRecord& c);
std::string status_name(CheckStatus s);

}  // namespace cchain
