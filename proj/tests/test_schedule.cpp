#include <cmath>

#include "counterchain/errors.hpp"
#include "counterchain/schedule.hpp"
#include "doctest.h"

using namespace cchain;

namespace {

std::string failures(const ReportFragment& f) {
    std::string out;
    for (const auto& c : f.checks)
        if (c.status == CheckStatus::Fail) out += c.name + "; ";
    return out;
}

}  // namespace

TEST_CASE("tag names round-trip") {
    for (TheoremTag t : {TheoremTag::T34, TheoremTag::T44, TheoremTag::T55, TheoremTag::SmallI})
        CHECK(parse_tag(tag_name(t)) == t);
    CHECK(parse_tag("t44") == TheoremTag::T44);
    CHECK(parse_tag("small-i") == TheoremTag::SmallI);
    CHECK_THROWS_AS(parse_tag("t99"), RangeError);
}

TEST_CASE("small-horizon schedule has the expected first levels") {
    const LevelSchedule s = schedule_small_i(4);
    REQUIRE(s.emitted() == 4);
    CHECK(s.levels[0].i_cap_exact == 72);
    CHECK(s.levels[1].i_cap_exact == 1574640);
    CHECK(s.levels[0].epsilon.value() == doctest::Approx(1.0 / 9));
    CHECK(s.levels[2].h.value() == doctest::Approx(1.0 / 27));
    const ReportFragment f = validate_schedule(s);
    CHECK_MESSAGE(f.all_passed(), failures(f));
}

TEST_CASE("T34 schedule validates to six levels") {
    const LevelSchedule s = schedule_t34(log_inverse_sequence(), 6);
    CHECK(s.emitted() == 6);
    const ReportFragment f = validate_schedule(s);
    CHECK_MESSAGE(f.all_passed(), failures(f));
    CHECK(f.checks.size() > 50);
    // M_j strictly increases and lives far beyond 2^53 after the first level.
    for (int j = 1; j < s.emitted(); ++j) CHECK(*s.levels[j].m > *s.levels[j - 1].m);
}

TEST_CASE("T44 schedule validates to six levels") {
    const LevelSchedule s = schedule_t44(log_sequence(), 6);
    CHECK(s.emitted() == 6);
    const ReportFragment f = validate_schedule(s);
    CHECK_MESSAGE(f.all_passed(), failures(f));
    for (const auto& r : s.levels) {
        REQUIRE(r.log_t);
        CHECK(r.theta.log() == doctest::Approx(-*r.log_t));
    }
}

TEST_CASE("T55 power schedule emits a first level and explains the rest") {
    const ConvexRate phi = log_power_rate(2.0);
    const double w = find_w(phi);
    CHECK(w >= 2.0);
    CHECK_NOTHROW(validate_t55_inputs(phi, log_e_plus_sequence(), w));
    const LevelSchedule s = schedule_t55(phi, log_e_plus_sequence(), w, 4);
    REQUIRE(s.emitted() >= 1);
    CHECK_FALSE(s.range_note.empty());
    const ReportFragment f = validate_schedule(s);
    // Every per-level inequality of the emitted levels holds.
    for (const auto& c : f.checks)
        if (c.name != "levels emitted") CHECK_MESSAGE(c.status != CheckStatus::Fail, c.name);
}

TEST_CASE("T55 inputs are validated") {
    CHECK_THROWS_AS(validate_t55_inputs(log_power_rate(2.0), log_e_plus_sequence(), 1.0), RangeError);
}

TEST_CASE("injected fault: doubling eps_3 breaks validation") {
    LevelSchedule s = schedule_small_i(4);
    s.levels[2].epsilon = s.levels[2].epsilon * LogReal::from_value(2.0);
    const ReportFragment f = validate_schedule(s);
    CHECK_FALSE(f.all_passed());
    const CheckRecord* sum = f.find("sum eps <= 1/8");
    REQUIRE(sum != nullptr);
    CHECK(sum->status == CheckStatus::Fail);
}

TEST_CASE("injected fault: a theta that breaks the M_{j+1} bound is caught") {
    LevelSchedule s = schedule_t34(log_inverse_sequence(), 3);
    s.levels[0].theta = s.levels[0].theta * LogReal::from_value(3.0);
    s.levels[0].theta_star = s.levels[0].theta_star * LogReal::from_value(3.0);
    CHECK_FALSE(validate_schedule(s).all_passed());
}

TEST_CASE("serialization round-trips every stored field") {
    for (const LevelSchedule& s : {schedule_small_i(3), schedule_t34(log_inverse_sequence(), 4),
                                   schedule_t44(log_sequence(), 4)}) {
        const std::string text = serialize_schedule(s);
        const LevelSchedule back = parse_schedule(text);
        CHECK(serialize_schedule(back) == text);
        REQUIRE(back.emitted() == s.emitted());
        for (int j = 0; j < s.emitted(); ++j) {
            CHECK(back.levels[j].epsilon.log() == s.levels[j].epsilon.log());
            CHECK(back.levels[j].theta.log() == s.levels[j].theta.log());
            CHECK(back.levels[j].i_cap_exact == s.levels[j].i_cap_exact);
        }
        CHECK(validate_schedule(back).all_passed());
    }
}

TEST_CASE("tail bound covers the stored levels past the truncation") {
    const LevelSchedule s = schedule_small_i(4);
    const LogReal t2 = tail_eps_bound(s, 2);
    CHECK(t2 >= s.levels[2].epsilon + s.levels[3].epsilon);
    CHECK(tail_eps_bound(s, 4) < t2);
    CHECK(tail_eps_bound(s, 4).value() == doctest::Approx(std::pow(9.0, -4) / 8));
}

TEST_CASE("property: eps and theta strictly decrease across all schedules") {
    for (const LevelSchedule& s : {schedule_small_i(4), schedule_t34(log_inverse_sequence(), 5),
                                   schedule_t44(log_sequence(), 5)}) {
        double sum_eps = 0.0;
        for (int j = 1; j < s.emitted(); ++j) {
            CHECK(s.levels[j].epsilon < s.levels[j - 1].epsilon);
            CHECK(s.levels[j].theta < s.levels[j - 1].theta);
        }
        for (const auto& r : s.levels) sum_eps += r.epsilon.value();
        CHECK(sum_eps <= 1.0 / 8);
    }
}
