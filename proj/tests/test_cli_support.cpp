#include <cmath>

#include "counterchain/cli_support.hpp"
#include "counterchain/errors.hpp"
#include "doctest.h"

using namespace cchain;

TEST_CASE("rationals parse to the correctly rounded quotient") {
    CHECK(parse_rational("1/9") == 1.0 / 9);
    CHECK(parse_rational("2/6") == 1.0 / 3);
    CHECK(parse_rational("0.125") == 0.125);
    CHECK(parse_rational("1e-3") == 1e-3);
    CHECK_THROWS_AS(parse_rational("1/0"), RangeError);
    CHECK_THROWS_AS(parse_rational("1/"), RangeError);
    CHECK_THROWS_AS(parse_rational("abc"), RangeError);
    CHECK_THROWS_AS(parse_rational("1/9x"), RangeError);
    CHECK_THROWS_AS(parse_rational("9007199254740993/3"), RangeError);
}

TEST_CASE("rate presets") {
    CHECK(parse_rate("power:2").value(std::exp(1.0)) == doctest::Approx(-2.0));
    CHECK(parse_rate("subexp:0.5").value(4.0) == doctest::Approx(-2.0));
    CHECK(parse_rate("neg-log").value(std::exp(3.0)) == doctest::Approx(-3.0));
    CHECK_THROWS_AS(parse_rate("power"), RangeError);
    CHECK_THROWS_AS(parse_rate("cubic:1"), RangeError);
}

TEST_CASE("sequence presets") {
    CHECK(parse_sequence("log-inverse").value(1.0) == doctest::Approx(1 / std::log(3.0)));
    CHECK(parse_sequence("log").value(1.0) == doctest::Approx(std::log(4.0)));
    CHECK(parse_sequence("log-e-plus").value(0.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(parse_sequence("sqrt"), RangeError);
}

TEST_CASE("sha256 known answers") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
