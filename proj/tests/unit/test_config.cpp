#include <doctest.h>

#include <cmath>

#include "batchsom/config.hpp"
#include "batchsom/errors.hpp"
#include "support.hpp"

using namespace batchsom;

TEST_SUITE("config") {

TEST_CASE("resolve_defaults") {
    RawConfig raw;
    CHECK(resolve_defaults(raw, 50, 50).radius0 == 25.0);
    const auto c = resolve_defaults(raw, 20, 30);
    CHECK(c.radius0 == 10.0);
    CHECK(c.radiusN == 1.0);
    CHECK(c.scale0 == 1.0);
    CHECK(c.scaleN == 0.01);
    CHECK(c.nSomX == 20);
    CHECK(c.nSomY == 30);

    raw.radius0 = 5;
    raw.radiusN = 7;
    CHECK_THROWS_AS(resolve_defaults(raw, 50, 50), ConfigError);
}

TEST_CASE("explicit values pass through") {
    RawConfig raw;
    raw.radius0 = 8;
    raw.radiusN = 2;
    raw.scale0 = 0.5;
    raw.scaleN = 0.1;
    const auto c = resolve_defaults(raw, 10, 10);
    CHECK(c.radius0 == 8);
    CHECK(c.radiusN == 2);
    CHECK(c.scale0 == 0.5);
    CHECK(c.scaleN == 0.1);
}

TEST_CASE("one-node-wide maps keep a valid default radius") {
    const auto c = resolve_defaults(RawConfig{}, 1, 10);
    CHECK(c.radius0 >= c.radiusN);
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("validate rejects broken configs") {
    TrainConfig c;
    CHECK_NOTHROW(validate(c));
    auto bad = c;
    bad.nEpochs = 0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = c;
    bad.scaleN = 2.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = c;
    bad.scaleN = 0.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = c;
    bad.snapshotLevel = 3;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = c;
    bad.nSomX = 0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = c;
    bad.radiusN = 0.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("names") {
    CHECK(parse_cooling("linear") == Cooling::Linear);
    CHECK(parse_cooling("exponential") == Cooling::Exponential);
    CHECK_THROWS_AS(parse_cooling("cosine"), ConfigError);
    CHECK(kernel_from_int(1) == KernelType::DenseBlocked);
    CHECK_THROWS_AS(kernel_from_int(3), ConfigError);
}

TEST_CASE("schedule examples") {
    CHECK(schedule(25, 1, Cooling::Linear, 0, 10) == 25.0);
    CHECK(schedule(25, 1, Cooling::Linear, 9, 10) == 1.0);
    CHECK(schedule(16, 1, Cooling::Exponential, 2, 5) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(schedule(25, 1, Cooling::Linear, 0, 1) == 25.0);
    CHECK(schedule(25, 1, Cooling::Exponential, 0, 1) == 25.0);
}

TEST_CASE("property: schedules are monotone between exact endpoints") {
    testsupport::Rng rng(31);
    for (int iter = 0; iter < 500; ++iter) {
        const double end = rng.uniform(0.01, 10);
        const double start = end + rng.uniform(0, 100);
        const auto n = static_cast<std::uint32_t>(rng.integer(1, 50));
        for (auto cooling : {Cooling::Linear, Cooling::Exponential}) {
            CHECK(schedule(start, end, cooling, 0, n) == start);
            if (n > 1) {
                CHECK(schedule(start, end, cooling, n - 1, n) == end);
            }
            double prev = start;
            for (std::uint32_t e = 1; e < n; ++e) {
                const double v = schedule(start, end, cooling, e, n);
                CHECK(v <= prev);
                CHECK(v >= end);
                prev = v;
            }
        }
    }
}

TEST_CASE("linear schedule matches the closed form") {
    for (std::uint32_t e = 0; e < 10; ++e) {
        CHECK(schedule(25, 1, Cooling::Linear, e, 10) == doctest::Approx(25.0 - 24.0 * e / 9.0).epsilon(1e-14));
        CHECK(schedule(25, 1, Cooling::Exponential, e, 10) ==
              doctest::Approx(25.0 * std::pow(1.0 / 25.0, e / 9.0)).epsilon(1e-14));
    }
}

TEST_CASE("epoch_state") {
    TrainConfig c;
    c.nEpochs = 5;
    c.radius0 = 10;
    c.radiusN = 2;
    c.scale0 = 1;
    c.scaleN = 0.2;
    const auto s = epoch_state(c, 4);
    CHECK(s.currentEpoch == 4);
    CHECK(s.radius == 2);
    CHECK(s.scale == 0.2);
}

}
