#include "lelect/phase_schedule.hpp"

#include <doctest.h>

#include <cmath>

using namespace lelect;

namespace {

// Direct evaluation of the closed forms in extended precision.
std::int32_t phasesOracle(NodeId n) {
    const long double x = 4.0L * n * std::log2(static_cast<long double>(n));
    return static_cast<std::int32_t>(std::ceil(std::log2(std::sqrt(x)))) + 1;
}

std::int64_t capOracle(NodeId n) {
    return static_cast<std::int64_t>(std::ceil(std::sqrt(4.0L * n * std::log2(static_cast<long double>(n)))));
}

}  // namespace

TEST_CASE("phase count matches the closed form") {
    for (NodeId n = 2; n <= 5000; ++n) {
        const PhaseSchedule s(n);
        INFO("n = " << n);
        REQUIRE(s.phases() == phasesOracle(n));
        REQUIRE(s.refereeCap() == capOracle(n));
    }
    CHECK(PhaseSchedule(1024).phases() == 9);
    CHECK(PhaseSchedule(1024).refereeCap() == 203);
    CHECK(PhaseSchedule(1).phases() == 1);
}

TEST_CASE("referee counts") {
    const PhaseSchedule small(16);
    CHECK(small.phases() == 5);
    CHECK(small.refCount(1) == 15);  // min(20, 16) clamped to 15

    const PhaseSchedule s(1024);
    CHECK(s.refCount(1) == 20);
    CHECK(s.refCount(4) == 160);
    CHECK(s.refCount(5) == 203);
    CHECK(s.refCount(8) == 203);
    CHECK(s.refCount(9) == 1023);
    CHECK_THROWS(s.refCount(0));
    CHECK_THROWS(s.refCount(10));

    for (NodeId n : {2, 3, 5, 16, 64, 100, 256, 1000, 4096, 65535}) {
        const PhaseSchedule p(n);
        for (std::int32_t i = 1; i <= p.phases(); ++i) {
            INFO("n = " << n << ", phase " << i);
            CHECK(p.refCount(i) <= n - 1);
            CHECK(p.refCount(i) >= 1);
            if (i > 1) CHECK(p.refCount(i) >= p.refCount(i - 1));
        }
    }
    CHECK(PhaseSchedule(1).refCount(1) == 0);
}

TEST_CASE("attrition parameters") {
    const PhaseSchedule s(1024);
    CHECK(s.attritionBound(1) == 1024);
    CHECK(s.attritionBound(3) == 64);
    CHECK(s.attritionBound(6) == 1);
    CHECK(PhaseSchedule(1000).attritionBound(2) == 250);
    CHECK(PhaseSchedule(1001).attritionBound(2) == 251);
    // K - ceil(log2 10) - 5 = 9 - 4 - 5
    CHECK(s.attritionLimit() == 0);
    CHECK(s.saturationPhase() == 4);
    CHECK(PhaseSchedule(65535).attritionLimit() == PhaseSchedule(65535).phases() - 4 - 5);
}

TEST_CASE("rank domain and lockstep parameters") {
    CHECK(rankDomain(1024) == (std::uint64_t{1} << 40));
    CHECK(rankDomain(2) == 16);
    CHECK_THROWS(rankDomain(65536));

    CHECK(syncRefereeCount(1024) == 640);
    CHECK(syncRefereeCount(4) == 3);
    CHECK(syncRefereeCount(64) == 63);
    CHECK(syncRefereeCount(1) == 0);

    CHECK(syncAttemptProbability(729, 1) == doctest::Approx(1.0 / 81).epsilon(1e-12));
    CHECK(syncAttemptProbability(729, 2) == doctest::Approx(1.0 / 9).epsilon(1e-12));
    CHECK(syncAttemptProbability(729, 3) == 1.0);
    CHECK_THROWS(syncAttemptProbability(729, 4));
}
