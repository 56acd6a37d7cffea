#include "amsampler/schedule.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace amsampler;

TEST_CASE("linear schedule matches the high-precision running product") {
    const NoiseSchedule s = linear_beta_schedule(1000, 1e-4, 0.02);
    CHECK(s.steps() == 1000);
    CHECK(s.beta(1) == doctest::Approx(1e-4).epsilon(1e-15));
    CHECK(s.beta(1000) == 0.02);
    // Reference computed with 40-digit arithmetic.
    CHECK(std::abs(s.alpha(1000) / 4.035829765375683314817635e-5 - 1.0) < 1e-12);
    CHECK(s.alpha(0) == 1.0);
}

TEST_CASE("small schedules") {
    const NoiseSchedule one = linear_beta_schedule(1, 0.5, 0.5);
    CHECK(one.betas().size() == 1);
    CHECK(one.alpha(1) == 0.5);

    const NoiseSchedule two = linear_beta_schedule(2, 0.1, 0.3);
    CHECK(two.alpha(1) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(two.alpha(2) == doctest::Approx(0.63).epsilon(1e-15));
}

TEST_CASE("invalid schedule parameters are rejected") {
    CHECK_THROWS_AS(linear_beta_schedule(0, 1e-4, 0.02), std::invalid_argument);
    CHECK_THROWS_AS(linear_beta_schedule(10, 0.0, 0.02), std::invalid_argument);
    CHECK_THROWS_AS(linear_beta_schedule(10, 0.03, 0.02), std::invalid_argument);
    CHECK_THROWS_AS(linear_beta_schedule(10, 1e-4, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(NoiseSchedule({0.1, 1.2}), std::invalid_argument);
    // alpha_zero must exceed alpha(1).
    CHECK_THROWS_AS(linear_beta_schedule(10, 0.1, 0.2, 0.9), std::invalid_argument);
    CHECK_NOTHROW(linear_beta_schedule(10, 0.1, 0.2, 0.95));
    CHECK_THROWS_AS(linear_beta_schedule(10, 1e-4, 0.02).alpha(11), std::out_of_range);
    CHECK_THROWS_AS(linear_beta_schedule(10, 1e-4, 0.02).beta(0), std::out_of_range);
}

TEST_CASE("property: random schedules are strictly decreasing and match the running product") {
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<int> steps(1, 2000);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int T = steps(gen);
        // Keep the total noise bounded so alpha_T stays a normal double.
        const double cap = std::min(0.5, 600.0 / T);
        const double lo = 1e-5 + 0.5 * cap * unit(gen);
        const double hi = lo + (cap - lo) * unit(gen);
        const NoiseSchedule s = linear_beta_schedule(T, lo, hi);
        double running = 1.0;
        for (int t = 1; t <= T; ++t) {
            running *= 1.0 - s.beta(t);
            REQUIRE(std::abs(s.alpha(t) - running) <= 1e-12 * running);
            if (t > 1) {
                REQUIRE(s.alpha(t) < s.alpha(t - 1));
            }
        }
        REQUIRE(s.alpha_zero() > s.alpha(1));
    }
}

TEST_CASE("uniform respacing") {
    const NoiseSchedule s = linear_beta_schedule(1000, 1e-4, 0.02);

    SUBCASE("K = T is the identity") {
        const RespacedSchedule r = respace(s, 1000, RespaceMode::uniform);
        for (int k = 1; k <= 1000; ++k) {
            REQUIRE(r.tau()[static_cast<std::size_t>(k - 1)] == k);
            REQUIRE(r.alphas_tau()[static_cast<std::size_t>(k - 1)] == s.alpha(k));
        }
        CHECK(r.grid() == full_grid(s));
    }
    SUBCASE("K = 25 strides by 40 and ends at T") {
        const RespacedSchedule r = respace(s, 25, RespaceMode::uniform);
        REQUIRE(r.steps() == 25);
        for (int k = 1; k <= 25; ++k) {
            CHECK(r.tau()[static_cast<std::size_t>(k - 1)] == 40 * k);
        }
    }
    SUBCASE("K = 50 gives a runnable grid") {
        const StepGrid g = respace(s, 50, RespaceMode::uniform).grid();
        CHECK(g.steps() == 50);
        CHECK(g.timestep(50) == 1000);
        CHECK(g.alpha(0) == 1.0);
    }
    CHECK_THROWS_AS(respace(s, 1001, RespaceMode::uniform), std::invalid_argument);
    CHECK_THROWS_AS(respace(s, 0, RespaceMode::uniform), std::invalid_argument);
}

TEST_CASE("property: respaced alphas are exact reads for every K and mode") {
    const NoiseSchedule s = linear_beta_schedule(300, 1e-4, 0.05);
    for (RespaceMode mode : {RespaceMode::uniform, RespaceMode::quadratic}) {
        for (int K = 1; K <= 300; K += 7) {
            const RespacedSchedule r = respace(s, K, mode);
            REQUIRE(r.steps() == K);
            REQUIRE(r.tau().back() == 300);
            for (int k = 0; k < K; ++k) {
                const int t = r.tau()[static_cast<std::size_t>(k)];
                REQUIRE(t >= 1);
                if (k > 0) {
                    REQUIRE(t > r.tau()[static_cast<std::size_t>(k - 1)]);
                }
                REQUIRE(r.alphas_tau()[static_cast<std::size_t>(k)] == s.alpha(t));
            }
        }
    }
}

TEST_CASE("quadratic respacing is denser near t = 1") {
    const NoiseSchedule s = linear_beta_schedule(1000, 1e-4, 0.02);
    const RespacedSchedule r = respace(s, 20, RespaceMode::quadratic);
    CHECK(r.tau()[1] - r.tau()[0] < r.tau()[19] - r.tau()[18]);
}

TEST_CASE("schedule CSV") {
    std::ostringstream out;
    linear_beta_schedule(2, 0.1, 0.3).write_csv(out);
    CHECK(out.str() == "t,beta,alpha_cum\n1,0.10000000000000001,0.90000000000000002\n2,0.29999999999999999,0.63\n");
}
