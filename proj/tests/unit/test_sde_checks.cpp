#include "amsampler/samplers.hpp"
#include "amsampler/sde_checks.hpp"

#include <doctest.h>

#include <cmath>

using namespace amsampler;

namespace {

Point p1(double v) { return Point::Constant(1, v); }

}  // namespace

TEST_CASE("euler step with a zero score and no noise keeps the state") {
    const XbarScore zero = [](const Point& x) -> Point { return Point::Zero(x.size()); };
    CHECK(reverse_sde_euler_step(zero, p1(1.3), 0.5, 0.6, p1(0.0))[0] == 1.3);
}

TEST_CASE("euler step on standard Gaussian data is the hand-derived affine map") {
    // Data N(0, 1) keeps every marginal N(0, 1): the x score is -x, so the
    // x-bar score is -alpha x_bar.
    const GaussianMixture normal({1.0}, {p1(0.0)}, {p1(1.0)});
    const double at = 0.4;
    const double ap = 0.5;
    const double beta = 1.0 - at / ap;
    const XbarScore score = xbar_score(normal, at);
    for (double xb : {-2.0, 0.5, 3.0}) {
        for (double e : {0.0, 1.0}) {
            const double expected = (1.0 - beta) * xb + std::sqrt(beta / at) * e;
            CHECK(reverse_sde_euler_step(score, p1(xb), at, ap, p1(e))[0] == doctest::Approx(expected).epsilon(1e-14));
        }
    }
}

TEST_CASE("drift identity holds on the two-point toy") {
    const NoiseSchedule s = linear_beta_schedule(1000, 1e-4, 0.02);
    const GaussianMixture gmm = GaussianMixture::points_1d({-2.0, 4.0});
    Rng rng(4);
    const auto rows = drift_consistency(s, gmm, 8, rng);
    REQUIRE(rows.size() == 1000);
    for (const auto& row : rows) {
        REQUIRE(row.drift_mismatch < 1e-10);
        CHECK(row.diffusion_ratio == doctest::Approx(row.closed_form_ratio).epsilon(1e-9));
    }
    // Away from the start the ratio sits within O(beta) of one.
    for (const auto& row : rows) {
        if (row.t >= 50) {
            CHECK(std::abs(row.diffusion_ratio - 1.0) < 2.0 * row.beta / (1.0 - row.alpha) + 1e-12);
        }
    }
    CHECK(rows.front().diffusion_ratio == 0.0);
}

TEST_CASE("friction mapping") {
    const FrictionMapping zero = FrictionMapping::from_lambda(0.0);
    CHECK(zero.a == 1.0);
    CHECK(zero.b == -1.0);
    const FrictionMapping two = FrictionMapping::from_lambda(2.0);
    CHECK(two.a == 0.0);
    CHECK(two.b == -0.5);
    CHECK_THROWS_AS(FrictionMapping::from_lambda(-2.0), std::domain_error);
}

TEST_CASE("momentum and midpoint recursions coincide") {
    std::vector<double> noise(1000);
    Rng rng(21);
    for (double& v : noise) v = 0.01 * rng.normal();
    const ScalarDrift drift = [](double x, int step) { return 0.01 * x + 0.001 * std::sin(0.01 * step); };
    for (double lambda : {0.0, 0.5, 1.0, 2.0}) {
        const MidpointComparison cmp = midpoint_equivalence(lambda, 1000, drift, noise, 0.3);
        CHECK(cmp.momentum_path.size() == 1000);
        CHECK(cmp.max_deviation < 1e-12);
    }
}

TEST_CASE("zero drift and zero noise hold the state") {
    const std::vector<double> noise(100, 0.0);
    const ScalarDrift none = [](double, int) { return 0.0; };
    const MidpointComparison cmp = midpoint_equivalence(1.0, 100, none, noise, 2.5);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(cmp.momentum_path[i] == 2.5);
        CHECK(cmp.midpoint_path[i] == 2.5);
    }
    CHECK_THROWS_AS(midpoint_equivalence(1.0, 101, none, noise), std::invalid_argument);
}
