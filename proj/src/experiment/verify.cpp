#include "amsampler/experiment/verify.hpp"

#include "amsampler/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#ifndef AMSAMPLER_VERSION
#define AMSAMPLER_VERSION "dev"
#endif

namespace amsampler::experiment {

namespace {

Point p1(double v) { return Point::Constant(1, v); }

const EtaMode kModes[] = {EtaMode::deterministic, EtaMode::ddpm_unit, EtaMode::ddpm_hat};

CheckResult below(std::string name, std::string invariant, double observed, double threshold, bool gating = true) {
    CheckResult r;
    r.name = std::move(name);
    r.invariant = std::move(invariant);
    r.observed = observed;
    r.threshold = threshold;
    r.passed = observed < threshold;
    r.gating = gating;
    return r;
}

GaussianMixture toy() { return GaussianMixture::points_1d({-2.0, 4.0}); }

GaussianMixture toy_2d() {
    return GaussianMixture::isotropic({0.4, 0.6}, {Point::Constant(2, -1.0), Point::Constant(2, 2.0)}, {0.0, 0.2});
}

CheckResult degeneracy() {
    double worst = 0.0;
    for (int T : {10, 50, 200}) {
        const StepGrid grid = full_grid(linear_beta_schedule(T, 0.1 / T, std::min(0.5, 20.0 / T)));
        for (int dim : {1, 2}) {
            const GaussianMixture gmm = dim == 1 ? toy() : toy_2d();
            for (EtaMode m : kModes) {
                SamplerConfig vanilla;
                vanilla.eta = m;
                const SamplerConfig degen = degenerate_adaptive(m);
                const BatchResult a = run_chains(gmm, grid, vanilla, 16, 7);
                const BatchResult b = run_chains(gmm, grid, degen, 16, 7);
                for (std::size_t i = 0; i < a.samples.size(); ++i) {
                    worst = std::max(worst, (a.samples[i] - b.samples[i]).cwiseAbs().maxCoeff());
                }
            }
        }
    }
    return below("degeneracy", "adaptive (a=0, b=1, c=0, zeta=0) equals vanilla element-wise", worst, 1e-12);
}

CheckResult score_consistency(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index dim = 1 + trial % 2;
        const int n = 1 + trial % 3;
        std::vector<double> w;
        std::vector<Point> mu;
        std::vector<Point> var;
        double total = 0.0;
        for (int k = 0; k < n; ++k) {
            w.push_back(0.2 + unit(gen));
            total += w.back();
            mu.push_back(Point::NullaryExpr(dim, [&] { return -4.0 + 8.0 * unit(gen); }));
            var.push_back(Point::NullaryExpr(dim, [&] { return unit(gen) < 0.3 ? 0.0 : 0.05 + unit(gen); }));
        }
        for (double& v : w) v /= total;
        const GaussianMixture gmm(w, mu, var);
        const double alpha = 0.02 + 0.93 * unit(gen);
        Rng rng(seed, static_cast<std::uint64_t>(trial));
        const Point x = std::sqrt(alpha) * gmm.sample(rng) + std::sqrt(1 - alpha) * rng.normal_vector(dim);
        const Point eps = gmm.predict(x, alpha).eps_hat;
        Point fd(dim);
        const double h = 1e-5;
        for (Eigen::Index d = 0; d < dim; ++d) {
            Point up = x;
            Point dn = x;
            up[d] += h;
            dn[d] -= h;
            fd[d] = -std::sqrt(1 - alpha) * (gmm.log_density(up, alpha) - gmm.log_density(dn, alpha)) / (2 * h);
        }
        worst = std::max(worst, (eps - fd).norm() / std::max(eps.norm(), 1e-3));
    }
    return below("score_consistency", "eps_hat = -sqrt(1 - alpha) * finite-difference score", worst, 1e-5);
}

CheckResult spherical(bool corrupt) {
    double worst = 0.0;
    for (BSchedule sched : {BSchedule::constant, BSchedule::linear_ramp}) {
        for (double b : {0.0, 0.05, 0.1, 0.15, 0.2, 0.5, 0.9, 1.0}) {
            SamplerConfig config;
            config.a_rule = CoefficientRule::spherical;
            config.b_schedule = sched;
            config.b = b;
            for (int i = 0; i < 200; ++i) {
                MomentumCoefficients co = momentum_coefficients(config, i, 200);
                if (corrupt) co = {1.0, 1.0};
                worst = std::max(worst, std::abs(co.a * co.a + co.b * co.b - 1.0));
            }
        }
    }
    CheckResult r = below("spherical_constraint", "a^2 + b^2 = 1 under the spherical rule", worst, 1e-12);
    if (corrupt) r.detail = "a-rule corrupted to a = b = 1";
    return r;
}

CheckResult increment_identity(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Rng rng(seed, 1);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double ap = 0.05 + 0.95 * unit(gen);
        const double at = ap * (0.05 + 0.9 * unit(gen));
        const StepGrid grid = StepGrid::single(at, ap);
        const Point x = 3.0 * rng.normal_vector(2);
        const Point e = rng.normal_vector(2);
        const Point z = rng.normal_vector(2);
        for (EtaMode m : kModes) {
            const Point lhs = ddim_step(x, e, z, grid, 1, m);
            const Point rhs = std::sqrt(ap) * (x / std::sqrt(at) + increment(e, z, grid, 1, m));
            worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
        }
    }
    return below("increment_step_identity", "generalized step equals sqrt(alpha_prev) (x_bar + dx_bar)", worst, 1e-10);
}

CheckResult eta_zero_purity() {
    const StepGrid grid = full_grid(linear_beta_schedule(200, 5e-4, 0.1));
    double worst = 0.0;
    for (SamplerKind kind : {SamplerKind::vanilla, SamplerKind::adaptive}) {
        SamplerConfig config;
        config.kind = kind;
        config.eta = EtaMode::deterministic;
        for (double start : {-1.5, 0.2, 2.0}) {
            Rng r1(1);
            Rng r2(2);
            const Point a = run_chain(toy(), grid, config, p1(start), r1).x0;
            const Point b = run_chain(toy(), grid, config, p1(start), r2).x0;
            worst = std::max(worst, std::abs(a[0] - b[0]));
        }
    }
    CheckResult r = below("eta_zero_purity", "deterministic sampler output is independent of the rng", worst, 0.0);
    r.passed = worst == 0.0;
    return r;
}

CheckResult telescoping() {
    const GaussianMixture gmm({1.0}, {p1(1.25)}, {p1(0.0)});
    const StepGrid grid = full_grid(linear_beta_schedule(1000, 1e-4, 0.02));
    SamplerConfig config;
    config.eta = EtaMode::deterministic;
    double worst = 0.0;
    for (double start : {-3.0, 0.0, 2.5}) {
        Rng rng(0);
        worst = std::max(worst, std::abs(run_chain(gmm, grid, config, p1(start), rng).x0[0] - 1.25));
    }
    return below("point_mass_telescoping", "eta = 0 chain on point-mass data lands on the mass", worst, 1e-10);
}

CheckResult positivity() {
    const StepGrid grid = full_grid(linear_beta_schedule(200, 5e-4, 0.1));
    double lowest = std::numeric_limits<double>::infinity();
    for (double c : {0.0, 0.001, 0.01, 0.1, 0.5, 0.999}) {
        for (VNorm norm : {VNorm::mean_sq, VNorm::raw_l2sq}) {
            SamplerConfig config;
            config.kind = SamplerKind::adaptive;
            config.c = c;
            config.v_norm = norm;
            Rng rng(static_cast<std::uint64_t>(c * 1000) + 1);
            ChainState st = init_chain(rng.normal_vector(1), grid);
            while (st.k >= 1) {
                st = adaptive_momentum_step(st, toy(), grid, config, rng);
                lowest = std::min(lowest, st.v);
            }
        }
    }
    CheckResult r;
    r.name = "v_positivity";
    r.invariant = "second-moment accumulator stays positive";
    r.observed = lowest;
    r.threshold = 0.0;
    r.passed = lowest > 0.0;
    return r;
}

CheckResult final_step() {
    const StepGrid grid = full_grid(linear_beta_schedule(200, 5e-4, 0.1));
    double worst = 0.0;
    for (EtaMode m : kModes) {
        SamplerConfig config;
        config.eta = m;
        const ChainState st{1, p1(0.9), p1(0.0), 1.0};
        Rng r1(3);
        Rng r2(4);
        worst = std::max(worst, std::abs(vanilla_step(st, toy(), grid, config, r1).x_bar[0] -
                                         vanilla_step(st, toy(), grid, config, r2).x_bar[0]));
    }
    CheckResult r = below("final_step_noiseless", "no noise enters the last reverse step", worst, 0.0);
    r.passed = worst == 0.0;
    return r;
}

void drift_checks(VerifyReport& report, std::uint64_t seed) {
    const NoiseSchedule s = linear_beta_schedule(1000, 1e-4, 0.02);
    Rng rng(seed, 2);
    report.drift_table = drift_consistency(s, toy(), 8, rng);
    double drift = 0.0;
    double closed = 0.0;
    double order = 0.0;
    double window = 0.0;
    int window_t = 0;
    for (const auto& row : report.drift_table) {
        drift = std::max(drift, row.drift_mismatch);
        closed = std::max(closed, std::abs(row.diffusion_ratio - row.closed_form_ratio));
        // 1 - sqrt(1 - u) <= u with u = beta_t / (1 - alpha_t).
        const double u = row.beta / (1.0 - row.alpha);
        order = std::max(order, std::abs(row.diffusion_ratio - 1.0) - u);
        if (row.beta < 0.02 && std::abs(row.diffusion_ratio - 1.0) > window) {
            window = std::abs(row.diffusion_ratio - 1.0);
            window_t = row.t;
        }
    }
    report.checks.push_back(below("drift_identity", "eta = 1 drift equals the reverse-SDE drift at every t", drift, 1e-10));
    report.checks.push_back(below("diffusion_closed_form",
                                  "noise-scale ratio equals sqrt(1 - beta_t / (1 - alpha_t)) at every t", closed, 1e-9));
    CheckResult o = below("diffusion_order_beta", "|ratio - 1| <= beta_t / (1 - alpha_t) at every t", order, 1e-12);
    o.passed = order <= 1e-12;
    report.checks.push_back(o);
    CheckResult w = below("diffusion_window", "|ratio - 1| < 0.02 wherever beta_t < 0.02", window, 0.02, false);
    w.detail = "worst at t = " + std::to_string(window_t) +
               "; the ratio is sqrt(1 - beta_t / (1 - alpha_t)), far from 1 while 1 - alpha_t is comparable to beta_t";
    report.checks.push_back(w);
}

void midpoint_checks(VerifyReport& report, std::uint64_t seed) {
    Rng rng(seed, 3);
    std::vector<double> noise(1000);
    for (double& v : noise) v = 0.01 * rng.normal();
    const ScalarDrift drift = [](double x, int step) { return 0.01 * x + 0.001 * std::sin(0.01 * step); };
    for (double lambda : {0.0, 0.5, 1.0, 2.0}) {
        const MidpointComparison cmp = midpoint_equivalence(lambda, 1000, drift, noise, 0.3);
        char name[64];
        std::snprintf(name, sizeof name, "midpoint_equivalence[lambda=%g]", lambda);
        report.checks.push_back(below(name, "momentum recursion with a=(2-l)/(2+l), b=-2/(2+l) equals the midpoint recursion",
                                      cmp.max_deviation, 1e-12));
    }
    CheckResult r;
    r.name = "friction_singular";
    r.invariant = "lambda = -2 is rejected";
    try {
        (void)FrictionMapping::from_lambda(-2.0);
        r.passed = false;
    } catch (const std::domain_error&) {
        r.passed = true;
    }
    report.checks.push_back(r);
}

}  // namespace

bool VerifyReport::passed() const {
    for (const auto& c : checks) {
        if (c.gating && !c.passed) return false;
    }
    return true;
}

nlohmann::ordered_json VerifyReport::to_json() const {
    nlohmann::ordered_json j;
    j["version"] = AMSAMPLER_VERSION;
    j["passed"] = passed();
    j["corrupt_a_rule"] = corrupt_a_rule;
    nlohmann::ordered_json cs = nlohmann::ordered_json::array();
    std::vector<std::string> failed;
    for (const auto& c : checks) {
        nlohmann::ordered_json e;
        e["name"] = c.name;
        e["invariant"] = c.invariant;
        e["passed"] = c.passed;
        e["gating"] = c.gating;
        e["observed"] = c.observed;
        e["threshold"] = c.threshold;
        if (!c.detail.empty()) e["detail"] = c.detail;
        cs.push_back(e);
        if (c.gating && !c.passed) failed.push_back(c.name);
    }
    j["failed"] = failed;
    j["checks"] = cs;
    nlohmann::ordered_json table = nlohmann::ordered_json::array();
    for (const auto& row : drift_table) {
        nlohmann::ordered_json e;
        e["t"] = row.t;
        e["beta"] = row.beta;
        e["alpha"] = row.alpha;
        e["drift_mismatch"] = row.drift_mismatch;
        e["ddpm_noise_scale"] = row.ddpm_noise_scale;
        e["sde_noise_scale"] = row.sde_noise_scale;
        e["diffusion_ratio"] = row.diffusion_ratio;
        e["closed_form_ratio"] = row.closed_form_ratio;
        table.push_back(e);
    }
    j["drift_table"] = table;
    return j;
}

VerifyReport run_verify(const VerifyOptions& options) {
    VerifyReport report;
    report.corrupt_a_rule = options.corrupt_a_rule;
    report.checks.push_back(degeneracy());
    report.checks.push_back(score_consistency(options.seed));
    report.checks.push_back(spherical(options.corrupt_a_rule));
    report.checks.push_back(increment_identity(options.seed));
    report.checks.push_back(eta_zero_purity());
    report.checks.push_back(telescoping());
    report.checks.push_back(positivity());
    report.checks.push_back(final_step());
    drift_checks(report, options.seed);
    midpoint_checks(report, options.seed);
    return report;
}

}  // namespace amsampler::experiment
