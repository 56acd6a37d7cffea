// Acceptance suite: one PASS/FAIL line per criterion.
#include "amsampler/experiment/runner.hpp"
#include "amsampler/metrics.hpp"
#include "amsampler/samplers.hpp"
#include "amsampler/sde_checks.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace amsampler;
namespace fs = std::filesystem;

#ifndef AMLAB_PATH
#define AMLAB_PATH "amlab"
#endif
#ifndef SPEC_DIR
#define SPEC_DIR "specs"
#endif

namespace {

struct Outcome {
    bool passed;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out{false, ""};
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < limit_s;
    const bool ok = out.passed && in_time;
    if (!ok) ++failures;
    std::printf("%s %d %s | %s | %.2fs (limit %.0fs)%s\n", ok ? "PASS" : "FAIL", id, title, out.detail.c_str(), secs,
                limit_s, in_time ? "" : " over time");
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

Point p1(double v) { return Point::Constant(1, v); }

GaussianMixture two_point() { return GaussianMixture::points_1d({-2.0, 4.0}); }

NoiseSchedule toy_schedule() { return linear_beta_schedule(200, 5e-4, 0.1); }

SamplerConfig vanilla_ddpm() {
    SamplerConfig c;
    c.eta = EtaMode::ddpm_unit;
    c.record_trajectory = true;
    return c;
}

SamplerConfig toy_adaptive() {
    SamplerConfig c;
    c.kind = SamplerKind::adaptive;
    c.eta = EtaMode::ddpm_unit;
    c.b = 0.5;
    c.c = 0.001;
    c.record_trajectory = true;
    return c;
}

double mean_tv(const BatchResult& r) {
    double s = 0.0;
    for (const auto& t : r.trajectories) s += trajectory_total_variation(t);
    return s / static_cast<double>(r.trajectories.size());
}

const std::vector<double> kModes = {-2.0, 4.0};

Outcome degeneracy() {
    double worst = 0.0;
    int runs = 0;
    for (int T : {10, 50, 200}) {
        const StepGrid grid = full_grid(linear_beta_schedule(T, 0.1 / T, std::min(0.5, 20.0 / T)));
        for (int dim : {1, 2}) {
            const GaussianMixture gmm =
                dim == 1 ? two_point()
                         : GaussianMixture::isotropic({0.5, 0.5}, {Point::Constant(2, -2.0), Point::Constant(2, 4.0)},
                                                      {0.0, 0.0});
            for (EtaMode m : {EtaMode::deterministic, EtaMode::ddpm_unit, EtaMode::ddpm_hat}) {
                SamplerConfig v;
                v.eta = m;
                v.record_trajectory = true;
                SamplerConfig a = degenerate_adaptive(m);
                a.record_trajectory = true;
                const BatchResult rv = run_chains(gmm, grid, v, 100, 11);
                const BatchResult ra = run_chains(gmm, grid, a, 100, 11);
                for (std::size_t i = 0; i < rv.trajectories.size(); ++i) {
                    for (std::size_t s = 0; s < rv.trajectories[i].size(); ++s) {
                        worst = std::max(worst,
                                         (rv.trajectories[i].xs[s] - ra.trajectories[i].xs[s]).cwiseAbs().maxCoeff());
                    }
                }
                ++runs;
            }
        }
    }
    return {worst <= 1e-12, "max |adaptive - vanilla| = " + fmt(worst) + " over " + std::to_string(runs) +
                                " configurations x 100 chains (tol 1e-12)"};
}

Outcome score_oracle() {
    std::mt19937_64 gen(31337);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index dim = 1 + trial % 2;
        const int n = 1 + trial % 4;
        std::vector<double> w;
        std::vector<Point> mu;
        std::vector<Point> var;
        double total = 0.0;
        for (int k = 0; k < n; ++k) {
            w.push_back(0.1 + unit(gen));
            total += w.back();
            mu.push_back(Point::NullaryExpr(dim, [&] { return -5.0 + 10.0 * unit(gen); }));
            var.push_back(Point::NullaryExpr(dim, [&] { return unit(gen) < 0.25 ? 0.0 : 2.0 * unit(gen); }));
        }
        for (double& v : w) v /= total;
        const GaussianMixture gmm(w, mu, var);
        const NoiseSchedule s = linear_beta_schedule(1000, 1e-4, 0.02);
        const int t = 1 + static_cast<int>(unit(gen) * 999.0);
        const double alpha = s.alpha(t);
        Rng rng(77, static_cast<std::uint64_t>(trial));
        const Point x = forward_sample(gmm.sample(rng), t, rng.normal_vector(dim), s);
        const Point eps = analytic_eps(gmm, x, t, s).eps_hat;
        Point grad(dim);
        for (Eigen::Index d = 0; d < dim; ++d) {
            Point up = x;
            Point dn = x;
            up[d] += 1e-5;
            dn[d] -= 1e-5;
            grad[d] = (log_density_t(gmm, up, t, s) - log_density_t(gmm, dn, t, s)) / 2e-5;
        }
        const Point fd = -std::sqrt(1.0 - alpha) * grad;
        worst = std::max(worst, (eps - fd).norm() / std::max(fd.norm(), 1e-3));
    }
    return {worst < 1e-5, "max relative error " + fmt(worst) + " over 100 triples (tol 1e-5)"};
}

Outcome two_point_toy() {
    const GaussianMixture gmm = two_point();
    const StepGrid grid = full_grid(toy_schedule());
    const std::size_t n = 10000;
    std::ostringstream detail;
    bool ok = true;

    // (a) mode fractions for both samplers at the reference seed.
    const double band = 3.0 * std::sqrt(0.25 / static_cast<double>(n));
    int dev_wins = 0;
    int tv_wins = 0;
    double worst_frac = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const BatchResult v = run_chains(gmm, grid, vanilla_ddpm(), n, 1000 + seed);
        const BatchResult a = run_chains(gmm, grid, toy_adaptive(), n, 1000 + seed);
        const std::vector<double> xv = coordinate(v.samples);
        const std::vector<double> xa = coordinate(a.samples);
        if (seed == 0) {
            for (const auto* xs : {&xv, &xa}) {
                worst_frac = std::max(worst_frac, std::abs(mode_statistics(*xs, kModes)[0].fraction - 0.5));
            }
        }
        if (mean_mode_deviation(xa, kModes) <= mean_mode_deviation(xv, kModes)) ++dev_wins;
        if (mean_tv(a) < mean_tv(v)) ++tv_wins;
        if (seed == 0) {
            detail << "seed0 dev vanilla=" << fmt(mean_mode_deviation(xv, kModes))
                   << " adaptive=" << fmt(mean_mode_deviation(xa, kModes)) << ", tv vanilla=" << fmt(mean_tv(v))
                   << " adaptive=" << fmt(mean_tv(a)) << "; ";
        }
    }
    const bool a_ok = worst_frac <= band;
    const bool b_ok = dev_wins >= 8;
    const bool c_ok = tv_wins >= 8;
    ok = a_ok && b_ok && c_ok;
    detail << "(a) max |fraction - 0.5| = " << fmt(worst_frac) << " vs 3 sigma " << fmt(band) << (a_ok ? " ok" : " FAIL")
           << "; (b) adaptive deviation <= vanilla in " << dev_wins << "/10" << (b_ok ? " ok" : " FAIL")
           << "; (c) adaptive TV < vanilla in " << tv_wins << "/10" << (c_ok ? " ok" : " FAIL");
    return {ok, detail.str()};
}

Outcome gaussian() {
    const double mu = 1.0;
    const double sd = 0.5;
    const GaussianMixture gmm({1.0}, {p1(mu)}, {p1(sd * sd)});
    const StepGrid grid = full_grid(linear_beta_schedule(1000, 1e-4, 0.02));
    SamplerConfig c;
    c.eta = EtaMode::deterministic;
    const BatchResult r = run_chains(gmm, grid, c, 10000, 4);
    const double w1 = wasserstein1_1d(coordinate(r.samples), gmm);
    return {w1 < 0.02, "W1 to N(1, 0.25) = " + fmt(w1) + " at 10000 samples (tol 0.02)"};
}

Outcome appendix_b1() {
    const NoiseSchedule s = linear_beta_schedule(1000, 1e-4, 0.02);
    Rng rng(5);
    const auto rows = drift_consistency(s, two_point(), 16, rng);
    double drift = 0.0;
    double window = 0.0;
    int window_t = 0;
    int outside = 0;
    for (const auto& r : rows) {
        drift = std::max(drift, r.drift_mismatch);
        if (r.beta < 0.02) {
            const double dev = std::abs(r.diffusion_ratio - 1.0);
            if (dev >= 0.02) ++outside;
            if (dev > window) {
                window = dev;
                window_t = r.t;
            }
        }
    }
    const bool ok = drift < 1e-10 && window < 0.02;
    return {ok, "max drift mismatch " + fmt(drift) + " (tol 1e-10); max |ratio - 1| with beta < 0.02 = " + fmt(window) +
                    " at t=" + std::to_string(window_t) + ", " + std::to_string(outside) +
                    " timesteps outside the 2% window (tol 0.02)"};
}

Outcome appendix_b2() {
    Rng rng(6);
    std::vector<double> noise(1000);
    for (double& v : noise) v = 0.02 * rng.normal();
    const ScalarDrift drift = [](double x, int step) { return 0.02 * x + 0.005 * std::cos(0.03 * step); };
    double worst = 0.0;
    for (double lambda : {0.0, 0.5, 1.0, 2.0}) {
        worst = std::max(worst, midpoint_equivalence(lambda, 1000, drift, noise, 1.0).max_deviation);
    }
    return {worst < 1e-12, "max deviation over lambda in {0, 0.5, 1, 2}, 1000 steps = " + fmt(worst) + " (tol 1e-12)"};
}

Outcome table4() {
    const GaussianMixture gmm = two_point();
    const StepGrid grid = full_grid(toy_schedule());
    const std::vector<double> bs = {0.05, 0.1, 0.15, 0.2};
    std::vector<double> w(bs.size(), 0.0);
    std::ostringstream detail;
    for (std::size_t i = 0; i < bs.size(); ++i) {
        SamplerConfig c = toy_adaptive();
        c.record_trajectory = false;
        c.b = bs[i];
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const BatchResult r = run_chains(gmm, grid, c, 10000, 500 + seed);
            w[i] += wasserstein1_1d(coordinate(r.samples), gmm) / 3.0;
        }
        detail << "b=" << bs[i] << ":" << fmt(w[i]) << " ";
    }
    const std::size_t argmin = static_cast<std::size_t>(std::min_element(w.begin(), w.end()) - w.begin());
    const bool ok = argmin > 0 && argmin + 1 < w.size();
    detail << "argmin b=" << bs[argmin] << (ok ? " (interior)" : " (boundary)");
    return {ok, detail.str()};
}

Outcome respacing() {
    const GaussianMixture gmm = two_point();
    const NoiseSchedule s = toy_schedule();
    SamplerConfig c;
    c.eta = EtaMode::ddpm_unit;
    const BatchResult full = run_chains(gmm, full_grid(s), c, 2000, 9);
    const BatchResult same = run_chains(gmm, respace(s, 200, RespaceMode::uniform).grid(), c, 2000, 9);
    double diff = 0.0;
    for (std::size_t i = 0; i < full.samples.size(); ++i) {
        diff = std::max(diff, std::abs(full.samples[i][0] - same.samples[i][0]));
    }
    const bool identical = diff == 0.0;

    std::vector<double> w;
    std::ostringstream detail;
    detail << "K=T max diff " << fmt(diff) << "; ";
    for (int K : {25, 50, 200}) {
        const StepGrid grid = respace(s, K, RespaceMode::uniform).grid();
        double sum = 0.0;
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            sum += wasserstein1_1d(coordinate(run_chains(gmm, grid, c, 10000, 700 + seed).samples), gmm);
        }
        w.push_back(sum / 3.0);
        detail << "W1(K=" << K << ")=" << fmt(w.back()) << " ";
    }
    const bool monotone = w[0] >= w[1] && w[1] >= w[2];
    detail << (monotone ? "monotone" : "not monotone");
    return {identical && monotone, detail.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome reproducibility() {
    const fs::path root = fs::temp_directory_path() / "amsampler_acceptance_repro";
    fs::remove_all(root);
    const std::string spec = std::string(SPEC_DIR) + "/toy_two_point.spec";
    std::vector<std::string> texts;
    std::vector<std::string> labels;
    for (const auto& [label, threads] : std::vector<std::pair<std::string, int>>{{"t1a", 1}, {"t1b", 1}, {"t2", 2}, {"t8", 8}}) {
        const fs::path out = root / label;
        const std::string cmd = std::string(AMLAB_PATH) + " run " + spec + " --no-trajectories --threads " +
                                std::to_string(threads) + " --out-dir " + out.string() + " > /dev/null";
        if (std::system(cmd.c_str()) != 0) {
            return {false, "amlab run failed: " + cmd};
        }
        texts.push_back(slurp(out / "vanilla" / "samples.csv") + slurp(out / "adaptive" / "samples.csv"));
        labels.push_back(label);
    }
    bool same = !texts.front().empty();
    for (const auto& t : texts) same = same && t == texts.front();
    return {same, std::string(same ? "identical" : "different") + " samples.csv bytes across 2 repeats at 1 thread and runs at 2, 8 threads (" +
                      std::to_string(texts.front().size()) + " bytes per run)"};
}

}  // namespace

int main() {
    criterion(1, "degeneracy equivalence", 5, degeneracy);
    criterion(2, "score-oracle correctness", 5, score_oracle);
    criterion(3, "two-point toy reproduction", 120, two_point_toy);
    criterion(4, "exact-Gaussian convergence", 60, gaussian);
    criterion(5, "reverse-SDE consistency", 30, appendix_b1);
    criterion(6, "midpoint equivalence", 5, appendix_b2);
    criterion(7, "b-sweep interior minimum", 300, table4);
    criterion(8, "respacing sanity", 120, respacing);
    criterion(9, "reproducibility", 60, reproducibility);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
