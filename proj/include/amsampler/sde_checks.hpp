#pragma once

#include "amsampler/model.hpp"
#include "amsampler/rng.hpp"
#include "amsampler/schedule.hpp"

#include <functional>
#include <span>
#include <vector>

namespace amsampler {

/// Score of the x-bar marginal, as a function of x-bar.
using XbarScore = std::function<Point(const Point& x_bar)>;

/// grad_{x_bar} log p(x_bar) = sqrt(alpha) * grad_x log p_alpha(sqrt(alpha) x_bar).
XbarScore xbar_score(const GaussianMixture& model, double alpha);

/// One Euler-Maruyama step of the reverse-time SDE in x-bar space:
/// x_bar + (beta/alpha_t) score + sqrt(beta/alpha_t) eps, with beta = 1 - alpha_t/alpha_prev.
Point reverse_sde_euler_step(const XbarScore& score, const Point& x_bar, double alpha_t, double alpha_prev,
                             const Point& eps_noise);

struct DriftConsistencyRow {
    int t;
    double beta;
    double alpha;
    double drift_mismatch;     // max over probe points, relative
    double ddpm_noise_scale;   // sigma_t / sqrt(alpha_{t-1}) at eta = 1
    double sde_noise_scale;    // sqrt(beta_t / alpha_t)
    double diffusion_ratio;    // ddpm / sde
    double closed_form_ratio;  // sqrt(1 - beta_t / (1 - alpha_t))
};

/// Compares the eta = 1 reverse step against the reverse-SDE step at every t,
/// with probe points drawn from the exact noised marginal.
std::vector<DriftConsistencyRow> drift_consistency(const NoiseSchedule& schedule, const GaussianMixture& model,
                                                   int n_points, Rng& rng);

/// Damping/velocity pair from a friction term:
/// a = (2 - lambda) / (2 + lambda), b = -2 / (2 + lambda).
struct FrictionMapping {
    double lambda;
    double a;
    double b;

    /// Throws std::domain_error at lambda = -2.
    static FrictionMapping from_lambda(double lambda);
};

/// Scalar drift term g(x_bar, step) standing in for mu * eps_theta.
using ScalarDrift = std::function<double(double x_bar, int step)>;

struct MidpointComparison {
    double max_deviation;
    std::vector<double> momentum_path;
    std::vector<double> midpoint_path;
};

/// Runs the momentum recursion (with the friction mapping) and the midpoint
/// discretization of the damped second-order equation side by side from the
/// same start, drift and noise sequence; reports the largest state gap.
MidpointComparison midpoint_equivalence(double lambda, int n_steps, const ScalarDrift& drift,
                                        std::span<const double> noise_seq, double x_start = 0.0);

}  // namespace amsampler
