#include "amsampler/sde_checks.hpp"

#include "amsampler/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amsampler {

XbarScore xbar_score(const GaussianMixture& model, double alpha) {
    const double root_alpha = std::sqrt(alpha);
    return [&model, alpha, root_alpha](const Point& x_bar) -> Point {
        return root_alpha * model.score(root_alpha * x_bar, alpha);
    };
}

Point reverse_sde_euler_step(const XbarScore& score, const Point& x_bar, double alpha_t, double alpha_prev,
                             const Point& eps_noise) {
    if (!(alpha_t < alpha_prev) || !(alpha_t > 0.0)) {
        throw std::invalid_argument("reverse SDE step needs 0 < alpha_t < alpha_prev");
    }
    const double beta = 1.0 - alpha_t / alpha_prev;
    return x_bar + (beta / alpha_t) * score(x_bar) + std::sqrt(beta / alpha_t) * eps_noise;
}

std::vector<DriftConsistencyRow> drift_consistency(const NoiseSchedule& schedule, const GaussianMixture& model,
                                                   int n_points, Rng& rng) {
    if (n_points < 1) {
        throw std::invalid_argument("drift_consistency needs at least one probe point");
    }
    std::vector<DriftConsistencyRow> rows;
    rows.reserve(static_cast<std::size_t>(schedule.steps()));
    for (int t = 1; t <= schedule.steps(); ++t) {
        const double alpha_t = schedule.alpha(t);
        const double alpha_prev = schedule.alpha(t - 1);
        const double beta = 1.0 - alpha_t / alpha_prev;
        const ReverseCoefficients co =
            reverse_coefficients(alpha_t, alpha_prev, sigma_from_alphas(alpha_t, alpha_prev, EtaMode::ddpm_unit));
        const XbarScore score = xbar_score(model, alpha_t);

        double worst = 0.0;
        for (int i = 0; i < n_points; ++i) {
            const Point x0 = model.sample(rng);
            const Point x = std::sqrt(alpha_t) * x0 + std::sqrt(1.0 - alpha_t) * rng.normal_vector(model.dim());
            const Point ddpm_drift = co.mu * model.predict(x, alpha_t).eps_hat;
            const Point sde_drift = (beta / alpha_t) * score(x / std::sqrt(alpha_t));
            const double scale = std::max({ddpm_drift.norm(), sde_drift.norm(), std::abs(co.mu)});
            worst = std::max(worst, (ddpm_drift - sde_drift).norm() / scale);
        }

        DriftConsistencyRow row{};
        row.t = t;
        row.beta = beta;
        row.alpha = alpha_t;
        row.drift_mismatch = worst;
        row.ddpm_noise_scale = co.noise_scale;
        row.sde_noise_scale = std::sqrt(beta / alpha_t);
        row.diffusion_ratio = row.ddpm_noise_scale / row.sde_noise_scale;
        row.closed_form_ratio = std::sqrt(std::max(0.0, 1.0 - beta / (1.0 - alpha_t)));
        rows.push_back(row);
    }
    return rows;
}

FrictionMapping FrictionMapping::from_lambda(double lambda) {
    if (lambda == -2.0) {
        throw std::domain_error("friction lambda = -2 has no momentum mapping");
    }
    return {lambda, (2.0 - lambda) / (2.0 + lambda), -2.0 / (2.0 + lambda)};
}

MidpointComparison midpoint_equivalence(double lambda, int n_steps, const ScalarDrift& drift,
                                        std::span<const double> noise_seq, double x_start) {
    if (n_steps < 0 || noise_seq.size() < static_cast<std::size_t>(n_steps)) {
        throw std::invalid_argument("midpoint_equivalence needs one noise value per step");
    }
    const FrictionMapping map = FrictionMapping::from_lambda(lambda);

    MidpointComparison out{0.0, {}, {}};
    out.momentum_path.reserve(static_cast<std::size_t>(n_steps));
    out.midpoint_path.reserve(static_cast<std::size_t>(n_steps));

    // Momentum form: m <- a m + b g, x <- x + m.
    double x = x_start;
    double m = 0.0;
    for (int s = 0; s < n_steps; ++s) {
        const double g = drift(x, s) + noise_seq[static_cast<std::size_t>(s)];
        m = map.a * m + map.b * g;
        x += m;
        out.momentum_path.push_back(x);
    }

    // Midpoint form: the half-step velocity eta solves
    //   eta_old - eta_new = lambda (eta_old + eta_new) / 2 - g,
    // and the state moves by x_{t-1} = x_t - eta_new. Solved as a Newton step
    // on the residual, which is linear in eta_new.
    double y = x_start;
    double eta = 0.0;
    for (int s = 0; s < n_steps; ++s) {
        const double g = drift(y, s) + noise_seq[static_cast<std::size_t>(s)];
        const double residual = -lambda * eta + g;  // residual evaluated at eta_new = eta_old
        eta += residual / (1.0 + 0.5 * lambda);
        y -= eta;
        out.midpoint_path.push_back(y);
    }

    for (std::size_t i = 0; i < out.momentum_path.size(); ++i) {
        out.max_deviation = std::max(out.max_deviation, std::abs(out.momentum_path[i] - out.midpoint_path[i]));
    }
    return out;
}

}  // namespace amsampler
