#pragma once

#include "amsampler/rng.hpp"
#include "amsampler/schedule.hpp"

#include <Eigen/Core>

#include <vector>

namespace amsampler {

using Point = Eigen::VectorXd;

/// Output of a noise predictor at one (x_t, alpha_t).
///
/// x0_hat = (x_t - sqrt(1 - alpha_t) * eps_hat) / sqrt(alpha_t) by construction.
struct NoisePrediction {
    Point eps_hat;
    Point x0_hat;
};

/// Mixture of axis-aligned Gaussians in R^D. Zero variances are allowed and
/// give point masses, so the two-point toy set is a two-component mixture
/// with zero variance.
class GaussianMixture {
public:
    GaussianMixture(std::vector<double> weights, std::vector<Point> means, std::vector<Point> variances);

    /// Isotropic convenience form: one scalar variance per component.
    static GaussianMixture isotropic(std::vector<double> weights, std::vector<Point> means,
                                     std::vector<double> variances);

    /// Equal-weight point masses at the given scalars (D = 1).
    static GaussianMixture points_1d(const std::vector<double>& locations);

    Eigen::Index dim() const { return dim_; }
    std::size_t size() const { return weights_.size(); }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<Point>& means() const { return means_; }
    const std::vector<Point>& variances() const { return variances_; }
    bool has_point_mass() const;

    /// Exact draw from the clean data distribution.
    Point sample(Rng& rng) const;

    /// Bayes-optimal noise prediction for x observed at cumulative alpha.
    /// Throws std::domain_error when alpha is not in (0, 1).
    NoisePrediction predict(const Point& x, double alpha) const;

    /// Closed-form gradient of log p_alpha(x) with respect to x.
    Point score(const Point& x, double alpha) const;

    /// Log density of the noised marginal. alpha = 1 is the clean density and
    /// throws std::domain_error if any component is a point mass.
    double log_density(const Point& x, double alpha) const;

    /// CDF of the noised marginal along one coordinate (D = 1 callers).
    double cdf_1d(double x, double alpha) const;

private:
    // Per-component log-responsibility numerators, filled into `out`.
    void log_joint(const Point& x, double alpha, std::vector<double>& out) const;
    void check_point(const Point& x) const;

    std::vector<double> weights_;
    std::vector<Point> means_;
    std::vector<Point> variances_;
    Eigen::Index dim_;
};

/// x_t = sqrt(alpha_t) x0 + sqrt(1 - alpha_t) eps.
Point forward_sample(const Point& x0, int t, const Point& eps, const NoiseSchedule& schedule);

NoisePrediction analytic_eps(const GaussianMixture& gmm, const Point& x, int t, const NoiseSchedule& schedule);

/// t = 0 means the clean data density.
double log_density_t(const GaussianMixture& gmm, const Point& x, int t, const NoiseSchedule& schedule);

}  // namespace amsampler
