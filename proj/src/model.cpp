#include "amsampler/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace amsampler {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_alpha_open(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error("noise prediction needs 0 < alpha < 1, got alpha=" + std::to_string(alpha));
    }
}

}  // namespace

GaussianMixture::GaussianMixture(std::vector<double> weights, std::vector<Point> means, std::vector<Point> variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
    if (weights_.empty()) {
        throw std::invalid_argument("mixture needs at least one component");
    }
    if (means_.size() != weights_.size() || variances_.size() != weights_.size()) {
        throw std::invalid_argument("mixture weights, means and variances must have equal length");
    }
    dim_ = means_.front().size();
    if (dim_ < 1) {
        throw std::invalid_argument("mixture dimension must be positive");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        if (!(weights_[k] >= 0.0)) {
            throw std::invalid_argument("mixture weight " + std::to_string(k) + " is negative");
        }
        if (means_[k].size() != dim_ || variances_[k].size() != dim_) {
            throw std::invalid_argument("mixture component " + std::to_string(k) + " has mismatched dimension");
        }
        if (!(variances_[k].array() >= 0.0).all()) {
            throw std::invalid_argument("mixture component " + std::to_string(k) + " has a negative variance");
        }
        total += weights_[k];
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("mixture weights must sum to 1 (got " + std::to_string(total) + ")");
    }
}

GaussianMixture GaussianMixture::isotropic(std::vector<double> weights, std::vector<Point> means,
                                           std::vector<double> variances) {
    if (variances.size() != means.size()) {
        throw std::invalid_argument("mixture means and variances must have equal length");
    }
    std::vector<Point> diag;
    diag.reserve(variances.size());
    for (std::size_t k = 0; k < variances.size(); ++k) {
        diag.push_back(Point::Constant(means[k].size(), variances[k]));
    }
    return GaussianMixture(std::move(weights), std::move(means), std::move(diag));
}

GaussianMixture GaussianMixture::points_1d(const std::vector<double>& locations) {
    if (locations.empty()) {
        throw std::invalid_argument("point set must not be empty");
    }
    const double w = 1.0 / static_cast<double>(locations.size());
    std::vector<double> weights(locations.size(), w);
    std::vector<Point> means;
    std::vector<Point> vars;
    for (double loc : locations) {
        means.push_back(Point::Constant(1, loc));
        vars.push_back(Point::Zero(1));
    }
    return GaussianMixture(std::move(weights), std::move(means), std::move(vars));
}

bool GaussianMixture::has_point_mass() const {
    return std::any_of(variances_.begin(), variances_.end(),
                       [](const Point& v) { return (v.array() == 0.0).any(); });
}

Point GaussianMixture::sample(Rng& rng) const {
    const double u = rng.uniform();
    std::size_t k = 0;
    double acc = weights_[0];
    while (u >= acc && k + 1 < weights_.size()) {
        acc += weights_[++k];
    }
    Point out = means_[k];
    for (Eigen::Index d = 0; d < dim_; ++d) {
        out[d] += std::sqrt(variances_[k][d]) * rng.normal();
    }
    return out;
}

void GaussianMixture::check_point(const Point& x) const {
    if (x.size() != dim_) {
        throw std::invalid_argument("point has dimension " + std::to_string(x.size()) + ", mixture has " +
                                    std::to_string(dim_));
    }
}

void GaussianMixture::log_joint(const Point& x, double alpha, std::vector<double>& out) const {
    const double root_alpha = std::sqrt(alpha);
    const double log_two_pi = std::log(2.0 * std::numbers::pi);
    out.assign(weights_.size(), kNegInf);
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        if (weights_[k] == 0.0) {
            continue;
        }
        double acc = std::log(weights_[k]);
        for (Eigen::Index d = 0; d < dim_; ++d) {
            const double var = alpha * variances_[k][d] + (1.0 - alpha);
            const double diff = x[d] - root_alpha * means_[k][d];
            acc -= 0.5 * (log_two_pi + std::log(var) + diff * diff / var);
        }
        out[k] = acc;
    }
}

namespace {

// Normalizes log weights in place into probabilities; returns log-sum-exp.
double softmax_inplace(std::vector<double>& logits) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - peak);
        sum += v;
    }
    for (double& v : logits) {
        v /= sum;
    }
    return peak + std::log(sum);
}

}  // namespace

NoisePrediction GaussianMixture::predict(const Point& x, double alpha) const {
    check_point(x);
    check_alpha_open(alpha);
    std::vector<double> resp;
    log_joint(x, alpha, resp);
    softmax_inplace(resp);

    const double root_alpha = std::sqrt(alpha);
    Point x0_hat = Point::Zero(dim_);
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        if (resp[k] == 0.0) {
            continue;
        }
        const auto var = (alpha * variances_[k].array() + (1.0 - alpha)).eval();
        const auto gain = (root_alpha * variances_[k].array() / var).eval();
        const Point posterior = means_[k].array() + gain * (x.array() - root_alpha * means_[k].array());
        x0_hat += resp[k] * posterior;
    }
    Point eps_hat = (x - root_alpha * x0_hat) / std::sqrt(1.0 - alpha);
    return {std::move(eps_hat), std::move(x0_hat)};
}

Point GaussianMixture::score(const Point& x, double alpha) const {
    check_point(x);
    check_alpha_open(alpha);
    std::vector<double> resp;
    log_joint(x, alpha, resp);
    softmax_inplace(resp);

    const double root_alpha = std::sqrt(alpha);
    Point grad = Point::Zero(dim_);
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        if (resp[k] == 0.0) {
            continue;
        }
        const auto var = (alpha * variances_[k].array() + (1.0 - alpha)).eval();
        grad.array() -= resp[k] * (x.array() - root_alpha * means_[k].array()) / var;
    }
    return grad;
}

double GaussianMixture::log_density(const Point& x, double alpha) const {
    check_point(x);
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw std::domain_error("log density needs 0 < alpha <= 1");
    }
    if (alpha == 1.0 && has_point_mass()) {
        throw std::domain_error("clean density is undefined for a point-mass component");
    }
    std::vector<double> logits;
    log_joint(x, alpha, logits);
    return softmax_inplace(logits);
}

double GaussianMixture::cdf_1d(double x, double alpha) const {
    const double root_alpha = std::sqrt(alpha);
    double total = 0.0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        const double var = alpha * variances_[k][0] + (1.0 - alpha);
        const double centre = root_alpha * means_[k][0];
        if (var == 0.0) {
            total += weights_[k] * (x >= centre ? 1.0 : 0.0);
        } else {
            total += weights_[k] * 0.5 * std::erfc(-(x - centre) / std::sqrt(2.0 * var));
        }
    }
    return total;
}

Point forward_sample(const Point& x0, int t, const Point& eps, const NoiseSchedule& schedule) {
    if (t < 1 || t > schedule.steps()) {
        throw std::out_of_range("forward_sample timestep " + std::to_string(t) + " out of range");
    }
    if (x0.size() != eps.size()) {
        throw std::invalid_argument("forward_sample: x0 and eps dimensions differ");
    }
    const double alpha = schedule.alpha(t);
    return std::sqrt(alpha) * x0 + std::sqrt(1.0 - alpha) * eps;
}

NoisePrediction analytic_eps(const GaussianMixture& gmm, const Point& x, int t, const NoiseSchedule& schedule) {
    if (t < 1 || t > schedule.steps()) {
        throw std::out_of_range("analytic_eps timestep " + std::to_string(t) + " out of range");
    }
    return gmm.predict(x, schedule.alpha(t));
}

double log_density_t(const GaussianMixture& gmm, const Point& x, int t, const NoiseSchedule& schedule) {
    if (t < 0 || t > schedule.steps()) {
        throw std::out_of_range("log_density_t timestep " + std::to_string(t) + " out of range");
    }
    return gmm.log_density(x, t == 0 ? 1.0 : schedule.alpha(t));
}

}  // namespace amsampler
