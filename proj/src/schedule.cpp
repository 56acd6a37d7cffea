#include "amsampler/schedule.hpp"

#include "amsampler/format.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace amsampler {

NoiseSchedule::NoiseSchedule(std::vector<double> betas, double alpha_zero)
    : betas_(std::move(betas)), alpha_zero_(alpha_zero) {
    if (betas_.empty()) {
        throw std::invalid_argument("noise schedule needs at least one timestep");
    }
    alphas_.reserve(betas_.size());
    double running = 1.0;
    for (std::size_t i = 0; i < betas_.size(); ++i) {
        const double beta = betas_[i];
        if (!(beta > 0.0 && beta < 1.0)) {
            throw std::invalid_argument("beta at t=" + std::to_string(i + 1) + " must lie in (0, 1), got " +
                                        format_double(beta));
        }
        running *= 1.0 - beta;
        if (!alphas_.empty() && !(running < alphas_.back())) {
            throw std::invalid_argument("cumulative alpha stopped decreasing at t=" + std::to_string(i + 1));
        }
        alphas_.push_back(running);
    }
    if (!(alpha_zero_ > alphas_.front() && alpha_zero_ <= 1.0)) {
        throw std::invalid_argument("alpha_zero must lie in (alpha(1), 1], got " + format_double(alpha_zero_));
    }
}

double NoiseSchedule::beta(int t) const {
    if (t < 1 || t > steps()) {
        throw std::out_of_range("timestep " + std::to_string(t) + " outside [1, " + std::to_string(steps()) + "]");
    }
    return betas_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha(int t) const {
    if (t == 0) {
        return alpha_zero_;
    }
    if (t < 0 || t > steps()) {
        throw std::out_of_range("timestep " + std::to_string(t) + " outside [0, " + std::to_string(steps()) + "]");
    }
    return alphas_[static_cast<std::size_t>(t - 1)];
}

void NoiseSchedule::write_csv(std::ostream& out) const {
    out << "t,beta,alpha_cum\n";
    for (int t = 1; t <= steps(); ++t) {
        out << t << ',' << format_double(beta(t)) << ',' << format_double(alpha(t)) << '\n';
    }
}

NoiseSchedule linear_beta_schedule(int steps, double beta_start, double beta_end, double alpha_zero) {
    if (steps < 1) {
        throw std::invalid_argument("timestep count must be positive");
    }
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
        throw std::invalid_argument("linear schedule needs 0 < beta_start <= beta_end < 1");
    }
    std::vector<double> betas(static_cast<std::size_t>(steps));
    if (steps == 1) {
        betas[0] = beta_start;
    } else {
        const double span = beta_end - beta_start;
        for (int i = 0; i < steps; ++i) {
            betas[static_cast<std::size_t>(i)] = beta_start + span * static_cast<double>(i) / (steps - 1);
        }
        betas.back() = beta_end;
    }
    return NoiseSchedule(std::move(betas), alpha_zero);
}

RespaceMode parse_respace_mode(std::string_view name) {
    if (name == "uniform") return RespaceMode::uniform;
    if (name == "quadratic") return RespaceMode::quadratic;
    throw std::invalid_argument("unknown respacing mode '" + std::string(name) + "'");
}

std::string_view to_string(RespaceMode mode) {
    return mode == RespaceMode::uniform ? "uniform" : "quadratic";
}

StepGrid::StepGrid(std::vector<int> timesteps, std::vector<double> alphas)
    : timesteps_(std::move(timesteps)), alphas_(std::move(alphas)) {
    if (alphas_.size() < 2 || timesteps_.size() != alphas_.size()) {
        throw std::invalid_argument("step grid needs matching timesteps/alphas with at least one step");
    }
    for (std::size_t k = 1; k < alphas_.size(); ++k) {
        if (!(alphas_[k] < alphas_[k - 1])) {
            throw std::invalid_argument("step grid alphas must strictly decrease toward the noised end");
        }
    }
}

StepGrid StepGrid::single(double alpha_hi, double alpha_lo) {
    return StepGrid({0, 1}, {alpha_lo, alpha_hi});
}

StepGrid full_grid(const NoiseSchedule& schedule) {
    std::vector<int> timesteps{0};
    std::vector<double> alphas{schedule.alpha_zero()};
    for (int t = 1; t <= schedule.steps(); ++t) {
        timesteps.push_back(t);
        alphas.push_back(schedule.alphas_cum()[static_cast<std::size_t>(t - 1)]);
    }
    return StepGrid(std::move(timesteps), std::move(alphas));
}

RespacedSchedule::RespacedSchedule(NoiseSchedule parent, std::vector<int> tau)
    : parent_(std::move(parent)), tau_(std::move(tau)) {
    if (tau_.empty() || tau_.back() != parent_.steps()) {
        throw std::invalid_argument("respaced timesteps must end at T");
    }
    for (std::size_t k = 0; k < tau_.size(); ++k) {
        if (tau_[k] < 1 || (k > 0 && tau_[k] <= tau_[k - 1])) {
            throw std::invalid_argument("respaced timesteps must be strictly increasing within [1, T]");
        }
        alphas_tau_.push_back(parent_.alpha(tau_[k]));
    }
}

StepGrid RespacedSchedule::grid() const {
    std::vector<int> timesteps{0};
    std::vector<double> alphas{parent_.alpha_zero()};
    timesteps.insert(timesteps.end(), tau_.begin(), tau_.end());
    alphas.insert(alphas.end(), alphas_tau_.begin(), alphas_tau_.end());
    return StepGrid(std::move(timesteps), std::move(alphas));
}

RespacedSchedule respace(const NoiseSchedule& schedule, int steps, RespaceMode mode) {
    const int total = schedule.steps();
    if (steps < 1 || steps > total) {
        throw std::invalid_argument("respacing needs 1 <= K <= T (K=" + std::to_string(steps) +
                                    ", T=" + std::to_string(total) + ")");
    }
    std::vector<int> tau(static_cast<std::size_t>(steps));
    for (int k = 1; k <= steps; ++k) {
        int t = 0;
        if (mode == RespaceMode::uniform) {
            t = static_cast<int>(static_cast<long long>(k) * total / steps);
        } else {
            const double frac = static_cast<double>(k) / steps;
            t = static_cast<int>(std::ceil(total * frac * frac - 1e-9));
        }
        tau[static_cast<std::size_t>(k - 1)] = t;
    }
    // Squared spacing can collide near t = 1; push apart while keeping tau[K] = T.
    tau.back() = total;
    for (std::size_t k = 0; k < tau.size(); ++k) {
        const int floor_value = k == 0 ? 1 : tau[k - 1] + 1;
        tau[k] = std::max(tau[k], floor_value);
    }
    for (std::size_t k = tau.size() - 1; k-- > 0;) {
        tau[k] = std::min(tau[k], tau[k + 1] - 1);
    }
    return RespacedSchedule(schedule, std::move(tau));
}

}  // namespace amsampler
