#include "amsampler/samplers.hpp"

#include "amsampler/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace amsampler {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view name, const std::pair<std::string_view, Enum> (&table)[N], const char* what) {
    for (const auto& [key, value] : table) {
        if (key == name) {
            return value;
        }
    }
    throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(name) + "'");
}

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum value, const std::pair<std::string_view, Enum> (&table)[N]) {
    for (const auto& [key, v] : table) {
        if (v == value) {
            return key;
        }
    }
    return "?";
}

constexpr std::pair<std::string_view, EtaMode> kEtaNames[] = {
    {"deterministic", EtaMode::deterministic}, {"ddpm_unit", EtaMode::ddpm_unit}, {"ddpm_hat", EtaMode::ddpm_hat}};
constexpr std::pair<std::string_view, SamplerKind> kKindNames[] = {{"vanilla", SamplerKind::vanilla},
                                                                   {"adaptive", SamplerKind::adaptive}};
constexpr std::pair<std::string_view, CoefficientRule> kRuleNames[] = {{"spherical", CoefficientRule::spherical},
                                                                       {"affine", CoefficientRule::affine}};
constexpr std::pair<std::string_view, BSchedule> kBScheduleNames[] = {{"constant", BSchedule::constant},
                                                                      {"linear_ramp", BSchedule::linear_ramp}};
constexpr std::pair<std::string_view, VNorm> kVNormNames[] = {{"raw_l2sq", VNorm::raw_l2sq},
                                                              {"mean_sq", VNorm::mean_sq}};

}  // namespace

EtaMode parse_eta_mode(std::string_view name) { return parse_enum(name, kEtaNames, "eta mode"); }
SamplerKind parse_sampler_kind(std::string_view name) { return parse_enum(name, kKindNames, "sampler kind"); }
CoefficientRule parse_coefficient_rule(std::string_view name) { return parse_enum(name, kRuleNames, "a rule"); }
BSchedule parse_b_schedule(std::string_view name) { return parse_enum(name, kBScheduleNames, "b schedule"); }
VNorm parse_v_norm(std::string_view name) { return parse_enum(name, kVNormNames, "v normalization"); }
std::string_view to_string(EtaMode mode) { return enum_name(mode, kEtaNames); }
std::string_view to_string(SamplerKind kind) { return enum_name(kind, kKindNames); }
std::string_view to_string(CoefficientRule rule) { return enum_name(rule, kRuleNames); }
std::string_view to_string(BSchedule schedule) { return enum_name(schedule, kBScheduleNames); }
std::string_view to_string(VNorm norm) { return enum_name(norm, kVNormNames); }

void SamplerConfig::validate() const {
    if (!(b >= 0.0 && b <= 1.0)) {
        throw std::invalid_argument("sampler.b must lie in [0, 1]");
    }
    if (!(c >= 0.0 && c <= 1.0)) {
        throw std::invalid_argument("sampler.c must lie in [0, 1]");
    }
    // zeta = 0 is admitted so the adaptive update can reduce exactly to vanilla.
    if (!(zeta >= 0.0) || !std::isfinite(zeta)) {
        throw std::invalid_argument("sampler.zeta must be finite and non-negative");
    }
}

SamplerConfig degenerate_adaptive(EtaMode eta) {
    SamplerConfig config;
    config.kind = SamplerKind::adaptive;
    config.eta = eta;
    config.b = 1.0;
    config.a_rule = CoefficientRule::spherical;
    config.c = 0.0;
    config.zeta = 0.0;
    return config;
}

double damping_for(CoefficientRule rule, double b) {
    return rule == CoefficientRule::spherical ? std::sqrt(1.0 - b * b) : 1.0 - b;
}

MomentumCoefficients momentum_coefficients(const SamplerConfig& config, int step_index, int total_steps) {
    double b = config.b;
    if (config.b_schedule == BSchedule::linear_ramp) {
        b = config.b * static_cast<double>(step_index + 1) / static_cast<double>(total_steps);
    }
    return {damping_for(config.a_rule, b), b};
}

double sigma_from_alphas(double alpha_t, double alpha_prev, EtaMode mode) {
    if (!(alpha_t < alpha_prev) || !(alpha_t > 0.0) || !(alpha_prev <= 1.0)) {
        throw std::invalid_argument("sigma needs 0 < alpha_t < alpha_prev <= 1");
    }
    const double jump = std::sqrt(1.0 - alpha_t / alpha_prev);
    switch (mode) {
        case EtaMode::deterministic:
            return 0.0;
        case EtaMode::ddpm_unit:
            return std::sqrt((1.0 - alpha_prev) / (1.0 - alpha_t)) * jump;
        case EtaMode::ddpm_hat:
            // eta_hat cancels the variance-ratio factor exactly.
            return jump;
    }
    return 0.0;
}

double sigma(const NoiseSchedule& schedule, int t_hi, int t_lo, EtaMode mode) {
    return sigma_from_alphas(schedule.alpha(t_hi), schedule.alpha(t_lo), mode);
}

ReverseCoefficients reverse_coefficients(double alpha_t, double alpha_prev, double sigma) {
    double residual = 1.0 - alpha_prev - sigma * sigma;
    if (residual < 0.0) {
        // Rounding slack when sigma sits exactly on the admissible boundary.
        if (residual > -1e-15) {
            residual = 0.0;
        } else {
            throw std::domain_error("invalid eta/sigma combination: 1 - alpha_prev - sigma^2 = " +
                                    std::to_string(residual) + " < 0");
        }
    }
    ReverseCoefficients out{};
    out.alpha_t = alpha_t;
    out.alpha_prev = alpha_prev;
    out.sigma = sigma;
    out.direction = std::sqrt(residual);
    out.mu = std::sqrt(residual / alpha_prev) - std::sqrt((1.0 - alpha_t) / alpha_t);
    out.noise_scale = sigma / std::sqrt(alpha_prev);
    return out;
}

ReverseCoefficients step_coefficients(const StepGrid& grid, int k, EtaMode mode) {
    if (k < 1 || k > grid.steps()) {
        throw std::out_of_range("reverse step index " + std::to_string(k) + " out of range");
    }
    const double alpha_t = grid.alpha(k);
    const double alpha_prev = grid.alpha(k - 1);
    double s = sigma_from_alphas(alpha_t, alpha_prev, mode);
    if (mode == EtaMode::ddpm_hat) {
        s = std::min(s, std::sqrt(1.0 - alpha_prev));
    }
    return reverse_coefficients(alpha_t, alpha_prev, s);
}

Point ddim_step(const Point& x_t, const Point& eps_hat, const Point& eps_noise, const StepGrid& grid, int k,
                EtaMode mode) {
    const ReverseCoefficients co = step_coefficients(grid, k, mode);
    const Point x0_hat = (x_t - std::sqrt(1.0 - co.alpha_t) * eps_hat) / std::sqrt(co.alpha_t);
    return std::sqrt(co.alpha_prev) * x0_hat + co.direction * eps_hat + co.sigma * eps_noise;
}

Point increment(const Point& eps_hat, const Point& eps_noise, const StepGrid& grid, int k, EtaMode mode) {
    const ReverseCoefficients co = step_coefficients(grid, k, mode);
    return co.mu * eps_hat + co.noise_scale * eps_noise;
}

ChainState init_chain(const Point& x_T, const StepGrid& grid) {
    const int top = grid.steps();
    return {top, x_T / std::sqrt(grid.alpha(top)), Point::Zero(x_T.size()), 1.0};
}

namespace {

// The final step injects no noise, and no draw is consumed for it.
Point step_noise(const ChainState& state, Rng& rng) {
    if (state.k > 1) {
        return rng.normal_vector(state.x_bar.size());
    }
    return Point::Zero(state.x_bar.size());
}

void check_steppable(const ChainState& state, const StepGrid& grid) {
    if (state.k < 1 || state.k > grid.steps()) {
        throw std::out_of_range("chain at k=" + std::to_string(state.k) + " cannot take a reverse step");
    }
}

}  // namespace

ChainState vanilla_step(const ChainState& state, const GaussianMixture& model, const StepGrid& grid,
                        const SamplerConfig& config, Rng& rng, StepRecord* record) {
    check_steppable(state, grid);
    const Point x_t = state.x(grid);
    const NoisePrediction pred = model.predict(x_t, grid.alpha(state.k));
    const Point noise = step_noise(state, rng);
    Point dx = increment(pred.eps_hat, noise, grid, state.k, config.eta);

    ChainState next{state.k - 1, state.x_bar + dx, state.m, state.v};
    if (record != nullptr) {
        record->x = next.x(grid);
        record->x0_hat = pred.x0_hat;
        record->increment = std::move(dx);
    }
    return next;
}

ChainState adaptive_momentum_step(const ChainState& state, const GaussianMixture& model, const StepGrid& grid,
                                  const SamplerConfig& config, Rng& rng, StepRecord* record) {
    check_steppable(state, grid);
    const Point x_t = state.x(grid);
    const NoisePrediction pred = model.predict(x_t, grid.alpha(state.k));
    const Point noise = step_noise(state, rng);
    Point dx = increment(pred.eps_hat, noise, grid, state.k, config.eta);

    double energy = dx.squaredNorm();
    if (config.v_norm == VNorm::mean_sq) {
        energy /= static_cast<double>(dx.size());
    }
    const auto [a, b] = momentum_coefficients(config, grid.steps() - state.k, grid.steps());
    const double v = (1.0 - config.c) * state.v + config.c * energy;
    if (!(v > 0.0)) {
        throw std::runtime_error("second-moment accumulator left (0, inf) at k=" + std::to_string(state.k));
    }
    Point m = a * state.m + b * dx;
    Point x_bar = state.x_bar + m / (std::sqrt(v) + config.zeta);

    ChainState next{state.k - 1, std::move(x_bar), std::move(m), v};
    if (record != nullptr) {
        record->x = next.x(grid);
        record->x0_hat = pred.x0_hat;
        record->increment = std::move(dx);
    }
    return next;
}

ChainResult run_chain(const GaussianMixture& model, const StepGrid& grid, const SamplerConfig& config,
                      const Point& x_T, Rng& rng) {
    config.validate();
    if (x_T.size() != model.dim()) {
        throw std::invalid_argument("x_T dimension does not match the model");
    }
    ChainResult result;
    Trajectory& traj = result.trajectory;
    if (config.record_trajectory) {
        const auto n = static_cast<std::size_t>(grid.steps());
        traj.start = x_T;
        traj.alpha_start = grid.alpha(grid.steps());
        traj.timesteps.reserve(n);
        traj.alphas.reserve(n);
        traj.xs.reserve(n);
        traj.x0_hats.reserve(n);
        traj.increments.reserve(n);
    }

    ChainState state = init_chain(x_T, grid);
    StepRecord rec;
    StepRecord* rec_ptr = config.record_trajectory ? &rec : nullptr;
    while (state.k >= 1) {
        const int t = grid.timestep(state.k);
        state = config.kind == SamplerKind::vanilla ? vanilla_step(state, model, grid, config, rng, rec_ptr)
                                                    : adaptive_momentum_step(state, model, grid, config, rng, rec_ptr);
        if (rec_ptr != nullptr) {
            traj.timesteps.push_back(t);
            traj.alphas.push_back(grid.alpha(state.k));
            traj.xs.push_back(std::move(rec.x));
            traj.x0_hats.push_back(std::move(rec.x0_hat));
            traj.increments.push_back(std::move(rec.increment));
        }
    }
    result.x0 = state.x(grid);
    return result;
}

BatchResult run_chains(const GaussianMixture& model, const StepGrid& grid, const SamplerConfig& config,
                       std::size_t n_chains, std::uint64_t seed, unsigned threads, std::size_t first_chain) {
    config.validate();
    BatchResult out;
    out.samples.resize(n_chains);
    if (config.record_trajectory) {
        out.trajectories.resize(n_chains);
    }
    parallel_for(n_chains, threads, [&](std::size_t i) {
        Rng rng(seed, first_chain + i);
        const Point x_T = rng.normal_vector(model.dim());
        ChainResult r = run_chain(model, grid, config, x_T, rng);
        out.samples[i] = std::move(r.x0);
        if (config.record_trajectory) {
            out.trajectories[i] = std::move(r.trajectory);
        }
    });
    return out;
}

}  // namespace amsampler
