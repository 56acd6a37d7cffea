#pragma once

#include "amsampler/model.hpp"
#include "amsampler/rng.hpp"
#include "amsampler/schedule.hpp"

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace amsampler {

/// Variance knob of the generalized reverse step.
///   deterministic: eta = 0
///   ddpm_unit:     eta = 1
///   ddpm_hat:      eta = sqrt((1 - alpha_t) / (1 - alpha_prev)), i.e. sigma^2 = beta_t
enum class EtaMode { deterministic, ddpm_unit, ddpm_hat };
enum class SamplerKind { vanilla, adaptive };
enum class CoefficientRule { spherical, affine };
enum class BSchedule { constant, linear_ramp };
enum class VNorm { raw_l2sq, mean_sq };

EtaMode parse_eta_mode(std::string_view name);
SamplerKind parse_sampler_kind(std::string_view name);
CoefficientRule parse_coefficient_rule(std::string_view name);
BSchedule parse_b_schedule(std::string_view name);
VNorm parse_v_norm(std::string_view name);
std::string_view to_string(EtaMode mode);
std::string_view to_string(SamplerKind kind);
std::string_view to_string(CoefficientRule rule);
std::string_view to_string(BSchedule schedule);
std::string_view to_string(VNorm norm);

struct SamplerConfig {
    SamplerKind kind = SamplerKind::vanilla;
    EtaMode eta = EtaMode::ddpm_unit;
    // Weight on the current increment. With a linear ramp this is b_max.
    double b = 0.15;
    BSchedule b_schedule = BSchedule::constant;
    CoefficientRule a_rule = CoefficientRule::spherical;
    // Second-moment decay: v <- (1 - c) v + c |dx|^2.
    double c = 0.01;
    double zeta = 1e-8;
    VNorm v_norm = VNorm::mean_sq;
    bool record_trajectory = false;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    friend bool operator==(const SamplerConfig&, const SamplerConfig&) = default;
};

/// Adaptive config that reduces exactly to the vanilla update.
SamplerConfig degenerate_adaptive(EtaMode eta);

struct MomentumCoefficients {
    double a;
    double b;
};

double damping_for(CoefficientRule rule, double b);

/// (a, b) for reverse step `step_index` (0 for the first step taken from the
/// noised end) out of `total_steps`.
MomentumCoefficients momentum_coefficients(const SamplerConfig& config, int step_index, int total_steps);

/// sigma_t = eta * sqrt((1 - alpha_prev) / (1 - alpha_t)) * sqrt(1 - alpha_t / alpha_prev).
/// Throws std::invalid_argument unless alpha_t < alpha_prev.
double sigma_from_alphas(double alpha_t, double alpha_prev, EtaMode mode);
double sigma(const NoiseSchedule& schedule, int t_hi, int t_lo, EtaMode mode);

/// Scalars of one reverse step from alpha_t to alpha_prev.
struct ReverseCoefficients {
    double alpha_t;
    double alpha_prev;
    double sigma;
    double direction;    // sqrt(1 - alpha_prev - sigma^2)
    double mu;           // drift gain on eps_hat in x-bar space
    double noise_scale;  // sigma / sqrt(alpha_prev)
};

/// Throws std::domain_error when 1 - alpha_prev - sigma^2 < 0.
ReverseCoefficients reverse_coefficients(double alpha_t, double alpha_prev, double sigma);

/// Coefficients for grid step k -> k-1. ddpm_hat clips sigma to
/// sqrt(1 - alpha_prev), the largest value the step admits.
ReverseCoefficients step_coefficients(const StepGrid& grid, int k, EtaMode mode);

/// Generalized reverse step in x space:
/// sqrt(alpha_prev) x0_hat + sqrt(1 - alpha_prev - sigma^2) eps_hat + sigma eps_noise.
Point ddim_step(const Point& x_t, const Point& eps_hat, const Point& eps_noise, const StepGrid& grid, int k,
                EtaMode mode);

/// x-bar increment: mu * eps_hat + sigma / sqrt(alpha_prev) * eps_noise.
Point increment(const Point& eps_hat, const Point& eps_noise, const StepGrid& grid, int k, EtaMode mode);

/// State of one reverse chain at grid index k, held in the rescaled space
/// x_bar = x / sqrt(alpha_k).
struct ChainState {
    int k;
    Point x_bar;
    Point m;
    double v;

    Point x(const StepGrid& grid) const { return std::sqrt(grid.alpha(k)) * x_bar; }
};

/// m = 0 and v = 1 at the noised end.
ChainState init_chain(const Point& x_T, const StepGrid& grid);

struct StepRecord {
    Point x;        // position after the step, x space
    Point x0_hat;   // prediction made at the step's starting point
    Point increment;
};

ChainState vanilla_step(const ChainState& state, const GaussianMixture& model, const StepGrid& grid,
                        const SamplerConfig& config, Rng& rng, StepRecord* record = nullptr);

ChainState adaptive_momentum_step(const ChainState& state, const GaussianMixture& model, const StepGrid& grid,
                                  const SamplerConfig& config, Rng& rng, StepRecord* record = nullptr);

/// Recorded path of one chain. Entry i describes reverse step i.
struct Trajectory {
    Point start;
    double alpha_start = 1.0;
    std::vector<int> timesteps;  // t at which each step started
    std::vector<double> alphas;  // alpha of the position after each step
    std::vector<Point> xs;
    std::vector<Point> x0_hats;
    std::vector<Point> increments;

    std::size_t size() const { return xs.size(); }
    bool empty() const { return xs.empty(); }
};

struct ChainResult {
    Point x0;
    Trajectory trajectory;  // empty unless config.record_trajectory
};

ChainResult run_chain(const GaussianMixture& model, const StepGrid& grid, const SamplerConfig& config,
                      const Point& x_T, Rng& rng);

struct BatchResult {
    std::vector<Point> samples;
    std::vector<Trajectory> trajectories;
};

/// Runs chains first_chain .. first_chain + n - 1; chain i draws x_T and all
/// step noise from Rng(seed, i). Output is independent of `threads`.
BatchResult run_chains(const GaussianMixture& model, const StepGrid& grid, const SamplerConfig& config,
                       std::size_t n_chains, std::uint64_t seed, unsigned threads = 1, std::size_t first_chain = 0);

}  // namespace amsampler
