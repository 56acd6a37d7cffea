#pragma once

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace amsampler {

/// Discrete forward-noising schedule.
///
/// Timesteps are 1-based: `beta(t)` and `alpha(t)` accept t in [1, T], and
/// `alpha(0)` returns the configured `alpha_zero` used for the last reverse
/// step. `alpha(t)` is the cumulative product of (1 - beta_i) for i <= t.
class NoiseSchedule {
public:
    /// Throws std::invalid_argument if any beta is outside (0, 1) or
    /// alpha_zero is outside (alpha(1), 1].
    explicit NoiseSchedule(std::vector<double> betas, double alpha_zero = 1.0);

    int steps() const { return static_cast<int>(betas_.size()); }
    double beta(int t) const;
    double alpha(int t) const;
    double alpha_zero() const { return alpha_zero_; }

    std::span<const double> betas() const { return betas_; }
    std::span<const double> alphas_cum() const { return alphas_; }

    /// CSV with header `t,beta,alpha_cum`, one row per timestep.
    void write_csv(std::ostream& out) const;

private:
    std::vector<double> betas_;
    std::vector<double> alphas_;
    double alpha_zero_;
};

/// Linearly interpolated betas from beta_start to beta_end inclusive.
NoiseSchedule linear_beta_schedule(int steps, double beta_start, double beta_end,
                                   double alpha_zero = 1.0);

enum class RespaceMode { uniform, quadratic };

RespaceMode parse_respace_mode(std::string_view name);
std::string_view to_string(RespaceMode mode);

/// The sequence of cumulative alphas a reverse chain walks through.
///
/// Index k runs over 0..K; `alpha(0)` is the terminal alpha_zero slot and
/// `alpha(K)` is the fully noised endpoint. `timestep(k)` maps back to the
/// parent schedule's t (0 for the terminal slot).
class StepGrid {
public:
    StepGrid(std::vector<int> timesteps, std::vector<double> alphas);

    int steps() const { return static_cast<int>(alphas_.size()) - 1; }
    double alpha(int k) const { return alphas_.at(static_cast<std::size_t>(k)); }
    int timestep(int k) const { return timesteps_.at(static_cast<std::size_t>(k)); }

    std::span<const double> alphas() const { return alphas_; }
    std::span<const int> timesteps() const { return timesteps_; }

    /// Single-step grid between two explicit alpha values.
    static StepGrid single(double alpha_hi, double alpha_lo);

    friend bool operator==(const StepGrid&, const StepGrid&) = default;

private:
    std::vector<int> timesteps_;
    std::vector<double> alphas_;
};

/// Every timestep of the schedule, in order.
StepGrid full_grid(const NoiseSchedule& schedule);

/// A strictly increasing subsequence tau of the parent timesteps ending at T.
class RespacedSchedule {
public:
    RespacedSchedule(NoiseSchedule parent, std::vector<int> tau);

    const NoiseSchedule& parent() const { return parent_; }
    std::span<const int> tau() const { return tau_; }
    std::span<const double> alphas_tau() const { return alphas_tau_; }
    int steps() const { return static_cast<int>(tau_.size()); }

    StepGrid grid() const;

private:
    NoiseSchedule parent_;
    std::vector<int> tau_;
    std::vector<double> alphas_tau_;
};

/// Selects K timesteps from the parent. Uniform mode spaces them evenly;
/// quadratic mode spaces them on a squared ramp (denser near t = 1). Both
/// always end at T. Throws std::invalid_argument when K is outside [1, T].
RespacedSchedule respace(const NoiseSchedule& schedule, int steps, RespaceMode mode);

}  // namespace amsampler
