#pragma once

#include "amsampler/model.hpp"
#include "amsampler/rng.hpp"
#include "amsampler/samplers.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace amsampler {

/// Exact W1 between two empirical scalar distributions (unequal sizes allowed).
double wasserstein1_1d(std::span<const double> a, std::span<const double> b);

/// W1 between an empirical scalar distribution and the noised marginal of a
/// 1-D mixture at `alpha` (alpha = 1 for the data distribution), by
/// quantile matching with Gauss-Legendre quadrature on each sample's
/// probability cell.
double wasserstein1_1d(std::span<const double> samples, const GaussianMixture& target, double alpha = 1.0);

/// Generalized inverse CDF of the noised 1-D mixture; atoms are returned exactly.
double mixture_quantile(const GaussianMixture& target, double u, double alpha = 1.0);

/// Mean 1-D W1 over `n_projections` random unit directions. In two
/// dimensions the directions are stratified over the half circle.
double sliced_w1(std::span<const Point> a, std::span<const Point> b, int n_projections, Rng& rng);

enum class TrajectorySpace { x, x_bar };

/// Sum of step-to-step distances, including the hop out of the start point.
double trajectory_total_variation(const Trajectory& traj, TrajectorySpace space = TrajectorySpace::x);

struct HeatmapGrid {
    std::vector<double> t_edges;
    std::vector<double> x_edges;
    // counts[i][j]: t bin i, x bin j. Values outside the x range clamp to the
    // edge bins so the total is conserved.
    std::vector<std::vector<long long>> counts;

    long long total() const;
    /// Long-format CSV: t_lo,t_hi,x_lo,x_hi,count.
    void write_csv(std::ostream& out) const;
};

/// Occupancy of 1-D trajectories over (t, x). t spans [0, t_max], x spans
/// [x_lo, x_hi]. Throws std::invalid_argument on non-1-D input.
HeatmapGrid build_heatmap(std::span<const Trajectory> trajectories, int t_bins, int x_bins, double x_lo,
                          double x_hi, double t_max);

struct ModeStat {
    double mode;
    double fraction;
    double mean_abs_deviation;  // NaN when no sample is assigned
    long long count;
};

/// Nearest-mode assignment and per-mode deviation.
std::vector<ModeStat> mode_statistics(std::span<const double> samples, std::span<const double> modes);

/// Count-weighted mean |x - nearest mode| across all samples.
double mean_mode_deviation(std::span<const double> samples, std::span<const double> modes);

/// Coordinate `d` of each point.
std::vector<double> coordinate(std::span<const Point> points, Eigen::Index d = 0);

}  // namespace amsampler
