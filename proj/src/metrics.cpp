#include "amsampler/metrics.hpp"

#include "amsampler/format.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace amsampler {

double wasserstein1_1d(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("wasserstein1_1d needs non-empty inputs");
    }
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    // Integrate |F_a - F_b| over the merged support.
    const double wa = 1.0 / static_cast<double>(sa.size());
    const double wb = 1.0 / static_cast<double>(sb.size());
    std::size_t ia = 0;
    std::size_t ib = 0;
    double fa = 0.0;
    double fb = 0.0;
    double prev = std::min(sa.front(), sb.front());
    double total = 0.0;
    while (ia < sa.size() || ib < sb.size()) {
        const double next_a = ia < sa.size() ? sa[ia] : std::numeric_limits<double>::infinity();
        const double next_b = ib < sb.size() ? sb[ib] : std::numeric_limits<double>::infinity();
        const double x = std::min(next_a, next_b);
        total += std::abs(fa - fb) * (x - prev);
        prev = x;
        while (ia < sa.size() && sa[ia] == x) {
            ++ia;
        }
        while (ib < sb.size() && sb[ib] == x) {
            ++ib;
        }
        fa = static_cast<double>(ia) * wa;
        fb = static_cast<double>(ib) * wb;
    }
    return total;
}

double mixture_quantile(const GaussianMixture& target, double u, double alpha) {
    if (target.dim() != 1) {
        throw std::invalid_argument("mixture_quantile needs a 1-D mixture");
    }
    if (!(u > 0.0 && u < 1.0)) {
        throw std::domain_error("quantile level must lie in (0, 1)");
    }
    const double root_alpha = std::sqrt(alpha);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> atoms;  // (location, weight)
    for (std::size_t k = 0; k < target.size(); ++k) {
        const double centre = root_alpha * target.means()[k][0];
        const double sd = std::sqrt(alpha * target.variances()[k][0] + (1.0 - alpha));
        if (sd == 0.0) {
            atoms.emplace_back(centre, target.weights()[k]);
        }
        lo = std::min(lo, centre - 40.0 * sd - 1.0);
        hi = std::max(hi, centre + 40.0 * sd + 1.0);
    }
    std::sort(atoms.begin(), atoms.end());
    for (const auto& [loc, weight] : atoms) {
        const double at = target.cdf_1d(loc, alpha);
        double mass = 0.0;
        for (const auto& [other, w] : atoms) {
            if (other == loc) {
                mass += w;
            }
        }
        if (at - mass < u && u <= at) {
            return loc;
        }
    }
    for (int iter = 0; iter < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (target.cdf_1d(mid, alpha) >= u) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double wasserstein1_1d(std::span<const double> samples, const GaussianMixture& target, double alpha) {
    if (samples.empty()) {
        throw std::invalid_argument("wasserstein1_1d needs a non-empty sample");
    }
    // 8-point Gauss-Legendre nodes and weights on [-1, 1].
    static constexpr std::array<double, 8> nodes = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                                    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                                    0.7966664774136267,  0.9602898564975363};
    static constexpr std::array<double, 8> weights = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                      0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                      0.2223810344533745, 0.1012285362903763};
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double total = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double lo = static_cast<double>(i) / n;
        const double half = 0.5 / n;
        double cell = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const double u = lo + half * (1.0 + nodes[j]);
            cell += weights[j] * std::abs(sorted[i] - mixture_quantile(target, u, alpha));
        }
        total += cell * half;
    }
    return total;
}

double sliced_w1(std::span<const Point> a, std::span<const Point> b, int n_projections, Rng& rng) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("sliced_w1 needs non-empty clouds");
    }
    if (n_projections < 1) {
        throw std::invalid_argument("sliced_w1 needs at least one projection");
    }
    const Eigen::Index dim = a.front().size();
    const auto check = [dim](std::span<const Point> cloud) {
        for (const Point& p : cloud) {
            if (p.size() != dim) {
                throw std::invalid_argument("sliced_w1: dimension mismatch");
            }
        }
    };
    check(a);
    check(b);

    std::vector<double> pa(a.size());
    std::vector<double> pb(b.size());
    double sum = 0.0;
    // In the plane, directions are equispaced over a half turn behind one
    // random offset; each is still uniform, and the estimate barely moves
    // under rotation.
    const double offset = rng.uniform();
    for (int p = 0; p < n_projections; ++p) {
        Point dir;
        if (dim == 2) {
            const double theta = std::numbers::pi * (p + offset) / n_projections;
            dir = Point(2);
            dir << std::cos(theta), std::sin(theta);
        } else {
            dir = rng.normal_vector(dim);
            dir.normalize();
        }
        for (std::size_t i = 0; i < a.size(); ++i) {
            pa[i] = dir.dot(a[i]);
        }
        for (std::size_t i = 0; i < b.size(); ++i) {
            pb[i] = dir.dot(b[i]);
        }
        sum += wasserstein1_1d(pa, pb);
    }
    return sum / n_projections;
}

double trajectory_total_variation(const Trajectory& traj, TrajectorySpace space) {
    if (traj.empty()) {
        throw std::invalid_argument("trajectory is empty");
    }
    const auto scaled = [space](const Point& x, double alpha) -> Point {
        return space == TrajectorySpace::x ? x : Point(x / std::sqrt(alpha));
    };
    Point prev = scaled(traj.start, traj.alpha_start);
    double total = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        Point cur = scaled(traj.xs[i], traj.alphas[i]);
        total += (cur - prev).norm();
        prev = std::move(cur);
    }
    return total;
}

long long HeatmapGrid::total() const {
    long long sum = 0;
    for (const auto& row : counts) {
        for (long long c : row) {
            sum += c;
        }
    }
    return sum;
}

void HeatmapGrid::write_csv(std::ostream& out) const {
    out << "t_lo,t_hi,x_lo,x_hi,count\n";
    for (std::size_t i = 0; i < counts.size(); ++i) {
        for (std::size_t j = 0; j < counts[i].size(); ++j) {
            out << format_double(t_edges[i]) << ',' << format_double(t_edges[i + 1]) << ','
                << format_double(x_edges[j]) << ',' << format_double(x_edges[j + 1]) << ',' << counts[i][j] << '\n';
        }
    }
}

namespace {

std::vector<double> linspace_edges(double lo, double hi, int bins) {
    std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) {
        edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / bins;
    }
    return edges;
}

std::size_t bin_of(double value, double lo, double hi, int bins) {
    const double pos = (value - lo) / (hi - lo) * bins;
    if (!(pos > 0.0)) {
        return 0;
    }
    return static_cast<std::size_t>(std::min<double>(bins - 1, std::floor(pos)));
}

}  // namespace

HeatmapGrid build_heatmap(std::span<const Trajectory> trajectories, int t_bins, int x_bins, double x_lo,
                          double x_hi, double t_max) {
    if (t_bins < 1 || x_bins < 1 || !(x_hi > x_lo) || !(t_max > 0.0)) {
        throw std::invalid_argument("heatmap needs positive bin counts and non-empty ranges");
    }
    HeatmapGrid grid;
    grid.t_edges = linspace_edges(0.0, t_max, t_bins);
    grid.x_edges = linspace_edges(x_lo, x_hi, x_bins);
    grid.counts.assign(static_cast<std::size_t>(t_bins), std::vector<long long>(static_cast<std::size_t>(x_bins), 0));
    for (const Trajectory& traj : trajectories) {
        for (std::size_t i = 0; i < traj.size(); ++i) {
            if (traj.xs[i].size() != 1) {
                throw std::invalid_argument("heatmap needs 1-D trajectories");
            }
            const std::size_t ti = bin_of(traj.timesteps[i], 0.0, t_max, t_bins);
            const std::size_t xi = bin_of(traj.xs[i][0], x_lo, x_hi, x_bins);
            ++grid.counts[ti][xi];
        }
    }
    return grid;
}

namespace {

std::size_t nearest(double x, std::span<const double> modes) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < modes.size(); ++k) {
        if (std::abs(x - modes[k]) < std::abs(x - modes[best])) {
            best = k;
        }
    }
    return best;
}

}  // namespace

std::vector<ModeStat> mode_statistics(std::span<const double> samples, std::span<const double> modes) {
    if (modes.empty()) {
        throw std::invalid_argument("mode_statistics needs at least one mode");
    }
    std::vector<ModeStat> stats;
    for (double m : modes) {
        stats.push_back({m, 0.0, 0.0, 0});
    }
    for (double x : samples) {
        ModeStat& s = stats[nearest(x, modes)];
        ++s.count;
        s.mean_abs_deviation += std::abs(x - s.mode);
    }
    const double n = static_cast<double>(samples.size());
    for (ModeStat& s : stats) {
        s.fraction = samples.empty() ? 0.0 : static_cast<double>(s.count) / n;
        s.mean_abs_deviation =
            s.count > 0 ? s.mean_abs_deviation / static_cast<double>(s.count) : std::numeric_limits<double>::quiet_NaN();
    }
    return stats;
}

double mean_mode_deviation(std::span<const double> samples, std::span<const double> modes) {
    if (modes.empty() || samples.empty()) {
        throw std::invalid_argument("mean_mode_deviation needs samples and modes");
    }
    double sum = 0.0;
    for (double x : samples) {
        sum += std::abs(x - modes[nearest(x, modes)]);
    }
    return sum / static_cast<double>(samples.size());
}

std::vector<double> coordinate(std::span<const Point> points, Eigen::Index d) {
    std::vector<double> out;
    out.reserve(points.size());
    for (const Point& p : points) {
        out.push_back(p[d]);
    }
    return out;
}

}  // namespace amsampler
