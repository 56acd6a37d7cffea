#pragma once

#include "amsampler/experiment/run_spec.hpp"
#include "amsampler/metrics.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace amsampler::experiment {

/// Command-line or environment overrides applied on top of a spec.
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> chains;
    bool no_trajectories = false;
    std::optional<unsigned> threads;
};

void apply_overrides(RunSpec& spec, const RunOverrides& overrides);

struct SamplerMetrics {
    std::size_t n_chains = 0;
    int dim = 1;
    std::optional<double> w1;         // D = 1: exact; D > 1: mean over coordinate marginals
    std::optional<double> sliced_w1;  // against a reference draw from the model
    std::optional<double> tv_mean;
    std::optional<double> tv_std;
    std::optional<double> mode_deviation;
    std::vector<ModeStat> mode_stats;

    /// Quality score minimised by sweeps: w1 when D = 1, sliced_w1 otherwise.
    std::optional<double> quality() const;
};

nlohmann::ordered_json to_json(const SamplerMetrics& m);

struct SamplerOutcome {
    std::string name;
    SamplerConfig config;
    std::vector<Point> samples;
    std::vector<Trajectory> trajectories;  // first outputs.trajectory_chains chains
    std::vector<double> total_variation;   // per chain, x space
    std::optional<HeatmapGrid> heatmap;
    SamplerMetrics metrics;
};

struct RunOutcome {
    std::vector<SamplerOutcome> samplers;
    std::vector<std::string> warnings;
};

/// Simulates every sampler of a run spec in memory. Chains are processed in
/// blocks so only the kept trajectories stay resident.
RunOutcome execute(const RunSpec& spec);

/// Writes <out_dir>/manifest.json and, per sampler, <out_dir>/<name>/{samples.csv,
/// trajectories.csv, heatmap.csv, metrics.json} as enabled by spec.outputs.
void write_outputs(const RunSpec& spec, const RunOutcome& outcome);

RunOutcome run(const RunSpec& spec);

void write_samples_csv(std::ostream& out, const std::vector<Point>& samples, Eigen::Index dim);
void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& trajectories, Eigen::Index dim);

/// Metrics of a finished batch against the run spec's model.
SamplerMetrics compute_metrics(const RunSpec& spec, const GaussianMixture& model, const std::vector<Point>& samples,
                               const std::vector<double>& total_variation);

struct SweepRow {
    nlohmann::json value;
    std::uint64_t seed;
    SamplerMetrics metrics;
};

struct SweepCell {
    nlohmann::json value;
    double quality_mean = 0.0;
    double quality_std = 0.0;
    double tv_mean = 0.0;
    std::optional<double> mode_deviation_mean;
    bool argmin = false;
};

struct SweepOutcome {
    std::vector<SweepRow> rows;
    std::vector<SweepCell> cells;
    std::size_t argmin = 0;
    bool interior_minimum = false;
};

/// Runs |values| x seeds_per_cell cells. Seed s of a cell uses base.seed + s.
SweepOutcome run_sweep(const SweepSpec& spec);

/// Writes sweep.csv (one row per cell and seed), sweep_summary.csv and
/// sweep.json under base.out_dir.
void write_sweep(const SweepSpec& spec, const SweepOutcome& outcome);

/// Parent schedule as `t,beta,alpha_cum`.
void dump_schedule(const RunSpec& spec, std::ostream& out);

/// Respaced grid as `k,t,alpha`, k = 0 being the alpha_zero slot.
void dump_grid(const RunSpec& spec, std::ostream& out);

}  // namespace amsampler::experiment
