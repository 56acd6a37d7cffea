#include "amsampler/experiment/runner.hpp"

#include "amsampler/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#ifndef AMSAMPLER_VERSION
#define AMSAMPLER_VERSION "dev"
#endif

namespace amsampler::experiment {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kBlock = 1024;
constexpr std::uint64_t kReferenceStream = 0xa11ce5eedULL;
constexpr std::uint64_t kProjectionStream = 0xb0b5eedULL;

unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

std::pair<double, double> heatmap_range(const RunSpec& spec) {
    if (spec.outputs.heatmap_x_range) return *spec.outputs.heatmap_x_range;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& m : spec.model.means) {
        lo = std::min(lo, m.front());
        hi = std::max(hi, m.front());
    }
    return {lo - 4.0, hi + 4.0};
}

std::vector<double> resolved_modes(const RunSpec& spec, Eigen::Index dim) {
    if (!spec.outputs.modes.empty()) return spec.outputs.modes;
    std::vector<double> modes;
    if (dim == 1) {
        for (const auto& m : spec.model.means) modes.push_back(m.front());
        std::sort(modes.begin(), modes.end());
        modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
    }
    return modes;
}

// Coordinate d of a diagonal mixture is itself a 1-D mixture.
GaussianMixture marginal(const GaussianMixture& gmm, Eigen::Index d) {
    std::vector<Point> mu;
    std::vector<Point> var;
    for (std::size_t k = 0; k < gmm.size(); ++k) {
        mu.push_back(Point::Constant(1, gmm.means()[k][d]));
        var.push_back(Point::Constant(1, gmm.variances()[k][d]));
    }
    return GaussianMixture(gmm.weights(), std::move(mu), std::move(var));
}

template <typename T>
ordered_json or_null(const std::optional<T>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + file.string() + "'");
    }
    out << text;
}

}  // namespace

void apply_overrides(RunSpec& spec, const RunOverrides& o) {
    if (o.seed) spec.seed = *o.seed;
    if (o.out_dir) spec.out_dir = *o.out_dir;
    if (o.chains) spec.n_chains = *o.chains;
    if (o.no_trajectories) spec.outputs.trajectories = false;
    if (o.threads) spec.threads = *o.threads;
}

std::optional<double> SamplerMetrics::quality() const { return dim == 1 ? w1 : sliced_w1; }

ordered_json to_json(const SamplerMetrics& m) {
    ordered_json j;
    j["n_chains"] = m.n_chains;
    j["w1"] = or_null(m.w1);
    j["sliced_w1"] = or_null(m.sliced_w1);
    j["tv_mean"] = or_null(m.tv_mean);
    j["tv_std"] = or_null(m.tv_std);
    j["tv_space"] = "x";
    j["mode_deviation"] = or_null(m.mode_deviation);
    ordered_json stats = ordered_json::array();
    for (const ModeStat& s : m.mode_stats) {
        ordered_json e;
        e["mode"] = s.mode;
        e["count"] = s.count;
        e["fraction"] = s.fraction;
        e["mean_abs_deviation"] = std::isnan(s.mean_abs_deviation) ? ordered_json(nullptr) : ordered_json(s.mean_abs_deviation);
        stats.push_back(e);
    }
    j["mode_stats"] = stats;
    return j;
}

SamplerMetrics compute_metrics(const RunSpec& spec, const GaussianMixture& model, const std::vector<Point>& samples,
                               const std::vector<double>& tv) {
    SamplerMetrics m;
    m.n_chains = samples.size();
    m.dim = static_cast<int>(model.dim());
    if (!tv.empty()) {
        double sum = 0.0;
        for (double v : tv) sum += v;
        const double mean = sum / static_cast<double>(tv.size());
        double ss = 0.0;
        for (double v : tv) ss += (v - mean) * (v - mean);
        m.tv_mean = mean;
        m.tv_std = tv.size() > 1 ? std::sqrt(ss / static_cast<double>(tv.size() - 1)) : 0.0;
    }
    if (samples.empty()) {
        return m;
    }
    const Eigen::Index dim = model.dim();
    if (dim == 1) {
        const std::vector<double> xs = coordinate(samples, 0);
        m.w1 = wasserstein1_1d(xs, model);
        // Every unit direction in one dimension is +-1, so slicing changes nothing.
        m.sliced_w1 = m.w1;
    } else {
        double sum = 0.0;
        for (Eigen::Index d = 0; d < dim; ++d) {
            sum += wasserstein1_1d(coordinate(samples, d), marginal(model, d));
        }
        m.w1 = sum / static_cast<double>(dim);
        Rng ref_rng(spec.seed, kReferenceStream);
        std::vector<Point> reference;
        reference.reserve(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) reference.push_back(model.sample(ref_rng));
        Rng proj_rng(spec.seed, kProjectionStream);
        m.sliced_w1 = sliced_w1(samples, reference, spec.outputs.sliced_projections, proj_rng);
    }
    const std::vector<double> modes = resolved_modes(spec, dim);
    if (!modes.empty() && dim == 1) {
        const std::vector<double> xs = coordinate(samples, 0);
        m.mode_stats = mode_statistics(xs, modes);
        m.mode_deviation = mean_mode_deviation(xs, modes);
    }
    return m;
}

RunOutcome execute(const RunSpec& spec) {
    RunOutcome outcome;
    const GaussianMixture model = spec.model.build();
    const NoiseSchedule schedule = spec.schedule.build();
    const StepGrid grid = respace(schedule, spec.schedule.K, spec.schedule.respacing).grid();
    const unsigned threads = resolve_threads(spec.threads);
    if (spec.n_chains == 0) {
        outcome.warnings.push_back("n_chains is 0; outputs are empty");
    }
    const bool want_heatmap = spec.outputs.heatmap && model.dim() == 1;
    if (spec.outputs.heatmap && model.dim() != 1) {
        outcome.warnings.push_back("heatmap skipped: the model is not one-dimensional");
    }
    const auto [x_lo, x_hi] = heatmap_range(spec);
    const std::size_t keep = spec.outputs.trajectories
                                 ? (spec.outputs.trajectory_chains == 0 ? spec.n_chains
                                                                        : std::min(spec.n_chains, spec.outputs.trajectory_chains))
                                 : 0;

    for (const SamplerEntry& entry : spec.samplers) {
        SamplerOutcome so;
        so.name = entry.name;
        so.config = entry.config;
        SamplerConfig config = entry.config;
        config.record_trajectory = true;
        so.samples.reserve(spec.n_chains);
        so.total_variation.reserve(spec.n_chains);
        if (want_heatmap) {
            so.heatmap = build_heatmap({}, spec.outputs.heatmap_t_bins, spec.outputs.heatmap_x_bins, x_lo, x_hi,
                                       static_cast<double>(schedule.steps()));
        }
        for (std::size_t first = 0; first < spec.n_chains; first += kBlock) {
            const std::size_t n = std::min(kBlock, spec.n_chains - first);
            BatchResult batch = run_chains(model, grid, config, n, spec.seed, threads, first);
            if (want_heatmap) {
                const HeatmapGrid part = build_heatmap(batch.trajectories, spec.outputs.heatmap_t_bins,
                                                       spec.outputs.heatmap_x_bins, x_lo, x_hi,
                                                       static_cast<double>(schedule.steps()));
                for (std::size_t i = 0; i < part.counts.size(); ++i) {
                    for (std::size_t j = 0; j < part.counts[i].size(); ++j) {
                        so.heatmap->counts[i][j] += part.counts[i][j];
                    }
                }
            }
            for (std::size_t i = 0; i < n; ++i) {
                so.total_variation.push_back(trajectory_total_variation(batch.trajectories[i]));
                so.samples.push_back(std::move(batch.samples[i]));
                if (first + i < keep) {
                    so.trajectories.push_back(std::move(batch.trajectories[i]));
                }
            }
        }
        so.metrics = compute_metrics(spec, model, so.samples, so.total_variation);
        outcome.samplers.push_back(std::move(so));
    }
    return outcome;
}

void write_samples_csv(std::ostream& out, const std::vector<Point>& samples, Eigen::Index dim) {
    out << "chain_id";
    for (Eigen::Index d = 0; d < dim; ++d) out << ",x_" << d;
    out << '\n';
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out << i;
        for (Eigen::Index d = 0; d < dim; ++d) out << ',' << format_double(samples[i][d]);
        out << '\n';
    }
}

void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& trajectories, Eigen::Index dim) {
    out << "chain_id,step_index,t";
    for (Eigen::Index d = 0; d < dim; ++d) out << ",x_" << d;
    for (Eigen::Index d = 0; d < dim; ++d) out << ",x0_hat_" << d;
    out << '\n';
    for (std::size_t c = 0; c < trajectories.size(); ++c) {
        const Trajectory& tr = trajectories[c];
        for (std::size_t s = 0; s < tr.size(); ++s) {
            out << c << ',' << s << ',' << tr.timesteps[s];
            for (Eigen::Index d = 0; d < dim; ++d) out << ',' << format_double(tr.xs[s][d]);
            for (Eigen::Index d = 0; d < dim; ++d) out << ',' << format_double(tr.x0_hats[s][d]);
            out << '\n';
        }
    }
}

void write_outputs(const RunSpec& spec, const RunOutcome& outcome) {
    const fs::path root = spec.out_dir;
    fs::create_directories(root);
    const Eigen::Index dim = static_cast<Eigen::Index>(spec.model.means.front().size());

    ordered_json manifest;
    manifest["tool"] = "amlab";
    manifest["version"] = AMSAMPLER_VERSION;
    manifest["spec"] = to_json(spec);
    manifest["warnings"] = outcome.warnings;
    ordered_json files = ordered_json::array();
    ordered_json summary = ordered_json::object();

    const auto emit = [&](const fs::path& rel, const std::string& text) {
        write_text(root / rel, text);
        ordered_json f;
        f["path"] = rel.generic_string();
        f["bytes"] = text.size();
        files.push_back(f);
    };

    for (const SamplerOutcome& so : outcome.samplers) {
        const fs::path dir = so.name;
        fs::create_directories(root / dir);
        if (spec.outputs.samples) {
            std::ostringstream s;
            write_samples_csv(s, so.samples, dim);
            emit(dir / "samples.csv", s.str());
        }
        if (spec.outputs.trajectories) {
            std::ostringstream s;
            write_trajectories_csv(s, so.trajectories, dim);
            emit(dir / "trajectories.csv", s.str());
        }
        if (so.heatmap) {
            std::ostringstream s;
            so.heatmap->write_csv(s);
            emit(dir / "heatmap.csv", s.str());
        }
        if (spec.outputs.metrics) {
            ordered_json m = to_json(so.metrics);
            m["sampler"] = so.name;
            m["config"] = to_json(so.config);
            emit(dir / "metrics.json", m.dump(2) + "\n");
            summary[so.name] = to_json(so.metrics);
        }
    }
    if (spec.outputs.metrics) {
        emit("summary.json", summary.dump(2) + "\n");
    }
    manifest["files"] = files;
    write_text(root / "manifest.json", manifest.dump(2) + "\n");
}

RunOutcome run(const RunSpec& spec) {
    RunOutcome outcome = execute(spec);
    write_outputs(spec, outcome);
    return outcome;
}

SweepOutcome run_sweep(const SweepSpec& spec) {
    SweepOutcome out;
    const SamplerEntry& target = find_sampler(spec.base, spec.sampler);
    for (const json& value : spec.values) {
        SweepCell cell;
        cell.value = value;
        std::vector<double> quality;
        double tv_sum = 0.0;
        double dev_sum = 0.0;
        bool have_dev = true;
        for (int s = 0; s < spec.seeds_per_cell; ++s) {
            RunSpec run_spec = spec.base;
            SamplerEntry entry = target;
            switch (spec.axis) {
                case SweepAxis::b: entry.config.b = value.get<double>(); break;
                case SweepAxis::c: entry.config.c = value.get<double>(); break;
                case SweepAxis::eta_mode: entry.config.eta = parse_eta_mode(value.get<std::string>()); break;
                case SweepAxis::K: run_spec.schedule.K = value.get<int>(); break;
            }
            run_spec.samplers = {entry};
            run_spec.seed = spec.base.seed + static_cast<std::uint64_t>(s);
            run_spec.outputs.trajectories = false;
            run_spec.outputs.heatmap = false;
            const RunOutcome r = execute(run_spec);
            const SamplerMetrics& m = r.samplers.front().metrics;
            out.rows.push_back({value, run_spec.seed, m});
            quality.push_back(m.quality().value_or(std::numeric_limits<double>::quiet_NaN()));
            tv_sum += m.tv_mean.value_or(0.0);
            if (m.mode_deviation) {
                dev_sum += *m.mode_deviation;
            } else {
                have_dev = false;
            }
        }
        const double n = static_cast<double>(quality.size());
        double mean = 0.0;
        for (double q : quality) mean += q;
        mean /= n;
        double ss = 0.0;
        for (double q : quality) ss += (q - mean) * (q - mean);
        cell.quality_mean = mean;
        cell.quality_std = quality.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        cell.tv_mean = tv_sum / n;
        if (have_dev) cell.mode_deviation_mean = dev_sum / n;
        out.cells.push_back(std::move(cell));
    }
    for (std::size_t i = 1; i < out.cells.size(); ++i) {
        if (out.cells[i].quality_mean < out.cells[out.argmin].quality_mean) out.argmin = i;
    }
    out.cells[out.argmin].argmin = true;
    out.interior_minimum = out.argmin > 0 && out.argmin + 1 < out.cells.size();
    return out;
}

void write_sweep(const SweepSpec& spec, const SweepOutcome& outcome) {
    const fs::path root = spec.base.out_dir;
    fs::create_directories(root);
    const std::string axis(to_string(spec.axis));
    const auto value_text = [](const json& v) { return v.is_number_float() ? format_double(v.get<double>()) : (v.is_string() ? v.get<std::string>() : v.dump()); };
    const auto opt_text = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };

    std::ostringstream rows;
    rows << axis << ",seed,w1,sliced_w1,tv_mean,tv_std,mode_deviation\n";
    for (const SweepRow& r : outcome.rows) {
        rows << value_text(r.value) << ',' << r.seed << ',' << opt_text(r.metrics.w1) << ','
             << opt_text(r.metrics.sliced_w1) << ',' << opt_text(r.metrics.tv_mean) << ','
             << opt_text(r.metrics.tv_std) << ',' << opt_text(r.metrics.mode_deviation) << '\n';
    }
    write_text(root / "sweep.csv", rows.str());

    std::ostringstream cells;
    cells << axis << ",quality_mean,quality_std,tv_mean,mode_deviation_mean,argmin\n";
    for (const SweepCell& c : outcome.cells) {
        cells << value_text(c.value) << ',' << format_double(c.quality_mean) << ',' << format_double(c.quality_std)
              << ',' << format_double(c.tv_mean) << ',' << opt_text(c.mode_deviation_mean) << ','
              << (c.argmin ? 1 : 0) << '\n';
    }
    write_text(root / "sweep_summary.csv", cells.str());

    ordered_json j;
    j["version"] = AMSAMPLER_VERSION;
    j["spec"] = to_json(spec);
    j["quality_metric"] = spec.base.model.means.front().size() == 1 ? "w1" : "sliced_w1";
    j["argmin_value"] = ordered_json::parse(outcome.cells[outcome.argmin].value.dump());
    j["interior_minimum"] = outcome.interior_minimum;
    ordered_json cj = ordered_json::array();
    for (const SweepCell& c : outcome.cells) {
        ordered_json e;
        e["value"] = ordered_json::parse(c.value.dump());
        e["quality_mean"] = c.quality_mean;
        e["quality_std"] = c.quality_std;
        e["tv_mean"] = c.tv_mean;
        e["mode_deviation_mean"] = or_null(c.mode_deviation_mean);
        e["argmin"] = c.argmin;
        cj.push_back(e);
    }
    j["cells"] = cj;
    write_text(root / "sweep.json", j.dump(2) + "\n");
}

void dump_schedule(const RunSpec& spec, std::ostream& out) { spec.schedule.build().write_csv(out); }

void dump_grid(const RunSpec& spec, std::ostream& out) {
    const StepGrid grid = spec.schedule.grid();
    out << "k,t,alpha\n";
    for (int k = 0; k <= grid.steps(); ++k) {
        out << k << ',' << grid.timestep(k) << ',' << format_double(grid.alpha(k)) << '\n';
    }
}

}  // namespace amsampler::experiment
