#include "amsampler/experiment/runner.hpp"
#include "amsampler/experiment/verify.hpp"
#include "amsampler/format.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace amsampler;
using namespace amsampler::experiment;

namespace {

struct Flags {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> chains;
    bool no_trajectories = false;
    std::optional<unsigned> threads;

    RunOverrides overrides() const { return {seed, out_dir, chains, no_trajectories, threads}; }
};

void add_run_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--seed", f.seed, "Master seed")->envname("AMLAB_SEED");
    cmd->add_option("--out-dir", f.out_dir, "Output directory")->envname("AMLAB_OUT_DIR");
    cmd->add_option("--chains", f.chains, "Number of chains")->envname("AMLAB_CHAINS");
    cmd->add_flag("--no-trajectories", f.no_trajectories, "Skip trajectories.csv")->envname("AMLAB_NO_TRAJECTORIES");
    cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)")->envname("AMLAB_THREADS");
}

std::string show(const std::optional<double>& v) { return v ? format_double(*v) : "n/a"; }

int do_run(const std::string& path, const Flags& flags) {
    RunSpec spec = load_run_spec(path);
    apply_overrides(spec, flags.overrides());
    const RunOutcome out = run(spec);
    for (const auto& w : out.warnings) std::cerr << "warning: " << w << '\n';
    for (const SamplerOutcome& s : out.samplers) {
        std::cout << s.name << ": chains=" << s.metrics.n_chains << " w1=" << show(s.metrics.w1)
                  << " tv_mean=" << show(s.metrics.tv_mean) << " mode_deviation=" << show(s.metrics.mode_deviation)
                  << '\n';
    }
    std::cout << "wrote " << (std::filesystem::path(spec.out_dir) / "manifest.json").string() << '\n';
    return 0;
}

int do_sweep(const std::string& path, const Flags& flags) {
    SweepSpec spec = load_sweep_spec(path);
    RunOverrides o = flags.overrides();
    o.no_trajectories = true;
    apply_overrides(spec.base, o);
    const SweepOutcome out = run_sweep(spec);
    write_sweep(spec, out);
    for (const SweepCell& c : out.cells) {
        std::cout << to_string(spec.axis) << '=' << c.value.dump() << " quality=" << format_double(c.quality_mean)
                  << " +- " << format_double(c.quality_std) << (c.argmin ? "  <- argmin" : "") << '\n';
    }
    std::cout << "interior minimum: " << (out.interior_minimum ? "yes" : "no") << '\n';
    return 0;
}

int do_verify(const std::string& out_dir, const std::string& report, bool corrupt) {
    VerifyOptions opt;
    opt.corrupt_a_rule = corrupt;
    const VerifyReport r = run_verify(opt);
    std::filesystem::path file = report.empty() ? std::filesystem::path(out_dir) / "verify_report.json" : std::filesystem::path(report);
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream(file) << r.to_json().dump(2) << '\n';
    for (const CheckResult& c : r.checks) {
        const char* tag = c.passed ? "PASS" : (c.gating ? "FAIL" : "NOTE");
        std::cout << tag << ' ' << c.name << " observed=" << format_double(c.observed)
                  << " threshold=" << format_double(c.threshold);
        if (!c.passed) std::cout << " (" << c.invariant << ")";
        std::cout << '\n';
    }
    std::cout << "report: " << file.string() << '\n';
    return r.passed() ? 0 : 1;
}

int do_dump(const std::string& path, const std::optional<std::string>& out_dir) {
    const RunSpec spec = load_run_spec(path);
    if (!out_dir) {
        dump_schedule(spec, std::cout);
        return 0;
    }
    std::filesystem::create_directories(*out_dir);
    std::ofstream sched(std::filesystem::path(*out_dir) / "schedule.csv");
    dump_schedule(spec, sched);
    std::ofstream grid(std::filesystem::path(*out_dir) / "grid.csv");
    dump_grid(spec, grid);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reverse-diffusion sampler laboratory"};
    app.set_version_flag("--version", AMSAMPLER_VERSION);
    app.require_subcommand(1);

    std::string spec_path;
    Flags run_flags;
    CLI::App* run_cmd = app.add_subcommand("run", "Run every sampler of a spec");
    run_cmd->add_option("spec", spec_path, "Run spec file")->required()->check(CLI::ExistingFile);
    add_run_flags(run_cmd, run_flags);

    Flags sweep_flags;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Sweep one hyperparameter");
    sweep_cmd->add_option("spec", spec_path, "Sweep spec file")->required()->check(CLI::ExistingFile);
    add_run_flags(sweep_cmd, sweep_flags);

    std::string verify_dir = ".";
    std::string verify_report;
    bool corrupt = false;
    CLI::App* verify_cmd = app.add_subcommand("verify", "Run the consistency checks");
    verify_cmd->add_option("--out-dir", verify_dir, "Directory for verify_report.json")->envname("AMLAB_OUT_DIR");
    verify_cmd->add_option("--report", verify_report, "Explicit report path");
    verify_cmd->add_flag("--corrupt-a-rule", corrupt, "Inject a = b = 1 into the spherical check");

    std::optional<std::string> dump_dir;
    CLI::App* schedules_cmd = app.add_subcommand("schedules", "Schedule utilities");
    schedules_cmd->require_subcommand(1);
    CLI::App* dump_cmd = schedules_cmd->add_subcommand("dump", "Write the schedule of a spec as CSV");
    dump_cmd->add_option("spec", spec_path, "Run spec file")->required()->check(CLI::ExistingFile);
    dump_cmd->add_option("--out-dir", dump_dir, "Write schedule.csv and grid.csv here instead of stdout")
        ->envname("AMLAB_OUT_DIR");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return do_run(spec_path, run_flags);
        if (*sweep_cmd) return do_sweep(spec_path, sweep_flags);
        if (*verify_cmd) return do_verify(verify_dir, verify_report, corrupt);
        if (*dump_cmd) return do_dump(spec_path, dump_dir);
    } catch (const SpecError& e) {
        std::cerr << "spec error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
