// quantcredit: quantized-filter credit spreads under partial information.
//
//   quantcredit run configs/bs.cfg --simulate-obs
//   quantcredit run configs/cev.cfg --trials 10000 --obs-seed 3
//   quantcredit quantize --config configs/bs.cfg --out out/bs
//   quantcredit filter configs/bs.cfg --obs-file prices.csv
//   quantcredit curve configs/bs.cfg --out out/bs
//   quantcredit convergence configs/bs.cfg --sweep M=1000,4000,16000
//
// Exit codes: 0 success, 1 invalid configuration or input, 2 runtime failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "quantcredit/config.hpp"
#include "quantcredit/errors.hpp"
#include "quantcredit/pipeline.hpp"

namespace qc = quantcredit;
namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string config;
    std::string positional;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<unsigned> workers;
    std::optional<std::size_t> trials;
};

struct ObsArgs {
    bool simulate = false;
    std::string file;
    std::uint64_t index = 0;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("config_file", a.positional, "Scenario config file");
    cmd->add_option("--config,-c", a.config, "Scenario config file");
    cmd->add_option("--seed", a.seed, "Override run.seed");
    cmd->add_option("--out,-o", a.out, "Output directory (overrides run.output_dir)");
    cmd->add_option("--workers,-j", a.workers, "Worker threads (0 = all cores)");
    cmd->add_option("--trials,-M", a.trials, "Override numerics.mc_trials")->check(CLI::Range(std::size_t{100}, std::size_t{1} << 40));
}

void add_obs(CLI::App* cmd, ObsArgs& o) {
    auto* sim = cmd->add_flag("--simulate-obs", o.simulate, "Simulate the observed price path");
    auto* file = cmd->add_option("--obs-file", o.file, "CSV of time,price on the filter grid");
    sim->excludes(file);
    cmd->add_option("--obs-seed", o.index, "Index of the simulated observation path");
}

qc::ScenarioConfig load(const CommonArgs& a) {
    const std::string path = !a.config.empty() ? a.config : a.positional;
    if (path.empty()) throw qc::ValidationError({"no config file given (use --config or a positional path)"});
    if (!a.config.empty() && !a.positional.empty() && a.config != a.positional)
        throw qc::ValidationError({"two different config files given"});
    auto cfg = qc::load_config(path);
    if (a.seed) cfg.seed = *a.seed;
    if (!a.out.empty()) cfg.output_dir = a.out;
    if (a.workers) cfg.numerics.workers = *a.workers;
    if (a.trials) cfg.numerics.mc_trials = *a.trials;
    return cfg;
}

qc::ObservationSource source_of(const ObsArgs& o) {
    if (!o.file.empty()) return qc::ObservationSource::from_file(o.file);
    return qc::ObservationSource::simulated(o.index);
}

void report(const std::vector<fs::path>& files) {
    for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Credit spreads under partial information via quantized filtering"};
    app.set_version_flag("--version", QUANTCREDIT_VERSION);
    app.require_subcommand(1);

    CommonArgs common;
    ObsArgs obs;
    std::string sweep_text;
    double maturity = 0.0;
    std::string report_path;

    auto* run = app.add_subcommand("run", "Quantize, filter and price the full spread curve");
    add_common(run, common);
    add_obs(run, obs);

    auto* quantize = app.add_subcommand("quantize", "Build and save the quantization grids");
    add_common(quantize, common);

    auto* filter = app.add_subcommand("filter", "Run the filter on an observed path");
    add_common(filter, common);
    add_obs(filter, obs);

    auto* curve = app.add_subcommand("curve", "Spread curve from a saved filter.csv");
    add_common(curve, common);

    auto* conv = app.add_subcommand("convergence", "Rate sweep over M, N or grid size");
    add_common(conv, common);
    conv->add_option("--sweep", sweep_text, "M=..., N=... or grid=...")->required();
    conv->add_option("--maturity", maturity, "Survival horizon end (default s + 1)");
    conv->add_option("--report", report_path, "CSV path (default <out>/convergence_<kind>.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const auto cfg = load(common);
        const fs::path out = cfg.output_dir;

        if (run->parsed()) {
            const auto r = qc::run_pipeline(cfg, source_of(obs), out);
            report(r.artifacts);
        } else if (quantize->parsed()) {
            fs::create_directories(out);
            const auto cache = qc::build_quantization(cfg);
            qc::save_grid_cache(out / qc::artifact::grid, cache);
            report({out / qc::artifact::grid});
        } else if (filter->parsed()) {
            const auto r = qc::run_filter_stage(cfg, source_of(obs), out);
            report(r.artifacts);
            std::printf("filter mean at s: %.10g\n", r.filter.mean());
        } else if (curve->parsed()) {
            std::ifstream in(out / qc::artifact::filter, std::ios::binary);
            if (!in)
                throw std::runtime_error("no " + (out / qc::artifact::filter).string() +
                                         "; run 'filter' first");
            const auto f = qc::read_filter_csv(in);
            qc::run_curve_stage(cfg, f, "filter.csv", out);
            report({out / qc::artifact::spreads, out / qc::artifact::curve_plot});
        } else if (conv->parsed()) {
            const auto sweep = qc::Sweep::parse(sweep_text);
            const auto rows = qc::run_convergence(cfg, sweep, maturity);
            const fs::path path = report_path.empty() ? out / ("convergence_" + sweep.name() + ".csv")
                                                      : fs::path(report_path);
            if (path.has_parent_path()) fs::create_directories(path.parent_path());
            std::ofstream f(path, std::ios::binary | std::ios::trunc);
            if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
            qc::write_convergence_csv(f, rows);
            qc::write_convergence_csv(std::cout, rows);
            report({path});
        }
    } catch (const qc::ValidationError& e) {
        for (const auto& v : e.violations()) std::cerr << "error: " << v << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
