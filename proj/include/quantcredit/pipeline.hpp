#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "quantcredit/config.hpp"
#include "quantcredit/filtering.hpp"
#include "quantcredit/grid_cache.hpp"
#include "quantcredit/spreads.hpp"

namespace quantcredit {

/// Where the observed price path comes from: a simulated joint path (the
/// index selects the substream), or a "time,price" CSV on the filter grid.
struct ObservationSource {
    enum class Kind { simulate, file };
    Kind kind = Kind::simulate;
    std::uint64_t index = 0;
    std::filesystem::path file;

    static ObservationSource simulated(std::uint64_t index = 0) { return {Kind::simulate, index, {}}; }
    static ObservationSource from_file(std::filesystem::path p) { return {Kind::file, 0, std::move(p)}; }
    std::string describe() const;
};

struct Observations {
    std::vector<double> times;
    ObservationPath prices;
    std::vector<double> hidden;  // simulated V path; empty for file input
};

/// Grids and transitions for a config, keyed by its quantization hash.
GridCache build_quantization(const ScenarioConfig& cfg);

Observations observe(const ScenarioConfig& cfg, const ObservationSource& source);

void write_observation_csv(std::ostream& out, const Observations& obs);
/// Reads "time,price" rows. Times must coincide with `grid` (within 1e-9);
/// anything else is an alignment error, never resampled.
Observations read_observation_csv(std::istream& in, const TimeGrid& grid);

struct PipelineResult {
    GridCache cache;
    Observations observations;
    FilterDistribution filter;
    SpreadCurve curve;
    std::vector<std::filesystem::path> artifacts;
};

/// Artifact names inside the output directory.
namespace artifact {
inline constexpr const char* grid = "grid.txt";
inline constexpr const char* observations = "observations.csv";
inline constexpr const char* filter = "filter.csv";
inline constexpr const char* spreads = "spreads.csv";
inline constexpr const char* observed_plot = "observed_path.svg";
inline constexpr const char* curve_plot = "spread_curve.svg";
inline constexpr const char* manifest = "manifest.json";
}  // namespace artifact

/// Loads `out/grid.txt` when its hash matches the config, otherwise rebuilds
/// and saves it.
GridCache load_or_build_quantization(const ScenarioConfig& cfg, const std::filesystem::path& out);

/// Grid, observations and filter; writes grid.txt, observations.csv, filter.csv
/// and observed_path.svg.
PipelineResult run_filter_stage(const ScenarioConfig& cfg, const ObservationSource& source,
                                const std::filesystem::path& out);

/// Spread curve from a filter; writes spreads.csv and spread_curve.svg.
SpreadCurve run_curve_stage(const ScenarioConfig& cfg, const FilterDistribution& filter,
                            const std::string& observation_tag, const std::filesystem::path& out);

/// Full run: every artifact plus manifest.json. Identical inputs give
/// byte-identical files.
PipelineResult run_pipeline(const ScenarioConfig& cfg, const ObservationSource& source,
                            const std::filesystem::path& out);

enum class SweepKind { trials, euler_steps, grid_size };

struct Sweep {
    SweepKind kind = SweepKind::trials;
    std::vector<std::size_t> values;
    /// "M=1000,4000", "N=25,50,100" or "grid=15,30,60".
    static Sweep parse(const std::string& text);
    std::string name() const;
};

struct ConvergenceRow {
    std::string sweep;
    std::size_t value = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    double reference = 0.0;  // NaN when there is none
    double abs_error = 0.0;
    double wall_seconds = 0.0;
};

/// M and N sweeps estimate P(inf_{[s,t]} V > a | V_s = v0) by bridge Monte
/// Carlo, t = maturity (default s + 1), against the closed form for GBM. The N
/// sweep runs all step counts on the same Brownian paths. The grid sweep
/// reports the RMS distortion of the step-n marginal quantizer.
std::vector<ConvergenceRow> run_convergence(const ScenarioConfig& cfg, const Sweep& sweep,
                                            double maturity = 0.0);

/// CSV "sweep,value,estimate,stderr,reference,abs_error,wall_seconds".
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);

}  // namespace quantcredit
