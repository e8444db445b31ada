#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "quantcredit/model.hpp"
#include "quantcredit/spreads.hpp"

namespace quantcredit {

struct FirmConfig {
    std::string model;  // "gbm" or "cev"
    double mu = 0.0;
    double sigma = 0.0;
    double gamma = 0.0;
    double beta = 0.0;

    FirmValueModel build() const;
};

struct NumericsConfig {
    std::size_t n = 50;
    std::vector<std::size_t> sizes;  // n + 1 entries, sizes[0] = 1
    std::size_t lloyd_iters = 80;
    std::size_t quantizer_paths = 100000;
    std::size_t transition_paths = 100000;
    EulerSchedule euler_schedule{{{3.0, 50}, {std::numeric_limits<double>::infinity(), 100}}};
    std::size_t mc_trials = 300000;
    double weight_floor = 1e-12;
    unsigned workers = 0;
};

struct ScenarioConfig {
    FirmConfig firm;
    ObservationModel observation;
    MarketScenario scenario;
    NumericsConfig numerics;
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    FirmValueModel firm_model() const { return firm.build(); }
    /// Uniform grid of numerics.n steps over [0, s].
    TimeGrid time_grid() const;

    /// Every field that affects numeric output, in a fixed order. Worker
    /// count and output directory are excluded.
    std::string canonical() const;
    /// 16 hex digits of FNV-1a over canonical().
    std::string hash() const;
    /// Hash of the inputs that determine the quantization grids.
    std::string quantization_hash() const;
};

/// Parses flat "section.key = value" lines with '#' comments. Throws
/// ValidationError listing every problem (parse errors carry "line N",
/// validation errors carry the field path).
///
/// Keys:
///   firm.model (gbm|cev), firm.mu, firm.sigma (gbm), firm.gamma, firm.beta (cev)
///   observation.psi, observation.nu, observation.delta
///       a constant, or a piecewise-constant table "0:0.1, 0.5:0.12"
///   scenario.v0, scenario.s0, scenario.barrier, scenario.s
///   scenario.maturities   comma list, or a range "start:step:end"
///   numerics.n, numerics.grid_size (N_k for k >= 1) or numerics.sizes (full list),
///   numerics.lloyd_iters, numerics.quantizer_paths, numerics.transition_paths,
///   numerics.euler_schedule "3.0:50, inf:100", numerics.mc_trials,
///   numerics.weight_floor, numerics.workers
///   run.seed, run.output_dir
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Expands "start:step:end" (inclusive, values rounded to 12 decimals) or a
/// comma-separated list.
std::vector<double> parse_maturities(std::string_view text);

}  // namespace quantcredit
