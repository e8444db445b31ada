#include "quantcredit/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "quantcredit/errors.hpp"
#include "quantcredit/random.hpp"
#include "quantcredit/svg.hpp"

namespace quantcredit {

namespace fs = std::filesystem;

namespace {

std::string g17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class Fn>
std::string render(Fn&& fn) {
    std::ostringstream ss;
    fn(ss);
    return ss.str();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    return cells;
}

// Plots clip infinite or huge spreads here (in basis points).
constexpr double kSpreadCeilingBp = 2000.0;

}  // namespace

std::string ObservationSource::describe() const {
    if (kind == Kind::simulate) return "simulate:" + std::to_string(index);
    return "file:" + file.filename().string();
}

GridCache build_quantization(const ScenarioConfig& cfg) {
    const auto fv = cfg.firm_model();
    const auto grid = cfg.time_grid();
    const auto& num = cfg.numerics;
    GridCache cache;
    cache.model_hash = cfg.quantization_hash();
    cache.sequence = build_grid_sequence(fv, cfg.scenario, grid, num.sizes, num.quantizer_paths,
                                         num.lloyd_iters, cfg.seed, num.workers);
    cache.transitions = estimate_transitions(cache.sequence, fv, cfg.scenario, grid,
                                             num.transition_paths, cfg.seed, num.workers);
    return cache;
}

Observations observe(const ScenarioConfig& cfg, const ObservationSource& source) {
    const auto grid = cfg.time_grid();
    if (source.kind == ObservationSource::Kind::file) {
        std::ifstream in(source.file, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read observation file '" + source.file.string() + "'");
        auto obs = read_observation_csv(in, grid);
        if (std::abs(obs.prices.values.front() - cfg.scenario.s0) > 1e-9 * std::max(1.0, cfg.scenario.s0))
            throw ValidationError({"observations: first price must equal scenario.s0"});
        return obs;
    }
    const auto path =
        simulate_joint_path(cfg.firm_model(), cfg.observation, cfg.scenario, grid, cfg.seed, source.index);
    Observations obs;
    obs.times = grid.instants();
    obs.prices.values = path.s;
    obs.hidden = path.v;
    return obs;
}

void write_observation_csv(std::ostream& out, const Observations& obs) {
    out << "time,price\n";
    for (std::size_t k = 0; k < obs.times.size(); ++k)
        out << g17(obs.times[k]) << ',' << g17(obs.prices.values[k]) << '\n';
}

Observations read_observation_csv(std::istream& in, const TimeGrid& grid) {
    Observations obs;
    std::vector<std::string> errors;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            if (line == "time,price") continue;
        }
        const auto cells = split_csv(line);
        try {
            if (cells.size() != 2) throw std::invalid_argument("");
            std::size_t used = 0;
            const double t = std::stod(cells[0], &used);
            if (used != cells[0].size()) throw std::invalid_argument("");
            const double y = std::stod(cells[1], &used);
            if (used != cells[1].size()) throw std::invalid_argument("");
            obs.times.push_back(t);
            obs.prices.values.push_back(y);
        } catch (const std::exception&) {
            errors.push_back("observations line " + std::to_string(line_no) + ": expected 'time,price'");
        }
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));
    if (obs.times.size() != grid.steps() + 1)
        throw ValidationError({"observations: expected " + std::to_string(grid.steps() + 1) +
                               " rows on the filter grid, got " + std::to_string(obs.times.size())});
    for (std::size_t k = 0; k < obs.times.size(); ++k) {
        if (std::abs(obs.times[k] - grid[k]) > 1e-9)
            errors.push_back("observations: row " + std::to_string(k) + " time " + g17(obs.times[k]) +
                             " does not match grid time " + g17(grid[k]));
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));
    try {
        obs.prices.validate();
    } catch (const std::exception& e) {
        throw ValidationError({std::string("observations: ") + e.what()});
    }
    return obs;
}

GridCache load_or_build_quantization(const ScenarioConfig& cfg, const fs::path& out) {
    const fs::path path = out / artifact::grid;
    if (fs::exists(path)) {
        try {
            auto cached = load_grid_cache(path);
            if (cached.model_hash == cfg.quantization_hash()) return cached;
        } catch (const std::exception&) {
            // Unreadable or stale cache: rebuild below.
        }
    }
    auto cache = build_quantization(cfg);
    fs::create_directories(out);
    save_grid_cache(path, cache);
    return cache;
}

PipelineResult run_filter_stage(const ScenarioConfig& cfg, const ObservationSource& source,
                                const fs::path& out) {
    fs::create_directories(out);
    PipelineResult r;
    r.cache = load_or_build_quantization(cfg, out);
    r.artifacts.push_back(out / artifact::grid);

    r.observations = observe(cfg, source);
    write_text(out / artifact::observations,
               render([&](std::ostream& o) { write_observation_csv(o, r.observations); }));
    r.artifacts.push_back(out / artifact::observations);

    r.filter = run_filter(r.observations.prices, r.cache.sequence, r.cache.transitions,
                          cfg.firm_model(), cfg.observation, cfg.time_grid());
    write_text(out / artifact::filter, render([&](std::ostream& o) { write_filter_csv(o, r.filter); }));
    r.artifacts.push_back(out / artifact::filter);

    std::vector<Series> series{{"observed S", r.observations.times, r.observations.prices.values, "#1f77b4"}};
    if (!r.observations.hidden.empty())
        series.push_back({"hidden V", r.observations.times, r.observations.hidden, "#7f7f7f"});
    series.push_back({"barrier", {0.0, cfg.scenario.obs_horizon},
                      {cfg.scenario.barrier, cfg.scenario.barrier}, "#d62728"});
    write_text(out / artifact::observed_plot,
               render_line_chart("Observed path (" + source.describe() + ")", "time", "value", series));
    r.artifacts.push_back(out / artifact::observed_plot);
    return r;
}

SpreadCurve run_curve_stage(const ScenarioConfig& cfg, const FilterDistribution& filter,
                            const std::string& observation_tag, const fs::path& out) {
    fs::create_directories(out);
    const auto& num = cfg.numerics;
    auto curve = spread_curve(filter, cfg.firm_model(), cfg.scenario, num.euler_schedule, num.mc_trials,
                              cfg.seed, num.weight_floor, num.workers);
    const std::vector<std::string> comments = {"config_hash=" + cfg.hash(),
                                               "seed=" + std::to_string(cfg.seed),
                                               "observation=" + observation_tag};
    write_text(out / artifact::spreads, render([&](std::ostream& o) { write_spread_csv(o, curve, comments); }));

    Series s{"spread (bp)", {}, {}, "#1f77b4"};
    for (const auto& e : curve.entries) {
        s.x.push_back(e.maturity);
        s.y.push_back(1e4 * e.spread);
    }
    write_text(out / artifact::curve_plot,
               render_line_chart("Credit spread curve (" + observation_tag + ")", "maturity",
                                 "spread (bp)", {s}, kSpreadCeilingBp));
    return curve;
}

PipelineResult run_pipeline(const ScenarioConfig& cfg, const ObservationSource& source, const fs::path& out) {
    auto r = run_filter_stage(cfg, source, out);
    r.curve = run_curve_stage(cfg, r.filter, source.describe(), out);
    r.artifacts.push_back(out / artifact::spreads);
    r.artifacts.push_back(out / artifact::curve_plot);

    nlohmann::ordered_json m;
    m["tool"] = "quantcredit";
    m["version"] = QUANTCREDIT_VERSION;
    m["compiler"] = __VERSION__;
    m["config_hash"] = cfg.hash();
    m["quantization_hash"] = cfg.quantization_hash();
    m["seed"] = cfg.seed;
    m["observation"] = source.describe();
    m["grid_cache_version"] = kGridCacheVersion;
    auto files = nlohmann::ordered_json::array();
    for (const auto& p : r.artifacts) {
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(read_text(p))));
        files.push_back({{"name", p.filename().string()}, {"fnv1a", hex}});
    }
    m["artifacts"] = files;
    write_text(out / artifact::manifest, m.dump(2) + "\n");
    r.artifacts.push_back(out / artifact::manifest);
    return r;
}

Sweep Sweep::parse(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ValidationError({"sweep: expected 'M=...', 'N=...' or 'grid=...'"});
    const std::string key = text.substr(0, eq);
    Sweep s;
    if (key == "M") s.kind = SweepKind::trials;
    else if (key == "N") s.kind = SweepKind::euler_steps;
    else if (key == "grid") s.kind = SweepKind::grid_size;
    else throw ValidationError({"sweep: unknown sweep '" + key + "'"});
    for (const auto& cell : split_csv(text.substr(eq + 1))) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != cell.size() || !(v >= 1.0) || v != std::floor(v))
            throw ValidationError({"sweep: '" + cell + "' is not a positive integer"});
        s.values.push_back(static_cast<std::size_t>(v));
    }
    if (s.values.empty()) throw ValidationError({"sweep: no values given"});
    return s;
}

std::string Sweep::name() const {
    switch (kind) {
        case SweepKind::trials: return "M";
        case SweepKind::euler_steps: return "N";
        case SweepKind::grid_size: return "grid";
    }
    return "?";
}

std::vector<ConvergenceRow> run_convergence(const ScenarioConfig& cfg, const Sweep& sweep, double maturity) {
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };
    const auto fv = cfg.firm_model();
    const auto& scn = cfg.scenario;
    const auto& num = cfg.numerics;
    const double s = scn.obs_horizon;
    const double t = maturity > 0.0 ? maturity : s + 1.0;
    if (!(t > s)) throw ValidationError({"maturity: must exceed scenario.s"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double reference =
        fv.is_gbm() ? survival_gbm_closed(scn.v0, scn.barrier, fv.as_gbm()->mu, fv.as_gbm()->sigma, t - s) : nan;

    std::vector<ConvergenceRow> rows;
    switch (sweep.kind) {
        case SweepKind::trials: {
            const std::size_t steps = num.euler_schedule.steps_for(t);
            for (std::size_t m : sweep.values) {
                const auto t0 = clock::now();
                const auto e = survival_full_mc(fv, scn.v0, s, t, scn.barrier, steps, m, cfg.seed, num.workers);
                rows.push_back({sweep.name(), m, e.value, e.std_error, reference,
                                std::abs(e.value - reference), seconds(t0, clock::now())});
            }
            break;
        }
        case SweepKind::euler_steps: {
            std::vector<MaturityPlan> plans;
            for (std::size_t n : sweep.values) {
                if (n < 2) throw ValidationError({"sweep: N values must be >= 2"});
                plans.push_back({t, n});
            }
            const double start[] = {scn.v0};
            const double weight[] = {1.0};
            const auto t0 = clock::now();
            const auto mix = survival_mixture(start, weight, fv, s, scn.barrier, plans,
                                              MonteCarloSettings{num.mc_trials, cfg.seed, num.workers, 0.0});
            const double wall = seconds(t0, clock::now());
            for (std::size_t i = 0; i < plans.size(); ++i) {
                const auto& e = mix.estimates[i];
                rows.push_back({sweep.name(), plans[i].steps, e.value, e.std_error, reference,
                                std::abs(e.value - reference), wall});
            }
            break;
        }
        case SweepKind::grid_size: {
            const auto grid = cfg.time_grid();
            for (std::size_t g : sweep.values) {
                std::vector<std::size_t> sizes(num.n + 1, g);
                sizes[0] = 1;
                const std::size_t paths = std::max(num.quantizer_paths, 100 * g);
                const auto t0 = clock::now();
                const auto seq = build_grid_sequence(fv, scn, grid, sizes, paths, num.lloyd_iters, cfg.seed,
                                                     num.workers);
                rows.push_back({sweep.name(), g, seq.grids.back().distortion, 0.0, nan, nan,
                                seconds(t0, clock::now())});
            }
            break;
        }
    }
    return rows;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
    out << "sweep,value,estimate,stderr,reference,abs_error,wall_seconds\n";
    auto cell = [](double x) { return std::isnan(x) ? std::string("nan") : g17(x); };
    for (const auto& r : rows) {
        char wall[32];
        std::snprintf(wall, sizeof wall, "%.3f", r.wall_seconds);
        out << r.sweep << ',' << r.value << ',' << cell(r.estimate) << ',' << cell(r.std_error) << ','
            << cell(r.reference) << ',' << cell(r.abs_error) << ',' << wall << '\n';
    }
}

}  // namespace quantcredit
