#include "quantcredit/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "quantcredit/errors.hpp"

namespace quantcredit {

void ObservationPath::validate() const {
    if (values.empty()) throw DomainError("observation path is empty");
    for (std::size_t k = 0; k < values.size(); ++k)
        if (!(values[k] > 0.0) || !std::isfinite(values[k]))
            throw DomainError("observation " + std::to_string(k) + " must be a positive price");
}

double FilterDistribution::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) m += weights[i] * points[i];
    return m;
}

namespace {

struct LogNormalStep {
    double mean_offset;  // m_k - log y_prev - slope * v_cur
    double slope;        // nu / sigma, coefficient of v_cur
    double log_sd;
    double inv_two_var;
};

// Parameters of log S_k given (v_prev, y_prev, v_cur), with everything that
// does not depend on v_cur folded in.
LogNormalStep step_law(double v_prev, const FirmValueModel& fv, const ObservationModel& obs,
                       double t_prev, double dt) {
    if (!(dt > 0.0)) throw DomainError("likelihood requires dt > 0");
    const double nu = obs.nu(t_prev);
    const double delta = obs.delta(t_prev);
    if (!(delta > 0.0)) throw DomainError("likelihood requires delta(t) > 0");
    const double ito = obs.psi - 0.5 * (nu * nu + delta * delta);
    double var = delta * delta * dt;
    LogNormalStep law{};
    if (v_prev > 0.0) {
        const auto c = fv.coefficients(t_prev, v_prev);
        law.slope = nu / c.vol;
        law.mean_offset = (ito - nu * c.drift / c.vol) * dt - law.slope * v_prev;
    } else {
        // Absorbed firm value: V no longer reveals W, so both noises enter S.
        law.slope = 0.0;
        law.mean_offset = ito * dt;
        var = (nu * nu + delta * delta) * dt;
    }
    law.log_sd = 0.5 * std::log(var);
    law.inv_two_var = 0.5 / var;
    return law;
}

inline double eval_log_density(const LogNormalStep& law, double log_y_prev, double v_cur,
                               double log_y_cur) noexcept {
    static const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
    const double m = log_y_prev + law.mean_offset + law.slope * v_cur;
    const double z = log_y_cur - m;
    return -law.log_sd - log_y_cur - half_log_two_pi - z * z * law.inv_two_var;
}

}  // namespace

double log_likelihood(double v_prev, double y_prev, double v_cur, double y_cur,
                      const FirmValueModel& fv, const ObservationModel& obs, double t_prev,
                      double dt) {
    if (!(y_cur > 0.0) || !(y_prev > 0.0)) throw DomainError("likelihood requires positive prices");
    const auto law = step_law(v_prev, fv, obs, t_prev, dt);
    return eval_log_density(law, std::log(y_prev), v_cur, std::log(y_cur));
}

double likelihood(double v_prev, double y_prev, double v_cur, double y_cur,
                  const FirmValueModel& fv, const ObservationModel& obs, double t_prev, double dt) {
    return std::exp(log_likelihood(v_prev, y_prev, v_cur, y_cur, fv, obs, t_prev, dt));
}

FilterDistribution filter_init(const GridSequence& sequence) {
    if (sequence.grids.empty()) throw DimensionMismatch("grid sequence is empty");
    const auto& g0 = sequence.grids.front();
    if (g0.size() != 1) throw DomainError("initial grid must be a single point (N_0 = 1)");
    FilterDistribution f;
    f.step = 0;
    f.points = g0.points;
    f.weights = {1.0};
    f.log_evidence = 0.0;
    return f;
}

FilterDistribution filter_step_with(const FilterDistribution& state,
                                    const TransitionMatrix& transition,
                                    std::span<const double> next_points,
                                    const LogLikelihoodFn& log_g) {
    const std::size_t rows = state.weights.size();
    const std::size_t cols = next_points.size();
    if (transition.rows != rows || transition.cols != cols)
        throw DimensionMismatch("transition matrix does not match the filter and next grid");

    // Shift by the largest contributing log-likelihood so the exponentials do
    // not underflow on long observation paths.
    std::vector<double> logs(rows * cols, -std::numeric_limits<double>::infinity());
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows; ++i) {
        if (state.weights[i] <= 0.0) continue;
        for (std::size_t j = 0; j < cols; ++j) {
            if (transition(i, j) <= 0.0) continue;
            const double l = log_g(i, j);
            logs[i * cols + j] = l;
            if (l > shift) shift = l;
        }
    }
    FilterDistribution next;
    next.step = state.step + 1;
    next.points.assign(next_points.begin(), next_points.end());
    next.weights.assign(cols, 0.0);
    if (!std::isfinite(shift))
        throw TotalMassZero(next.step, "filter step " + std::to_string(next.step) +
                                           ": every unnormalized weight vanished");

    for (std::size_t i = 0; i < rows; ++i) {
        const double wi = state.weights[i];
        if (wi <= 0.0) continue;
        for (std::size_t j = 0; j < cols; ++j) {
            const double l = logs[i * cols + j];
            if (l == -std::numeric_limits<double>::infinity()) continue;
            next.weights[j] += wi * transition(i, j) * std::exp(l - shift);
        }
    }
    double total = 0.0;
    for (double w : next.weights) total += w;
    if (!(total > 0.0) || !std::isfinite(total))
        throw TotalMassZero(next.step, "filter step " + std::to_string(next.step) +
                                           ": every unnormalized weight vanished");
    for (double& w : next.weights) w /= total;
    next.log_evidence = state.log_evidence + shift + std::log(total);
    return next;
}

FilterDistribution filter_step(const FilterDistribution& state, std::size_t k, double y_prev,
                               double y_cur, const GridSequence& sequence,
                               std::span<const TransitionMatrix> transitions,
                               const FirmValueModel& fv, const ObservationModel& obs,
                               const TimeGrid& grid) {
    if (k == 0 || k > grid.steps() || k >= sequence.grids.size() || k > transitions.size())
        throw DimensionMismatch("filter step index out of range");
    if (state.step != k - 1) throw DimensionMismatch("filter state is not aligned with step k - 1");
    if (!(y_cur > 0.0) || !(y_prev > 0.0)) throw DomainError("observations must be positive");

    const auto& prev = sequence.grids[k - 1].points;
    const auto& cur = sequence.grids[k].points;
    const double t_prev = grid[k - 1];
    const double dt = grid.dt(k);
    std::vector<LogNormalStep> laws;
    laws.reserve(prev.size());
    for (double v : prev) laws.push_back(step_law(v, fv, obs, t_prev, dt));
    const double log_y_prev = std::log(y_prev);
    const double log_y_cur = std::log(y_cur);

    auto out = filter_step_with(state, transitions[k - 1], cur, [&](std::size_t i, std::size_t j) {
        return eval_log_density(laws[i], log_y_prev, cur[j], log_y_cur);
    });
    out.step = k;
    return out;
}

FilterDistribution run_filter(const ObservationPath& path, const GridSequence& sequence,
                              std::span<const TransitionMatrix> transitions,
                              const FirmValueModel& fv, const ObservationModel& obs,
                              const TimeGrid& grid,
                              const std::function<void(const FilterDistribution&)>& on_step) {
    path.validate();
    const std::size_t n = grid.steps();
    if (path.values.size() != n + 1)
        throw DimensionMismatch("observation path has " + std::to_string(path.values.size()) +
                                " values, expected " + std::to_string(n + 1));
    if (sequence.grids.size() != n + 1 || transitions.size() != n)
        throw DimensionMismatch("grid sequence / transitions do not match the time grid");
    for (std::size_t k = 0; k <= n && k < sequence.times.size(); ++k)
        if (std::abs(sequence.times[k] - grid[k]) > 1e-12 * std::max(1.0, grid.horizon()))
            throw DimensionMismatch("grid sequence was built on a different time grid");

    auto state = filter_init(sequence);
    if (on_step) on_step(state);
    for (std::size_t k = 1; k <= n; ++k) {
        state = filter_step(state, k, path.values[k - 1], path.values[k], sequence, transitions, fv,
                            obs, grid);
        if (on_step) on_step(state);
    }
    return state;
}

void write_filter_csv(std::ostream& out, const FilterDistribution& filter) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "# step=%zu\n# log_evidence=%.17g\n", filter.step,
                  filter.log_evidence);
    out << buf << "grid_point,weight\n";
    for (std::size_t i = 0; i < filter.points.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", filter.points[i], filter.weights[i]);
        out << buf;
    }
}

FilterDistribution read_filter_csv(std::istream& in) {
    FilterDistribution f;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# step=", 0) == 0) {
            f.step = std::stoul(line.substr(7));
        } else if (line.rfind("# log_evidence=", 0) == 0) {
            f.log_evidence = std::stod(line.substr(15));
        } else if (line[0] == '#') {
            continue;
        } else if (!header) {
            if (line != "grid_point,weight") throw std::runtime_error("filter csv: bad header");
            header = true;
        } else {
            const auto comma = line.find(',');
            if (comma == std::string::npos) throw std::runtime_error("filter csv: malformed row");
            f.points.push_back(std::stod(line.substr(0, comma)));
            f.weights.push_back(std::stod(line.substr(comma + 1)));
        }
    }
    if (!header) throw std::runtime_error("filter csv: missing header");
    return f;
}

}  // namespace quantcredit
