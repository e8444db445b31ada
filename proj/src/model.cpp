#include "quantcredit/model.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "quantcredit/errors.hpp"

namespace quantcredit {

namespace {

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

FirmValueModel FirmValueModel::gbm(double mu, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma))
        throw DomainError("GBM requires finite mu and sigma > 0");
    return FirmValueModel(GbmDynamics{mu, sigma});
}

FirmValueModel FirmValueModel::cev(double mu, double gamma, double beta) {
    if (!(gamma > 0.0) || !std::isfinite(mu) || !std::isfinite(gamma) || !std::isfinite(beta))
        throw DomainError("CEV requires finite mu, beta and gamma > 0");
    return FirmValueModel(CevDynamics{mu, gamma, beta});
}

Coefficients FirmValueModel::coefficients(double /*t*/, double v) const {
    if (!(v > 0.0)) throw DomainError("firm value must be positive (absorbed at or below 0)");
    return visit([v](const auto& d) { return Coefficients{d.drift(v), d.vol(v)}; });
}

std::string FirmValueModel::describe() const {
    if (const auto* g = as_gbm()) return "gbm(mu=" + fmt17(g->mu) + ",sigma=" + fmt17(g->sigma) + ")";
    const auto* c = as_cev();
    return "cev(mu=" + fmt17(c->mu) + ",gamma=" + fmt17(c->gamma) + ",beta=" + fmt17(c->beta) + ")";
}

TimeFunction TimeFunction::constant(double value) {
    TimeFunction f;
    f.values_ = {value};
    return f;
}

TimeFunction TimeFunction::piecewise(std::vector<double> knots, std::vector<double> values) {
    if (knots.empty() || knots.size() != values.size())
        throw DomainError("piecewise function needs matching, nonempty knots and values");
    if (knots.front() != 0.0) throw DomainError("piecewise function must start at t = 0");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i] > knots[i - 1])) throw DomainError("piecewise knots must be strictly increasing");
    TimeFunction f;
    f.knots_ = std::move(knots);
    f.values_ = std::move(values);
    return f;
}

double TimeFunction::operator()(double t) const noexcept {
    if (values_.size() == 1) return values_.front();
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    std::size_t i = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
    return values_[i];
}

double TimeFunction::min_on(double t0, double t1) const noexcept {
    double m = (*this)(t0);
    for (std::size_t i = 0; i < knots_.size(); ++i)
        if (knots_[i] > t0 && knots_[i] <= t1) m = std::min(m, values_[i]);
    return m;
}

double TimeFunction::max_on(double t0, double t1) const noexcept {
    double m = (*this)(t0);
    for (std::size_t i = 0; i < knots_.size(); ++i)
        if (knots_[i] > t0 && knots_[i] <= t1) m = std::max(m, values_[i]);
    return m;
}

std::string TimeFunction::describe() const {
    if (is_constant()) return fmt17(values_.front());
    std::string out = "table(";
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        if (i) out += ",";
        out += fmt17(knots_[i]) + ":" + fmt17(values_[i]);
    }
    return out + ")";
}

void ObservationModel::validate(double horizon) const {
    std::vector<std::string> errs;
    if (!std::isfinite(psi)) errs.push_back("observation.psi: must be finite");
    if (!(delta.min_on(0.0, horizon) > 0.0))
        errs.push_back("observation.delta: must be strictly positive on [0, s]");
    for (double v : nu.values())
        if (!std::isfinite(v)) errs.push_back("observation.nu: must be finite");
    for (double v : delta.values())
        if (!std::isfinite(v)) errs.push_back("observation.delta: must be finite");
    if (!errs.empty()) throw ValidationError(std::move(errs));
}

std::string ObservationModel::describe() const {
    return "obs(psi=" + fmt17(psi) + ",nu=" + nu.describe() + ",delta=" + delta.describe() + ")";
}

std::vector<std::string> MarketScenario::violations() const {
    std::vector<std::string> errs;
    if (!(v0 > 0.0)) errs.push_back("scenario.v0: must be > 0");
    if (!(s0 > 0.0)) errs.push_back("scenario.s0: must be > 0");
    if (!(barrier > 0.0 && barrier < v0)) errs.push_back("scenario.barrier: must satisfy 0 < a < v0");
    if (!(obs_horizon > 0.0)) errs.push_back("scenario.s: must be > 0");
    if (maturities.empty()) {
        errs.push_back("scenario.maturities: must be nonempty");
    } else {
        for (std::size_t i = 0; i < maturities.size(); ++i) {
            if (!(maturities[i] > obs_horizon)) {
                errs.push_back("scenario.maturities: every maturity must exceed s");
                break;
            }
            if (i > 0 && !(maturities[i] > maturities[i - 1])) {
                errs.push_back("scenario.maturities: must be strictly increasing");
                break;
            }
        }
    }
    return errs;
}

void MarketScenario::validate() const {
    auto errs = violations();
    if (!errs.empty()) throw ValidationError(std::move(errs));
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t n) {
    if (n == 0 || !(horizon > 0.0)) throw DomainError("uniform grid needs n >= 1 and horizon > 0");
    std::vector<double> t(n + 1);
    for (std::size_t k = 0; k <= n; ++k) t[k] = horizon * static_cast<double>(k) / static_cast<double>(n);
    t[n] = horizon;
    return TimeGrid(std::move(t));
}

TimeGrid::TimeGrid(std::vector<double> instants) : instants_(std::move(instants)) {
    if (instants_.size() < 2) throw DomainError("time grid needs at least one step");
    if (instants_.front() != 0.0) throw DomainError("time grid must start at 0");
    for (std::size_t k = 1; k < instants_.size(); ++k)
        if (!(instants_[k] > instants_[k - 1])) throw DomainError("time grid must be strictly increasing");
}

namespace {

template <class Dyn>
void euler_path_impl(const Dyn& d, double v0, const TimeGrid& grid, Substream& rng,
                     std::span<double> out) {
    double v = v0;
    out[0] = v;
    bool frozen = false;
    for (std::size_t k = 1; k <= grid.steps(); ++k) {
        const double dt = grid.dt(k);
        const double dw = std::sqrt(dt) * rng.normal();
        if (!frozen) {
            v += d.drift(v) * dt + d.vol(v) * dw;
            frozen = !(v > 0.0);
        }
        out[k] = v;
    }
}

}  // namespace

void euler_firm_path(const FirmValueModel& fv, double v0, const TimeGrid& grid, Substream& rng,
                     std::span<double> out) {
    if (out.size() != grid.steps() + 1) throw DimensionMismatch("path buffer size must be steps + 1");
    fv.visit([&](const auto& d) { euler_path_impl(d, v0, grid, rng, out); });
}

PathSample simulate_joint_path(const FirmValueModel& fv, const ObservationModel& obs,
                               const MarketScenario& scn, const TimeGrid& grid, std::uint64_t seed,
                               std::uint64_t index) {
    if (!(scn.v0 > 0.0) || !(scn.s0 > 0.0)) throw DomainError("initial values must be positive");
    const std::size_t n = grid.steps();
    PathSample out;
    out.seed = seed;
    out.index = index;
    out.v.resize(n + 1);
    out.s.resize(n + 1);
    Substream rng(seed, "model", "joint-path", index);

    fv.visit([&](const auto& d) {
        double v = scn.v0;
        double log_s = std::log(scn.s0);
        bool frozen = false;
        out.v[0] = v;
        out.s[0] = scn.s0;
        for (std::size_t k = 1; k <= n; ++k) {
            const double t = grid[k - 1];
            const double dt = grid.dt(k);
            const double sq = std::sqrt(dt);
            const double dw = sq * rng.normal();
            const double dw_bar = sq * rng.normal();
            const double nu = obs.nu(t);
            const double delta = obs.delta(t);
            log_s += (obs.psi - 0.5 * (nu * nu + delta * delta)) * dt + nu * dw + delta * dw_bar;
            if (!frozen) {
                v += d.drift(v) * dt + d.vol(v) * dw;
                frozen = !(v > 0.0);
            }
            out.v[k] = v;
            out.s[k] = std::exp(log_s);
        }
    });
    return out;
}

double survival_gbm_closed(double x, double a, double mu, double sigma, double dt) {
    if (!(a > 0.0)) throw DomainError("barrier must be positive");
    if (!(sigma > 0.0) || !(dt > 0.0)) throw DomainError("sigma and dt must be positive");
    if (x <= a) return 0.0;
    const double drift = mu - 0.5 * sigma * sigma;
    const double sd = sigma * std::sqrt(dt);
    const double h1 = (std::log(x / a) + drift * dt) / sd;
    const double h2 = (std::log(a / x) + drift * dt) / sd;
    // Reflection principle for Brownian motion with drift on log V.
    const double reflected = std::pow(a / x, 2.0 * drift / (sigma * sigma)) * norm_cdf(h2);
    return std::clamp(norm_cdf(h1) - reflected, 0.0, 1.0);
}

double correlation_bs(double t, double sigma, double delta) {
    if (!(t > 0.0)) throw DomainError("correlation requires t > 0");
    if (!(sigma > 0.0) || delta < 0.0) throw DomainError("correlation requires sigma > 0, delta >= 0");
    return std::sqrt(std::expm1(sigma * sigma * t) / std::expm1((sigma * sigma + delta * delta) * t));
}

}  // namespace quantcredit
