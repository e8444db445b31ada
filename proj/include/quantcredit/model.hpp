#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "quantcredit/random.hpp"

namespace quantcredit {

struct Coefficients {
    double drift;  // value per year
    double vol;    // value per sqrt-year
};

/// dV = mu V dt + sigma V dW
struct GbmDynamics {
    double mu;
    double sigma;

    double drift(double v) const noexcept { return mu * v; }
    double vol(double v) const noexcept { return sigma * v; }
};

/// dV = V (mu dt + gamma V^beta dW)
struct CevDynamics {
    double mu;
    double gamma;
    double beta;

    /// gamma * v^beta, the volatility of returns.
    double return_vol(double v) const noexcept {
        // beta is an integer in every configuration we ship; avoid pow there.
        if (beta == -2.0) return gamma / (v * v);
        if (beta == -1.0) return gamma / v;
        if (beta == 0.0) return gamma;
        return gamma * std::pow(v, beta);
    }
    double drift(double v) const noexcept { return mu * v; }
    double vol(double v) const noexcept { return v * return_vol(v); }
};

/// Hidden firm-value diffusion. Both variants are time-homogeneous; the time
/// argument of coefficients() is kept for the general contract.
class FirmValueModel {
public:
    static FirmValueModel gbm(double mu, double sigma);
    static FirmValueModel cev(double mu, double gamma, double beta);

    /// (b(t,v), sigma(t,v)). Throws DomainError for v <= 0, where both
    /// multiplicative models are absorbed.
    Coefficients coefficients(double t, double v) const;

    bool is_gbm() const noexcept { return std::holds_alternative<GbmDynamics>(dynamics_); }
    const GbmDynamics* as_gbm() const noexcept { return std::get_if<GbmDynamics>(&dynamics_); }
    const CevDynamics* as_cev() const noexcept { return std::get_if<CevDynamics>(&dynamics_); }

    /// Dispatches once to the concrete dynamics so hot loops are monomorphic.
    template <class Fn>
    decltype(auto) visit(Fn&& fn) const {
        return std::visit(std::forward<Fn>(fn), dynamics_);
    }

    /// Canonical text used for hashing and manifests.
    std::string describe() const;

private:
    explicit FirmValueModel(std::variant<GbmDynamics, CevDynamics> d) : dynamics_(d) {}
    std::variant<GbmDynamics, CevDynamics> dynamics_;
};

/// Deterministic function of time, piecewise constant and right-continuous:
/// value(t) = values[i] for knots[i] <= t < knots[i+1]. A single knot at 0 is a
/// constant.
class TimeFunction {
public:
    static TimeFunction constant(double value);
    static TimeFunction piecewise(std::vector<double> knots, std::vector<double> values);

    double operator()(double t) const noexcept;
    double min_on(double t0, double t1) const noexcept;
    double max_on(double t0, double t1) const noexcept;
    bool is_constant() const noexcept { return values_.size() == 1; }
    const std::vector<double>& knots() const noexcept { return knots_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::string describe() const;

private:
    std::vector<double> knots_{0.0};
    std::vector<double> values_{0.0};
};

/// dS = S [psi dt + nu(t) dW + delta(t) dWbar]. psi is constant in both
/// supported configurations.
struct ObservationModel {
    double psi = 0.0;
    TimeFunction nu = TimeFunction::constant(0.0);
    TimeFunction delta = TimeFunction::constant(0.0);

    /// Throws ValidationError if delta is not strictly positive on [0, horizon].
    void validate(double horizon) const;
    std::string describe() const;
};

struct MarketScenario {
    double v0 = 0.0;
    double s0 = 0.0;
    double barrier = 0.0;
    double obs_horizon = 0.0;
    std::vector<double> maturities;

    /// Every violated invariant, as "scenario.<field>: message".
    std::vector<std::string> violations() const;
    void validate() const;
};

class TimeGrid {
public:
    /// n equal steps over [0, horizon].
    static TimeGrid uniform(double horizon, std::size_t n);
    explicit TimeGrid(std::vector<double> instants);

    std::size_t steps() const noexcept { return instants_.size() - 1; }
    double operator[](std::size_t k) const noexcept { return instants_[k]; }
    double dt(std::size_t k) const noexcept { return instants_[k] - instants_[k - 1]; }
    double horizon() const noexcept { return instants_.back(); }
    const std::vector<double>& instants() const noexcept { return instants_; }

private:
    std::vector<double> instants_;
};

struct PathSample {
    std::vector<double> v;
    std::vector<double> s;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
};

/// Euler path of V on `grid`, written into `out` (size steps+1). The path is
/// frozen at its first nonpositive value.
void euler_firm_path(const FirmValueModel& fv, double v0, const TimeGrid& grid,
                     Substream& rng, std::span<double> out);

/// Joint (V, S) path: V by Euler, log S by the exact lognormal step driven by
/// the same W increments (loading nu) plus independent Wbar increments (loading
/// delta). Stream key: (seed, "model", "joint-path", index).
PathSample simulate_joint_path(const FirmValueModel& fv, const ObservationModel& obs,
                               const MarketScenario& scn, const TimeGrid& grid,
                               std::uint64_t seed, std::uint64_t index = 0);

/// Closed-form P(inf_{[s,t]} V > a | V_s = x) for GBM with dt = t - s.
double survival_gbm_closed(double x, double a, double mu, double sigma, double dt);

/// Correlation of (V_t, S_t) in the Black-Scholes observation setup.
double correlation_bs(double t, double sigma, double delta);

/// Standard normal CDF.
inline double norm_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace quantcredit
