#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "quantcredit/filtering.hpp"
#include "quantcredit/model.hpp"

namespace quantcredit {

struct SurvivalEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
    std::size_t euler_steps = 0;
    double start = 0.0;
    double end = 0.0;
};

/// One Euler subinterval with its endpoint values and the local volatility
/// frozen at the left endpoint.
struct BridgeInterval {
    double x;
    double y;
    double barrier;
    double local_vol;
    double dt;
};

/// Probability that the Brownian bridge from x to y over dt stays strictly
/// above the barrier: 0 if min(x, y) <= a, else 1 - exp(-2(x-a)(y-a)/(vol^2 dt)).
double bridge_survival_factor(const BridgeInterval& iv);

/// Uniform Euler grid of `steps` intervals over [s, maturity].
struct MaturityPlan {
    double maturity;
    std::size_t steps;
};

struct MonteCarloSettings {
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    /// Mixture components with weight at or below this are skipped.
    double weight_floor = 1e-12;
};

enum class Monitoring {
    /// Product of Brownian-bridge survival factors.
    bridge,
    /// Indicator that every Euler knot stays above the barrier.
    discrete,
};

struct MixtureSurvival {
    /// Mixture estimate per plan.
    std::vector<SurvivalEstimate> estimates;
    /// component_means[plan][i]: estimate for start value i alone (0 when skipped).
    std::vector<std::vector<double>> component_means;
    /// Components that were simulated (weight above the floor and start > a).
    std::vector<bool> active;
};

/// Core estimator. Trial j draws one Brownian path from stream
/// (seed, "survival", "trial", j) on the union of all plan grids; every start
/// value and every plan reuses that path (common random numbers). Per-trial
/// mixture values are reduced in fixed chunks, so the result does not depend
/// on the worker count.
MixtureSurvival survival_mixture(std::span<const double> starts, std::span<const double> weights,
                                 const FirmValueModel& fv, double s, double barrier,
                                 std::span<const MaturityPlan> plans,
                                 const MonteCarloSettings& mc,
                                 Monitoring monitoring = Monitoring::bridge);

/// Full-information survival P(inf_{[s,t]} V > a | V_s = v), bridge estimator.
SurvivalEstimate survival_full_mc(const FirmValueModel& fv, double v, double s, double t,
                                  double barrier, std::size_t steps, std::size_t trials,
                                  std::uint64_t seed, unsigned workers = 0);

/// Same paths as survival_full_mc, but only the Euler knots are monitored.
SurvivalEstimate survival_naive_mc(const FirmValueModel& fv, double v, double s, double t,
                                   double barrier, std::size_t steps, std::size_t trials,
                                   std::uint64_t seed, unsigned workers = 0);

/// Partial-information survival: the filter-weighted mixture of full-information
/// estimates over the grid points at time s.
SurvivalEstimate survival_partial(const FilterDistribution& filter, const FirmValueModel& fv,
                                  double s, double t, double barrier, std::size_t steps,
                                  std::size_t trials, std::uint64_t seed,
                                  double weight_floor = 1e-12, unsigned workers = 0);

}  // namespace quantcredit
