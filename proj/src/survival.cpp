#include "quantcredit/survival.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "quantcredit/errors.hpp"
#include "quantcredit/parallel.hpp"
#include "quantcredit/random.hpp"

namespace quantcredit {

namespace {

// Beyond this exponent 1 - exp(-x) rounds to exactly 1.0 in double precision.
constexpr double kNegligibleExponent = 40.0;

inline double bridge_factor(double x, double y, double a, double vol, double dt) noexcept {
    if (x <= a || y <= a) return 0.0;
    const double e = 2.0 * (x - a) * (y - a) / (vol * vol * dt);
    return e >= kNegligibleExponent ? 1.0 : -std::expm1(-e);
}

// Running (count, mean, M2) with the pairwise merge of Chan et al.
struct Moments {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    void merge(const Moments& o) noexcept {
        if (o.n == 0.0) return;
        if (n == 0.0) {
            *this = o;
            return;
        }
        const double total = n + o.n;
        const double d = o.mean - mean;
        mean += d * o.n / total;
        m2 += o.m2 + d * d * n * o.n / total;
        n = total;
    }
};

struct UnionGrid {
    std::vector<double> times;                   // s = times[0] < ... < max maturity
    std::vector<std::vector<std::size_t>> node;  // node[plan][k] -> index into times
};

UnionGrid build_union_grid(double s, std::span<const MaturityPlan> plans) {
    struct Node {
        double t;
        std::size_t plan;
        std::size_t k;
    };
    std::vector<Node> nodes;
    double t_max = s;
    for (std::size_t m = 0; m < plans.size(); ++m) {
        const auto& p = plans[m];
        t_max = std::max(t_max, p.maturity);
        for (std::size_t k = 0; k <= p.steps; ++k) {
            const double t = k == p.steps
                                 ? p.maturity
                                 : s + (p.maturity - s) * static_cast<double>(k) / static_cast<double>(p.steps);
            nodes.push_back({t, m, k});
        }
    }
    std::stable_sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.t < b.t; });

    UnionGrid g;
    g.node.resize(plans.size());
    for (std::size_t m = 0; m < plans.size(); ++m) g.node[m].resize(plans[m].steps + 1);
    const double tol = 1e-12 * std::max(1.0, std::abs(t_max));
    for (const auto& nd : nodes) {
        if (g.times.empty() || nd.t - g.times.back() > tol) g.times.push_back(nd.t);
        g.node[nd.plan][nd.k] = g.times.size() - 1;
    }
    return g;
}

template <class Dyn, Monitoring Mode>
double trial_survival(const Dyn& d, double v, double a, std::span<const double> dts,
                      std::span<const double> dws) noexcept {
    double p = 1.0;
    for (std::size_t k = 0; k < dts.size(); ++k) {
        const double dt = dts[k];
        const double vol = d.vol(v);
        const double next = v + d.drift(v) * dt + vol * dws[k];
        if (next <= a) return 0.0;
        if constexpr (Mode == Monitoring::bridge) {
            p *= bridge_factor(v, next, a, vol, dt);
            if (p == 0.0) return 0.0;
        }
        v = next;
    }
    return p;
}

template <class Dyn, Monitoring Mode>
MixtureSurvival run_mixture(const Dyn& dyn, std::span<const double> starts,
                            std::span<const double> weights, double s, double a,
                            std::span<const MaturityPlan> plans, const MonteCarloSettings& mc) {
    const std::size_t n_plans = plans.size();
    const std::size_t n_comp = starts.size();
    const UnionGrid grid = build_union_grid(s, plans);
    const std::size_t n_union = grid.times.size();

    std::vector<bool> active(n_comp, false);
    std::vector<std::size_t> active_idx;
    for (std::size_t i = 0; i < n_comp; ++i) {
        if (weights[i] > mc.weight_floor && starts[i] > a) {
            active[i] = true;
            active_idx.push_back(i);
        }
    }

    // Plan-local step sizes, taken from the union times so that plans sharing
    // knots also share increments exactly.
    std::vector<std::vector<double>> dts(n_plans);
    for (std::size_t m = 0; m < n_plans; ++m) {
        const auto& idx = grid.node[m];
        dts[m].resize(plans[m].steps);
        for (std::size_t k = 0; k < plans[m].steps; ++k)
            dts[m][k] = grid.times[idx[k + 1]] - grid.times[idx[k]];
    }

    // Fixed chunking by trial index: independent of the worker count.
    const std::size_t chunk = std::max<std::size_t>(256, (mc.trials + 255) / 256);
    const std::size_t n_chunks = chunk_count(mc.trials, chunk);
    struct ChunkResult {
        std::vector<Moments> moments;                 // [plan]
        std::vector<double> component_sums;           // [plan * n_comp + i]
    };
    std::vector<ChunkResult> results(n_chunks);

    for_each_chunk(mc.trials, chunk, mc.workers, [&](std::size_t c, std::size_t begin, std::size_t end) {
        auto& r = results[c];
        r.moments.assign(n_plans, Moments{});
        r.component_sums.assign(n_plans * n_comp, 0.0);
        if (active_idx.empty()) {
            for (std::size_t j = begin; j < end; ++j)
                for (auto& mo : r.moments) mo.add(0.0);
            return;
        }
        std::vector<double> w(n_union, 0.0);
        std::vector<std::vector<double>> dws(n_plans);
        for (std::size_t m = 0; m < n_plans; ++m) dws[m].resize(plans[m].steps);
        std::vector<double> mix(n_plans);

        for (std::size_t j = begin; j < end; ++j) {
            Substream rng(mc.seed, "survival", "trial", j);
            w[0] = 0.0;
            for (std::size_t u = 1; u < n_union; ++u)
                w[u] = w[u - 1] + std::sqrt(grid.times[u] - grid.times[u - 1]) * rng.normal();
            for (std::size_t m = 0; m < n_plans; ++m) {
                const auto& idx = grid.node[m];
                for (std::size_t k = 0; k < plans[m].steps; ++k) dws[m][k] = w[idx[k + 1]] - w[idx[k]];
            }
            std::fill(mix.begin(), mix.end(), 0.0);
            for (std::size_t i : active_idx) {
                for (std::size_t m = 0; m < n_plans; ++m) {
                    const double p = trial_survival<Dyn, Mode>(dyn, starts[i], a, dts[m], dws[m]);
                    mix[m] += weights[i] * p;
                    r.component_sums[m * n_comp + i] += p;
                }
            }
            for (std::size_t m = 0; m < n_plans; ++m) r.moments[m].add(mix[m]);
        }
    });

    MixtureSurvival out;
    out.active = active;
    out.estimates.resize(n_plans);
    out.component_means.assign(n_plans, std::vector<double>(n_comp, 0.0));
    std::vector<Moments> total(n_plans);
    for (const auto& r : results) {
        for (std::size_t m = 0; m < n_plans; ++m) {
            total[m].merge(r.moments[m]);
            for (std::size_t i = 0; i < n_comp; ++i)
                out.component_means[m][i] += r.component_sums[m * n_comp + i];
        }
    }
    const double trials = static_cast<double>(mc.trials);
    for (std::size_t m = 0; m < n_plans; ++m) {
        for (double& c : out.component_means[m]) c /= trials;
        auto& e = out.estimates[m];
        e.value = std::clamp(total[m].mean, 0.0, 1.0);
        e.std_error = mc.trials > 1 ? std::sqrt(total[m].m2 / (trials - 1.0) / trials) : 0.0;
        e.trials = mc.trials;
        e.euler_steps = plans[m].steps;
        e.start = s;
        e.end = plans[m].maturity;
    }
    return out;
}

void check_plans(double s, std::span<const MaturityPlan> plans) {
    if (plans.empty()) throw DomainError("at least one maturity is required");
    for (const auto& p : plans) {
        if (!(p.maturity > s)) throw DomainError("maturity must exceed the start time");
        if (p.steps == 0) throw DomainError("Euler step count must be positive");
    }
}

void check_full_mc_args(double s, double t, double a, std::size_t steps, std::size_t trials) {
    if (!(a > 0.0)) throw DomainError("barrier must be positive");
    if (!(t > s)) throw DomainError("survival requires t > s");
    if (steps < 2) throw DomainError("survival requires at least 2 Euler steps");
    if (trials < 100) throw DomainError("survival requires at least 100 trials");
}

SurvivalEstimate single(const FirmValueModel& fv, double v, double s, double t, double a,
                        std::size_t steps, std::size_t trials, std::uint64_t seed, unsigned workers,
                        Monitoring mode) {
    check_full_mc_args(s, t, a, steps, trials);
    const double start[] = {v};
    const double weight[] = {1.0};
    const MaturityPlan plan[] = {{t, steps}};
    MonteCarloSettings mc{trials, seed, workers, 0.0};
    return survival_mixture(start, weight, fv, s, a, plan, mc, mode).estimates.front();
}

}  // namespace

double bridge_survival_factor(const BridgeInterval& iv) {
    if (!(iv.dt > 0.0) || !(iv.local_vol > 0.0))
        throw DomainError("bridge interval needs dt > 0 and local vol > 0");
    return bridge_factor(iv.x, iv.y, iv.barrier, iv.local_vol, iv.dt);
}

MixtureSurvival survival_mixture(std::span<const double> starts, std::span<const double> weights,
                                 const FirmValueModel& fv, double s, double barrier,
                                 std::span<const MaturityPlan> plans, const MonteCarloSettings& mc,
                                 Monitoring monitoring) {
    if (starts.size() != weights.size()) throw DimensionMismatch("starts and weights differ in length");
    if (mc.trials == 0) throw DomainError("Monte Carlo needs at least one trial");
    check_plans(s, plans);
    return fv.visit([&](const auto& dyn) {
        if (monitoring == Monitoring::bridge)
            return run_mixture<std::decay_t<decltype(dyn)>, Monitoring::bridge>(dyn, starts, weights, s,
                                                                                barrier, plans, mc);
        return run_mixture<std::decay_t<decltype(dyn)>, Monitoring::discrete>(dyn, starts, weights, s,
                                                                              barrier, plans, mc);
    });
}

SurvivalEstimate survival_full_mc(const FirmValueModel& fv, double v, double s, double t,
                                  double barrier, std::size_t steps, std::size_t trials,
                                  std::uint64_t seed, unsigned workers) {
    return single(fv, v, s, t, barrier, steps, trials, seed, workers, Monitoring::bridge);
}

SurvivalEstimate survival_naive_mc(const FirmValueModel& fv, double v, double s, double t,
                                   double barrier, std::size_t steps, std::size_t trials,
                                   std::uint64_t seed, unsigned workers) {
    return single(fv, v, s, t, barrier, steps, trials, seed, workers, Monitoring::discrete);
}

SurvivalEstimate survival_partial(const FilterDistribution& filter, const FirmValueModel& fv,
                                  double s, double t, double barrier, std::size_t steps,
                                  std::size_t trials, std::uint64_t seed, double weight_floor,
                                  unsigned workers) {
    check_full_mc_args(s, t, barrier, steps, trials);
    const MaturityPlan plan[] = {{t, steps}};
    MonteCarloSettings mc{trials, seed, workers, weight_floor};
    return survival_mixture(filter.points, filter.weights, fv, s, barrier, plan, mc)
        .estimates.front();
}

}  // namespace quantcredit
