#pragma once

// Reference implementations that share no code with the library. They are
// slow and simple on purpose.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

struct GbmObservationSetup {
    double v0, mu, sigma;        // dV = mu V dt + sigma V dW
    double psi, nu, delta;       // d log S = (psi - (nu^2+delta^2)/2) dt + nu dW + delta dWbar
};

struct WeightedParticles {
    std::vector<double> values;
    std::vector<double> weights;  // normalized
};

// Bootstrap particle filter for V_{t_n} given log-prices y_0..y_n on `times`.
// Particles move by the Euler step of V; each is weighted by the Gaussian
// density of the observed log-price increment given its own dW, then
// multinomially resampled (except after the last step).
inline WeightedParticles bootstrap_particle_filter(const GbmObservationSetup& m,
                                                   const std::vector<double>& times,
                                                   const std::vector<double>& prices,
                                                   std::size_t particles, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z;
    std::vector<double> v(particles, m.v0), w(particles, 1.0 / static_cast<double>(particles));
    std::vector<double> nv(particles);
    const double ito = m.psi - 0.5 * (m.nu * m.nu + m.delta * m.delta);
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double dt = times[k] - times[k - 1];
        const double r = std::log(prices[k] / prices[k - 1]);
        const double sd = m.delta * std::sqrt(dt);
        std::vector<double> logw(particles);
        double top = -INFINITY;
        for (std::size_t p = 0; p < particles; ++p) {
            const double dw = std::sqrt(dt) * z(gen);
            if (v[p] > 0.0) {
                v[p] += m.mu * v[p] * dt + m.sigma * v[p] * dw;
                if (v[p] < 0.0) v[p] = 0.0;
            }
            const double e = (r - ito * dt - m.nu * dw) / sd;
            logw[p] = std::log(w[p]) - 0.5 * e * e;
            top = std::max(top, logw[p]);
        }
        double total = 0.0;
        for (std::size_t p = 0; p < particles; ++p) total += (w[p] = std::exp(logw[p] - top));
        for (double& x : w) x /= total;
        if (k + 1 < times.size()) {
            std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
            for (std::size_t p = 0; p < particles; ++p) nv[p] = v[pick(gen)];
            v.swap(nv);
            std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(particles));
        }
    }
    return {v, w};
}

// Mass of weighted particles in the Voronoi cells of sorted `points`.
inline std::vector<double> bin_to_cells(const WeightedParticles& wp, const std::vector<double>& points) {
    std::vector<double> mids;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) mids.push_back(0.5 * (points[i] + points[i + 1]));
    std::vector<double> mass(points.size(), 0.0);
    for (std::size_t p = 0; p < wp.values.size(); ++p) {
        const auto cell = std::upper_bound(mids.begin(), mids.end(), wp.values[p]) - mids.begin();
        mass[static_cast<std::size_t>(cell)] += wp.weights[p];
    }
    return mass;
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
    return 0.5 * d;
}

// Exact terminal law of a finite-state HMM by summing over every index path.
// trans[k](i, j) maps state i at step k to j at step k+1; lik(k, i, j) is the
// observation density for that move. Returns normalized weights at the end.
inline std::vector<double> hmm_enumeration(
    const std::vector<std::size_t>& sizes,
    const std::function<double(std::size_t, std::size_t, std::size_t)>& trans,
    const std::function<double(std::size_t, std::size_t, std::size_t)>& lik) {
    const std::size_t n = sizes.size() - 1;
    std::vector<double> terminal(sizes[n], 0.0);
    std::vector<std::size_t> path(n + 1, 0);
    std::function<void(std::size_t, double)> walk = [&](std::size_t k, double prob) {
        if (k == n) {
            terminal[path[n]] += prob;
            return;
        }
        for (std::size_t j = 0; j < sizes[k + 1]; ++j) {
            const double p = trans(k, path[k], j);
            if (p == 0.0) continue;
            path[k + 1] = j;
            walk(k + 1, prob * p * lik(k, path[k], j));
        }
    };
    walk(0, 1.0);
    double total = 0.0;
    for (double x : terminal) total += x;
    for (double& x : terminal) x /= total;
    return terminal;
}

// Distortion of the symmetric two-point quantizer {-x, x} for N(0,1), by
// composite Simpson integration of E[(|X| - x)^2].
inline double gaussian_two_point_distortion(double x) {
    const int n = 20000;
    const double hi = 12.0, h = hi / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double u = i * h;
        const double f = (u - x) * (u - x) * std::exp(-0.5 * u * u) * std::sqrt(2.0 / std::numbers::pi);
        acc += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    return acc * h / 3.0;
}

// Golden-section minimizer of gaussian_two_point_distortion on [0, 3].
inline double gaussian_two_point_optimum() {
    double lo = 0.0, hi = 3.0;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 80; ++it) {
        const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
        if (gaussian_two_point_distortion(a) < gaussian_two_point_distortion(b)) hi = b;
        else lo = a;
    }
    return 0.5 * (lo + hi);
}

}  // namespace oracle
