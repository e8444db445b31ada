#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "quantcredit/model.hpp"
#include "quantcredit/quantization.hpp"

namespace quantcredit {

/// Observed prices y_0..y_n on the filter time grid; y_0 = s0.
struct ObservationPath {
    std::vector<double> values;

    void validate() const;
};

/// Normalized filter: the estimate of Law(V_{t_k} | observations up to t_k)
/// on the quantizer grid of step k. The unnormalized filter is
/// weights * exp(log_evidence).
struct FilterDistribution {
    std::size_t step = 0;
    std::vector<double> points;
    std::vector<double> weights;
    double log_evidence = 0.0;

    double mean() const;
};

/// Lognormal density of y_cur given (v_prev, y_prev, v_cur) under the Euler
/// discretization with coefficients frozen at (t_prev, v_prev).
double likelihood(double v_prev, double y_prev, double v_cur, double y_cur,
                  const FirmValueModel& fv, const ObservationModel& obs, double t_prev, double dt);
double log_likelihood(double v_prev, double y_prev, double v_cur, double y_cur,
                      const FirmValueModel& fv, const ObservationModel& obs, double t_prev,
                      double dt);

FilterDistribution filter_init(const GridSequence& sequence);

/// log g(i, j) for the transition from point i of the previous grid to point j
/// of the next grid.
using LogLikelihoodFn = std::function<double(std::size_t i, std::size_t j)>;

/// One step of the quantized forward recursion with an arbitrary likelihood:
/// w_j ∝ Σ_i state_i g(i,j) p^{ij}, renormalized, log normalizer accumulated.
FilterDistribution filter_step_with(const FilterDistribution& state,
                                    const TransitionMatrix& transition,
                                    std::span<const double> next_points,
                                    const LogLikelihoodFn& log_g);

/// Step k (1..n) of the filter, y_prev = y_{k-1}, y_cur = y_k.
FilterDistribution filter_step(const FilterDistribution& state, std::size_t k, double y_prev,
                               double y_cur, const GridSequence& sequence,
                               std::span<const TransitionMatrix> transitions,
                               const FirmValueModel& fv, const ObservationModel& obs,
                               const TimeGrid& grid);

/// Filter at t_n. Every intermediate distribution is passed to `on_step` when
/// given (k = 0..n).
FilterDistribution run_filter(const ObservationPath& path, const GridSequence& sequence,
                              std::span<const TransitionMatrix> transitions,
                              const FirmValueModel& fv, const ObservationModel& obs,
                              const TimeGrid& grid,
                              const std::function<void(const FilterDistribution&)>& on_step = {});

/// CSV: "# log_evidence=<x>" and "# step=<k>" lines, then grid_point,weight.
void write_filter_csv(std::ostream& out, const FilterDistribution& filter);
FilterDistribution read_filter_csv(std::istream& in);

}  // namespace quantcredit
