#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "quantcredit/model.hpp"

namespace quantcredit {

/// One-dimensional quantizer: strictly increasing points with the
/// probabilities of their Voronoi cells.
struct QuantizerGrid {
    std::vector<double> points;
    std::vector<double> weights;
    /// Root-mean-square quantization error, ||X - Proj(X)||_2, on the sample
    /// set the grid was evaluated against.
    double distortion = 0.0;
    std::size_t empty_cells = 0;
    /// Every sample was identical; only one cell is effective.
    bool degenerate = false;

    std::size_t size() const noexcept { return points.size(); }
};

/// Index of the closest grid point, ties going to the smaller index. O(log N).
std::size_t nearest_projection(std::span<const double> points, double x);
inline std::size_t nearest_projection(const QuantizerGrid& grid, double x) {
    return nearest_projection(grid.points, x);
}

/// Sorted copy of a sample set, the form every Lloyd routine works on.
class SampleSet {
public:
    explicit SampleSet(std::vector<double> values);
    std::span<const double> sorted() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool degenerate() const noexcept { return values_.front() == values_.back(); }

private:
    std::vector<double> values_;
};

/// Weights, distortion and empty-cell count of `points` against `samples`.
QuantizerGrid evaluate_grid(const SampleSet& samples, std::vector<double> points);

/// Grid at the (i + 1/2)/N empirical quantiles; duplicate points are merged.
QuantizerGrid quantile_grid(const SampleSet& samples, std::size_t size);

/// One Lloyd's I iteration: every point moves to the mean of its cell; empty
/// cells keep their point. Distortion does not increase on a fixed sample set.
QuantizerGrid lloyd_pass(const SampleSet& samples, const QuantizerGrid& grid);
QuantizerGrid lloyd_pass(std::span<const double> samples, const QuantizerGrid& grid);

/// One quantizer per time index k = 0..n of the time grid; grid 0 is {v0}.
struct GridSequence {
    std::vector<double> times;
    std::vector<QuantizerGrid> grids;

    std::size_t steps() const noexcept { return grids.empty() ? 0 : grids.size() - 1; }
    std::vector<std::size_t> sizes() const;
};

/// Per-step marginal quantization of V by Lloyd's I on simulated Euler samples.
/// Stream key per path: (seed, "quantization", "grid-paths", path).
GridSequence build_grid_sequence(const FirmValueModel& fv, const MarketScenario& scn,
                                 const TimeGrid& grid, std::span<const std::size_t> sizes,
                                 std::size_t sample_paths, std::size_t lloyd_iters,
                                 std::uint64_t seed, unsigned workers = 0);

/// Estimated transition matrix of the quantized chain from step k-1 to step k.
struct TransitionMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> entries;        // row-major
    std::vector<std::uint64_t> visits;  // samples observed in each row
    std::vector<bool> empty_rows;       // replaced by a nearest-neighbor point mass
    std::uint64_t samples = 0;

    double operator()(std::size_t i, std::size_t j) const noexcept { return entries[i * cols + j]; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {entries.data() + i * cols, cols};
    }
};

/// Element k-1 of the result maps grid k-1 to grid k. Uses a fresh path set,
/// stream key (seed, "quantization", "transition-paths", path).
std::vector<TransitionMatrix> estimate_transitions(const GridSequence& sequence,
                                                   const FirmValueModel& fv,
                                                   const MarketScenario& scn, const TimeGrid& grid,
                                                   std::size_t sample_paths, std::uint64_t seed,
                                                   unsigned workers = 0);

}  // namespace quantcredit
