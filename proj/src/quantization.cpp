#include "quantcredit/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>

#include "quantcredit/errors.hpp"
#include "quantcredit/parallel.hpp"
#include "quantcredit/random.hpp"

namespace quantcredit {

namespace {

// x is assigned to the lower of two neighbouring points p < q on a tie.
inline bool closer_to_lower(double x, double p, double q) noexcept { return (x - p) <= (q - x); }

// bounds[i]..bounds[i+1] is the index range of cell i in the sorted samples.
std::vector<std::size_t> cell_bounds(std::span<const double> sorted, std::span<const double> points) {
    const std::size_t n = points.size();
    std::vector<std::size_t> bounds(n + 1, 0);
    bounds[n] = sorted.size();
    auto first = sorted.begin();
    for (std::size_t i = 1; i < n; ++i) {
        const double p = points[i - 1];
        const double q = points[i];
        first = std::partition_point(first, sorted.end(),
                                     [p, q](double x) { return closer_to_lower(x, p, q); });
        bounds[i] = static_cast<std::size_t>(first - sorted.begin());
    }
    return bounds;
}

constexpr std::size_t kPathChunk = 2048;

}  // namespace

std::size_t nearest_projection(std::span<const double> points, double x) {
    const auto it = std::lower_bound(points.begin(), points.end(), x);
    const auto i = static_cast<std::size_t>(it - points.begin());
    if (i == 0) return 0;
    if (i == points.size()) return points.size() - 1;
    return closer_to_lower(x, points[i - 1], points[i]) ? i - 1 : i;
}

SampleSet::SampleSet(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw InsufficientSamples("sample set is empty");
    std::sort(values_.begin(), values_.end());
}

QuantizerGrid evaluate_grid(const SampleSet& samples, std::vector<double> points) {
    if (points.empty()) throw DomainError("grid must be nonempty");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i] > points[i - 1])) throw DomainError("grid points must be strictly increasing");

    const auto sorted = samples.sorted();
    const auto bounds = cell_bounds(sorted, points);
    const double total = static_cast<double>(sorted.size());

    QuantizerGrid out;
    out.weights.resize(points.size());
    double sq = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::size_t count = bounds[i + 1] - bounds[i];
        out.weights[i] = static_cast<double>(count) / total;
        if (count == 0) ++out.empty_cells;
        for (std::size_t m = bounds[i]; m < bounds[i + 1]; ++m) {
            const double e = sorted[m] - points[i];
            sq += e * e;
        }
    }
    out.points = std::move(points);
    out.distortion = std::sqrt(sq / total);
    out.degenerate = samples.degenerate();
    return out;
}

QuantizerGrid quantile_grid(const SampleSet& samples, std::size_t size) {
    if (size == 0) throw DomainError("grid size must be positive");
    const auto sorted = samples.sorted();
    std::vector<double> points;
    points.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        const double q = (static_cast<double>(i) + 0.5) / static_cast<double>(size);
        auto idx = static_cast<std::size_t>(q * static_cast<double>(sorted.size()));
        points.push_back(sorted[std::min(idx, sorted.size() - 1)]);
    }
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return evaluate_grid(samples, std::move(points));
}

QuantizerGrid lloyd_pass(const SampleSet& samples, const QuantizerGrid& grid) {
    const auto sorted = samples.sorted();
    const auto bounds = cell_bounds(sorted, grid.points);
    std::vector<double> next(grid.points);
    for (std::size_t i = 0; i < next.size(); ++i) {
        const std::size_t count = bounds[i + 1] - bounds[i];
        if (count == 0) continue;
        double sum = 0.0;
        for (std::size_t m = bounds[i]; m < bounds[i + 1]; ++m) sum += sorted[m];
        next[i] = sum / static_cast<double>(count);
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    return evaluate_grid(samples, std::move(next));
}

QuantizerGrid lloyd_pass(std::span<const double> samples, const QuantizerGrid& grid) {
    return lloyd_pass(SampleSet(std::vector<double>(samples.begin(), samples.end())), grid);
}

std::vector<std::size_t> GridSequence::sizes() const {
    std::vector<std::size_t> out;
    out.reserve(grids.size());
    for (const auto& g : grids) out.push_back(g.size());
    return out;
}

GridSequence build_grid_sequence(const FirmValueModel& fv, const MarketScenario& scn,
                                 const TimeGrid& grid, std::span<const std::size_t> sizes,
                                 std::size_t sample_paths, std::size_t lloyd_iters,
                                 std::uint64_t seed, unsigned workers) {
    const std::size_t n = grid.steps();
    if (sizes.size() != n + 1)
        throw DimensionMismatch("sizes must have one entry per time index (n + 1)");
    if (sizes[0] != 1) throw DomainError("sizes[0] must be 1 (deterministic initial value)");
    const std::size_t max_size = *std::max_element(sizes.begin(), sizes.end());
    if (std::any_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s == 0; }))
        throw DomainError("grid sizes must be positive");
    if (sample_paths < 100 * max_size)
        throw InsufficientSamples("need at least 100 x max grid size sample paths (" +
                                  std::to_string(100 * max_size) + "), got " +
                                  std::to_string(sample_paths));

    // samples[k][p]: marginal of V at t_k on path p.
    std::vector<std::vector<double>> samples(n + 1, std::vector<double>(sample_paths));
    for_each_chunk(sample_paths, kPathChunk, workers,
                   [&](std::size_t, std::size_t begin, std::size_t end) {
                       std::vector<double> path(n + 1);
                       for (std::size_t p = begin; p < end; ++p) {
                           Substream rng(seed, "quantization", "grid-paths", p);
                           euler_firm_path(fv, scn.v0, grid, rng, path);
                           for (std::size_t k = 0; k <= n; ++k) samples[k][p] = path[k];
                       }
                   });

    GridSequence seq;
    seq.times = grid.instants();
    seq.grids.resize(n + 1);
    seq.grids[0].points = {scn.v0};
    seq.grids[0].weights = {1.0};

    for_each_chunk(n, 1, workers, [&](std::size_t, std::size_t begin, std::size_t) {
        const std::size_t k = begin + 1;
        SampleSet set(std::move(samples[k]));
        QuantizerGrid g = quantile_grid(set, sizes[k]);
        for (std::size_t it = 0; it < lloyd_iters; ++it) g = lloyd_pass(set, g);
        seq.grids[k] = std::move(g);
    });
    return seq;
}

std::vector<TransitionMatrix> estimate_transitions(const GridSequence& sequence,
                                                   const FirmValueModel& fv,
                                                   const MarketScenario& scn, const TimeGrid& grid,
                                                   std::size_t sample_paths, std::uint64_t seed,
                                                   unsigned workers) {
    const std::size_t n = grid.steps();
    if (sequence.grids.size() != n + 1)
        throw DimensionMismatch("grid sequence has " + std::to_string(sequence.grids.size()) +
                                " grids but the time grid has " + std::to_string(n + 1) + " instants");
    if (sample_paths == 0) throw InsufficientSamples("transition estimation needs sample paths");

    std::vector<std::vector<std::uint64_t>> counts(n);
    for (std::size_t k = 1; k <= n; ++k)
        counts[k - 1].assign(sequence.grids[k - 1].size() * sequence.grids[k].size(), 0);

    std::mutex merge;
    for_each_chunk(sample_paths, kPathChunk, workers,
                   [&](std::size_t, std::size_t begin, std::size_t end) {
                       std::vector<std::vector<std::uint64_t>> local(n);
                       for (std::size_t k = 0; k < n; ++k) local[k].assign(counts[k].size(), 0);
                       std::vector<double> path(n + 1);
                       for (std::size_t p = begin; p < end; ++p) {
                           Substream rng(seed, "quantization", "transition-paths", p);
                           euler_firm_path(fv, scn.v0, grid, rng, path);
                           std::size_t prev = 0;
                           for (std::size_t k = 1; k <= n; ++k) {
                               const std::size_t cur = nearest_projection(sequence.grids[k], path[k]);
                               ++local[k - 1][prev * sequence.grids[k].size() + cur];
                               prev = cur;
                           }
                       }
                       // Integer counts: merge order does not affect the result.
                       std::lock_guard lock(merge);
                       for (std::size_t k = 0; k < n; ++k)
                           for (std::size_t c = 0; c < counts[k].size(); ++c) counts[k][c] += local[k][c];
                   });

    std::vector<TransitionMatrix> out(n);
    for (std::size_t k = 1; k <= n; ++k) {
        const auto& from = sequence.grids[k - 1];
        const auto& to = sequence.grids[k];
        auto& m = out[k - 1];
        m.rows = from.size();
        m.cols = to.size();
        m.entries.assign(m.rows * m.cols, 0.0);
        m.visits.assign(m.rows, 0);
        m.empty_rows.assign(m.rows, false);
        m.samples = sample_paths;
        for (std::size_t i = 0; i < m.rows; ++i) {
            const auto* row = counts[k - 1].data() + i * m.cols;
            const std::uint64_t total = std::accumulate(row, row + m.cols, std::uint64_t{0});
            m.visits[i] = total;
            if (total == 0) {
                m.empty_rows[i] = true;
                m.entries[i * m.cols + nearest_projection(to, from.points[i])] = 1.0;
                continue;
            }
            for (std::size_t j = 0; j < m.cols; ++j)
                m.entries[i * m.cols + j] = static_cast<double>(row[j]) / static_cast<double>(total);
        }
    }
    return out;
}

}  // namespace quantcredit
