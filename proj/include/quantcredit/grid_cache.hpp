#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "quantcredit/quantization.hpp"

namespace quantcredit {

/// Persisted quantization: grids plus transition matrices, tagged with a hash
/// of everything that determined them. Reused across maturities.
///
/// Text layout (numbers in %.17g):
///   quantcredit-grid 1
///   model_hash <hex>
///   n <steps>
///   sizes <N_0> ... <N_n>
///   step <k> time <t_k> distortion <d> empty_cells <c> degenerate <0|1>
///   points <v^1> ... <v^N_k>
///   weights <p_1> ... <p_N_k>
///   transition_samples <count>          (k >= 1)
///   row <visits> <p^{i1}> ... <p^{iN_k}>  (k >= 1, one line per i)
///   end
struct GridCache {
    std::string model_hash;
    GridSequence sequence;
    std::vector<TransitionMatrix> transitions;
};

constexpr int kGridCacheVersion = 1;

void write_grid_cache(std::ostream& out, const GridCache& cache);
GridCache read_grid_cache(std::istream& in);

void save_grid_cache(const std::filesystem::path& path, const GridCache& cache);
GridCache load_grid_cache(const std::filesystem::path& path);

}  // namespace quantcredit
