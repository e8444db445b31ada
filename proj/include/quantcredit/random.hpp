#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace quantcredit {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// FNV-1a over a byte string.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

/// Hierarchical seed derivation: every random stream in the library is keyed by
/// (root seed, module, purpose, index). Two distinct keys give unrelated streams,
/// and the same key always gives the same stream, independent of how work is
/// scheduled across threads.
std::uint64_t derive_seed(std::uint64_t root, std::string_view module,
                          std::string_view purpose, std::uint64_t index) noexcept;

/// One independent random stream (a path, a trial).
class Substream {
public:
    explicit Substream(std::uint64_t seed) : engine_(seed) {}
    Substream(std::uint64_t root, std::string_view module, std::string_view purpose,
              std::uint64_t index)
        : engine_(derive_seed(root, module, purpose, index)) {}

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace quantcredit
