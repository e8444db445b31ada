#include "quantcredit/random.hpp"

namespace quantcredit {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis) noexcept {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view module,
                          std::string_view purpose, std::uint64_t index) noexcept {
    std::uint64_t h = mix64(root);
    h = mix64(h ^ fnv1a(module));
    h = mix64(h ^ fnv1a(purpose));
    return mix64(h ^ mix64(index));
}

}  // namespace quantcredit
