#pragma once

#include <cstdint>

namespace moire {

/// SplitMix64 finaliser; used to derive independent per-task seeds from one run seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                    std::uint64_t index = 0) noexcept {
    return mix_seed(mix_seed(mix_seed(base) ^ stream) ^ index);
}

}  // namespace moire
