#pragma once

#include <array>
#include <cstdint>

namespace bbm::sim {

/// Philox4x32-10 block function (Salmon et al., SC'11). Pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finaliser; used to derive stream identifiers.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Identifier of a child stream; depends only on the parent identifier and the child index.
constexpr std::uint64_t split(std::uint64_t parent, std::uint64_t index) noexcept {
    return mix64(parent ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Sequential draws from the counter-based stream (key = seed, counter = (block, id)).
/// Two streams with different ids never share a block.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t id) noexcept;

    /// Uniform on (0, 1): (k + 1/2) 2^-53.
    double uniform() noexcept;
    double exponential() noexcept;
    double normal() noexcept;

    std::uint64_t blocks_used() const noexcept { return block_; }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t id_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    std::uint64_t next64() noexcept;
};

/// Standard normal quantile.
double normal_quantile(double p);

}  // namespace bbm::sim
