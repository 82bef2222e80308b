#pragma once

#include <cstdint>
#include <random>

namespace pnshape {

/// Purpose tags so that different consumers of one run seed never share a stream.
enum class Stream : std::uint64_t {
    Channel = 1,
    Bits = 2,
    Pilots = 3,
    Interleaver = 4,
    Scrambler = 5,
    Objective = 6,
    Codewords = 7,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derive a child seed; used for per-iteration and per-cell seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Generator for block `block` of stream `stream`. Blocks are fixed-size, so
/// output depends only on (seed, stream, block) and never on scheduling.
std::mt19937_64 substream(std::uint64_t seed, Stream stream, std::uint64_t block);

/// Symbols per RNG block for all block-parallel Monte-Carlo loops.
inline constexpr std::size_t kRngBlock = 4096;

} // namespace pnshape
