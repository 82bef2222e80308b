#include "pnshape/rng.hpp"

namespace pnshape {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xD1B54A32D192ED03ULL));
}

std::mt19937_64 substream(std::uint64_t seed, Stream stream, std::uint64_t block) {
    return std::mt19937_64(derive_seed(seed, static_cast<std::uint64_t>(stream), block));
}

} // namespace pnshape
