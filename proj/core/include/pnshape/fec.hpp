#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pnshape/channel.hpp"
#include "pnshape/constellation.hpp"
#include "pnshape/cpe.hpp"
#include "pnshape/demapper.hpp"

namespace pnshape {

/// Extended Hamming (128,120), systematic layout:
///   bits[0..120)   information, parity-check columns = the non-powers of two
///                  in 1..127, ascending;
///   bits[120..127) Hamming parity, columns 1, 2, 4, ..., 64;
///   bits[127]      overall (even) parity.
inline constexpr std::size_t kCodeN = 128;
inline constexpr std::size_t kCodeK = 120;

using CodeBits = std::array<std::uint8_t, kCodeN>;
using InfoBits = std::array<std::uint8_t, kCodeK>;

/// Parity-check column (1..127) of codeword position `pos` < 127.
unsigned hamming_column(std::size_t pos);

CodeBits encode(std::span<const std::uint8_t> info);
InfoBits extract_info(const CodeBits& cw);

/// 7-bit Hamming syndrome over positions 0..126.
unsigned syndrome(const CodeBits& bits);
unsigned overall_parity(const CodeBits& bits);
bool is_codeword(const CodeBits& bits);

enum class DecodeStatus { Corrected0, Corrected1, Detected2 };
std::string to_string(DecodeStatus s);

struct HdResult {
    CodeBits bits;
    DecodeStatus status;
};

/// Bounded-distance decoding: corrects one error, flags two (bits returned
/// unchanged on detection).
HdResult hd_decode(std::span<const std::uint8_t> hard);

/// {0, 1, 3} least-reliable flips by default; Full adds the 2-flip pattern.
enum class ChasePatterns { Standard, Full };

struct ChaseResult {
    InfoBits info;
    CodeBits codeword;
    bool decoded = false; ///< false: no pattern decoded, hard-decision info returned
};

/// Chase-3 soft decoding. LLR convention: positive favours bit 0.
ChaseResult chase3_decode(std::span<const double> llrs, ChasePatterns patterns = ChasePatterns::Standard);

/// Soft correlation sum_k (1 - 2 c_k) llr_k.
double soft_correlation(const CodeBits& cw, std::span<const double> llrs);

/// Seeded uniform random permutation.
class Interleaver {
  public:
    Interleaver(std::size_t n, std::uint64_t seed);
    std::size_t size() const noexcept { return perm_.size(); }
    const std::vector<std::size_t>& permutation() const noexcept { return perm_; }
    /// out[k] = in[perm[k]]
    template <class T>
    std::vector<T> interleave(std::span<const T> in) const;
    /// Inverse of interleave().
    template <class T>
    std::vector<T> deinterleave(std::span<const T> in) const;

  private:
    std::vector<std::size_t> perm_;
};

template <class T>
std::vector<T> Interleaver::interleave(std::span<const T> in) const {
    std::vector<T> out(perm_.size());
    for (std::size_t k = 0; k < perm_.size(); ++k)
        out[k] = in[perm_[k]];
    return out;
}

template <class T>
std::vector<T> Interleaver::deinterleave(std::span<const T> in) const {
    std::vector<T> out(perm_.size());
    for (std::size_t k = 0; k < perm_.size(); ++k)
        out[perm_[k]] = in[k];
    return out;
}

enum class DecoderKind { Chase3, HardDecision };

struct FecPipelineConfig {
    std::size_t n_codewords = 20000;
    double target_ber = 4.5e-3;
    /// Channel symbols in the bitwise LLR pool.
    std::size_t pool_symbols = std::size_t{1} << 20;
    double max_reuse = 100.0;
    std::size_t pilot_spacing = kDefaultPilotSpacing;
    ChasePatterns patterns = ChasePatterns::Standard;
    DecoderKind decoder = DecoderKind::Chase3;
    unsigned workers = 0;

    void validate() const;
};

/// Bitwise channel samples: transmitted bits and LLRs, one per (symbol, bit).
struct LlrPool {
    std::vector<std::uint8_t> bits;
    std::vector<double> llrs;
    double pre_fec_ber = 0.0;
};

/// Random symbols through the channel (with pilots and CPE for RandomWalk)
/// and the demapper.
LlrPool make_llr_pool(const Constellation& c, const ChannelSpec& spec, const DemapperModel& model,
                      const CpeConfig& cpe, std::size_t n_symbols, std::size_t pilot_spacing, std::uint64_t seed,
                      unsigned workers = 0);

struct FecResult {
    double post_fec_ber = 0.0;
    double pre_fec_ber = 0.0;
    std::size_t n_info_bits = 0;
    std::size_t n_codewords = 0;
    std::size_t info_bit_errors = 0;
    double reuse_factor = 0.0;
    std::uint64_t seed = 0;
};

/// Decode `cfg.n_codewords` random codewords against an LLR pool. Each
/// codeword bit c takes a pool sample (b, l) through a seeded random
/// permutation and sees the scrambled LLR l * (1 - 2 (b xor c)); the pool
/// is re-permuted for every pass. Throws InsufficientSamples when more
/// than `max_reuse` passes would be needed.
FecResult decode_from_pool(const LlrPool& pool, const FecPipelineConfig& cfg, std::uint64_t seed);

/// Full chain: LLR pool from the channel, then decode_from_pool.
FecResult post_fec_ber(const Constellation& c, const ChannelSpec& spec, const DemapperModel& model,
                       const CpeConfig& cpe, const FecPipelineConfig& cfg, std::uint64_t seed);

} // namespace pnshape
