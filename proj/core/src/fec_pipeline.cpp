#include <cmath>
#include <memory>

#include "pnshape/errors.hpp"
#include "pnshape/fec.hpp"
#include "pnshape/parallel.hpp"
#include "pnshape/rng.hpp"

namespace pnshape {

namespace {

constexpr std::size_t kCodewordsPerBlock = 256;

} // namespace

void FecPipelineConfig::validate() const {
    if (n_codewords == 0)
        throw InvalidArgument("FecPipelineConfig: n_codewords must be >= 1");
    if (!(target_ber > 0.0 && target_ber < 0.5))
        throw InvalidArgument("FecPipelineConfig: target_ber must lie in (0, 0.5)");
    if (pool_symbols == 0)
        throw InvalidArgument("FecPipelineConfig: pool_symbols must be >= 1");
    if (!(max_reuse >= 1.0))
        throw InvalidArgument("FecPipelineConfig: max_reuse must be >= 1");
}

LlrPool make_llr_pool(const Constellation& c, const ChannelSpec& spec, const DemapperModel& model,
                      const CpeConfig& cpe, std::size_t n_symbols, std::size_t pilot_spacing, std::uint64_t seed,
                      unsigned workers) {
    std::vector<std::uint32_t> tx;
    std::vector<cd> rx;
    if (spec.mode == ChannelMode::RandomWalk) {
        auto v = validate_chain(c, spec, model, n_symbols, cpe, pilot_spacing, seed, workers);
        tx = std::move(v.tx_index);
        rx = std::move(v.corrected);
    } else {
        auto r = transmit(c, n_symbols, spec, seed, workers);
        tx = std::move(r.tx_index);
        rx = std::move(r.rx);
    }
    const auto frame = bitwise_llrs(rx, c, model, workers);
    const unsigned m = c.bits_per_symbol();
    LlrPool pool;
    pool.llrs = frame.llrs;
    pool.bits.resize(pool.llrs.size());
    std::size_t errors = 0;
    for (std::size_t k = 0; k < tx.size(); ++k) {
        for (unsigned b = 0; b < m; ++b) {
            const std::size_t i = k * m + b;
            pool.bits[i] = static_cast<std::uint8_t>(c.bit(tx[k], b));
            errors += (pool.llrs[i] < 0.0 ? 1U : 0U) != pool.bits[i];
        }
    }
    pool.pre_fec_ber = static_cast<double>(errors) / static_cast<double>(pool.bits.size());
    return pool;
}

FecResult decode_from_pool(const LlrPool& pool, const FecPipelineConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const std::size_t p = pool.llrs.size();
    if (p == 0 || pool.bits.size() != p)
        throw InvalidArgument("decode_from_pool: malformed pool");
    const std::size_t needed = cfg.n_codewords * kCodeN;
    FecResult res;
    res.seed = seed;
    res.n_codewords = cfg.n_codewords;
    res.n_info_bits = cfg.n_codewords * kCodeK;
    res.reuse_factor = static_cast<double>(needed) / static_cast<double>(p);
    res.pre_fec_ber = pool.pre_fec_ber;
    if (res.reuse_factor > cfg.max_reuse)
        throw InsufficientSamples("decode_from_pool: " + std::to_string(cfg.n_codewords) +
                                  " codewords need pool reuse " + std::to_string(res.reuse_factor) +
                                  "x, above the cap of " + std::to_string(cfg.max_reuse) + "x");

    std::unique_ptr<Interleaver> perm;
    std::size_t pass = 0;
    std::size_t used = p; // forces a permutation on first use

    std::vector<CodeBits> sent(kCodewordsPerBlock);
    std::vector<double> llr(kCodewordsPerBlock * kCodeN);
    const std::size_t n_blocks = block_count(cfg.n_codewords, kCodewordsPerBlock);
    for (std::size_t blk = 0; blk < n_blocks; ++blk) {
        const std::size_t first = blk * kCodewordsPerBlock;
        const std::size_t count = std::min(kCodewordsPerBlock, cfg.n_codewords - first);
        auto gen = substream(seed, Stream::Codewords, blk);
        for (std::size_t q = 0; q < count; ++q) {
            InfoBits info;
            for (std::size_t k = 0; k < kCodeK; k += 60) {
                const std::uint64_t word = gen();
                for (std::size_t j = 0; j < 60 && k + j < kCodeK; ++j)
                    info[k + j] = static_cast<std::uint8_t>((word >> j) & 1U);
            }
            sent[q] = encode(info);
            for (std::size_t j = 0; j < kCodeN; ++j) {
                if (used == p) {
                    perm = std::make_unique<Interleaver>(p, derive_seed(seed, 0x9e11, pass++));
                    used = 0;
                }
                const std::size_t src = perm->permutation()[used++];
                const double sign = (pool.bits[src] ^ sent[q][j]) ? -1.0 : 1.0;
                llr[q * kCodeN + j] = sign * pool.llrs[src];
            }
        }
        std::vector<std::size_t> errs(count);
        parallel_for(count, cfg.workers, [&](std::size_t q) {
            const std::span<const double> l(llr.data() + q * kCodeN, kCodeN);
            InfoBits got;
            if (cfg.decoder == DecoderKind::Chase3) {
                got = chase3_decode(l, cfg.patterns).info;
            } else {
                CodeBits hard;
                for (std::size_t j = 0; j < kCodeN; ++j)
                    hard[j] = l[j] < 0.0 ? 1 : 0;
                got = extract_info(hd_decode(hard).bits);
            }
            std::size_t e = 0;
            for (std::size_t j = 0; j < kCodeK; ++j)
                e += got[j] != sent[q][j];
            errs[q] = e;
        });
        for (auto e : errs)
            res.info_bit_errors += e;
    }
    res.post_fec_ber = static_cast<double>(res.info_bit_errors) / static_cast<double>(res.n_info_bits);
    return res;
}

FecResult post_fec_ber(const Constellation& c, const ChannelSpec& spec, const DemapperModel& model,
                       const CpeConfig& cpe, const FecPipelineConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const double reuse = static_cast<double>(cfg.n_codewords * kCodeN) /
                         static_cast<double>(cfg.pool_symbols * c.bits_per_symbol());
    if (reuse > cfg.max_reuse)
        throw InsufficientSamples("post_fec_ber: requested codewords need pool reuse " + std::to_string(reuse) +
                                  "x, above the cap");
    const auto pool = make_llr_pool(c, spec, model, cpe, cfg.pool_symbols, cfg.pilot_spacing, seed, cfg.workers);
    return decode_from_pool(pool, cfg, seed);
}

} // namespace pnshape
