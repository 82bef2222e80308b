#include "pnshape/fec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pnshape/errors.hpp"
#include "pnshape/rng.hpp"

namespace pnshape {

namespace {

struct ColumnTable {
    std::array<unsigned, kCodeN - 1> col{};
    std::array<int, kCodeN> pos_of{}; ///< column value -> position
    ColumnTable() {
        std::size_t next = 0;
        for (unsigned v = 1; v < kCodeN; ++v)
            if ((v & (v - 1)) != 0)
                col[next++] = v;
        for (unsigned t = 0; t < 7; ++t)
            col[kCodeK + t] = 1U << t;
        pos_of.fill(-1);
        for (std::size_t p = 0; p < col.size(); ++p)
            pos_of[col[p]] = static_cast<int>(p);
    }
};

const ColumnTable& table() {
    static const ColumnTable t;
    return t;
}

} // namespace

unsigned hamming_column(std::size_t pos) {
    if (pos >= kCodeN - 1)
        throw InvalidArgument("hamming_column: position must be < 127");
    return table().col[pos];
}

CodeBits encode(std::span<const std::uint8_t> info) {
    if (info.size() != kCodeK)
        throw InvalidArgument("encode: exactly 120 information bits required");
    const auto& t = table();
    CodeBits cw{};
    unsigned s = 0;
    unsigned par = 0;
    for (std::size_t k = 0; k < kCodeK; ++k) {
        const std::uint8_t b = info[k] & 1U;
        cw[k] = b;
        if (b) {
            s ^= t.col[k];
            par ^= 1U;
        }
    }
    for (unsigned j = 0; j < 7; ++j) {
        const std::uint8_t b = (s >> j) & 1U;
        cw[kCodeK + j] = b;
        par ^= b;
    }
    cw[kCodeN - 1] = static_cast<std::uint8_t>(par);
    return cw;
}

InfoBits extract_info(const CodeBits& cw) {
    InfoBits info;
    std::copy_n(cw.begin(), kCodeK, info.begin());
    return info;
}

unsigned syndrome(const CodeBits& bits) {
    const auto& t = table();
    unsigned s = 0;
    for (std::size_t k = 0; k < kCodeN - 1; ++k)
        if (bits[k] & 1U)
            s ^= t.col[k];
    return s;
}

unsigned overall_parity(const CodeBits& bits) {
    unsigned p = 0;
    for (auto b : bits)
        p ^= b & 1U;
    return p;
}

bool is_codeword(const CodeBits& bits) { return syndrome(bits) == 0 && overall_parity(bits) == 0; }

std::string to_string(DecodeStatus s) {
    switch (s) {
    case DecodeStatus::Corrected0:
        return "corrected0";
    case DecodeStatus::Corrected1:
        return "corrected1";
    case DecodeStatus::Detected2:
        return "detected2";
    }
    return "?";
}

HdResult hd_decode(std::span<const std::uint8_t> hard) {
    if (hard.size() != kCodeN)
        throw InvalidArgument("hd_decode: exactly 128 bits required");
    HdResult r{};
    for (std::size_t k = 0; k < kCodeN; ++k)
        r.bits[k] = hard[k] & 1U;
    const unsigned s = syndrome(r.bits);
    const unsigned p = overall_parity(r.bits);
    if (s == 0 && p == 0) {
        r.status = DecodeStatus::Corrected0;
    } else if (p == 1) {
        const std::size_t pos = s == 0 ? kCodeN - 1 : static_cast<std::size_t>(table().pos_of[s]);
        r.bits[pos] ^= 1U;
        r.status = DecodeStatus::Corrected1;
    } else {
        r.status = DecodeStatus::Detected2;
    }
    return r;
}

double soft_correlation(const CodeBits& cw, std::span<const double> llrs) {
    double s = 0.0;
    for (std::size_t k = 0; k < kCodeN; ++k)
        s += cw[k] ? -llrs[k] : llrs[k];
    return s;
}

ChaseResult chase3_decode(std::span<const double> llrs, ChasePatterns patterns) {
    if (llrs.size() != kCodeN)
        throw InvalidArgument("chase3_decode: exactly 128 LLRs required");
    CodeBits hard{};
    for (std::size_t k = 0; k < kCodeN; ++k) {
        if (!std::isfinite(llrs[k]))
            throw InvalidArgument("chase3_decode: LLRs must be finite");
        hard[k] = llrs[k] < 0.0 ? 1 : 0;
    }
    // Three least reliable positions, ties to the lower index.
    std::array<std::size_t, 3> weak{0, 1, 2};
    {
        std::array<std::size_t, kCodeN> idx;
        std::iota(idx.begin(), idx.end(), 0);
        std::partial_sort(idx.begin(), idx.begin() + 3, idx.end(), [&](std::size_t a, std::size_t b) {
            const double fa = std::abs(llrs[a]);
            const double fb = std::abs(llrs[b]);
            return fa < fb || (fa == fb && a < b);
        });
        std::copy_n(idx.begin(), 3, weak.begin());
    }
    static constexpr std::array<std::size_t, 3> kStandard{0, 1, 3};
    static constexpr std::array<std::size_t, 4> kFull{0, 1, 2, 3};
    const std::span<const std::size_t> flips =
        patterns == ChasePatterns::Standard ? std::span<const std::size_t>(kStandard)
                                            : std::span<const std::size_t>(kFull);

    ChaseResult res{};
    double best = -INFINITY;
    for (std::size_t j : flips) {
        CodeBits trial = hard;
        for (std::size_t q = 0; q < j; ++q)
            trial[weak[q]] ^= 1U;
        const auto dec = hd_decode(trial);
        if (dec.status == DecodeStatus::Detected2)
            continue;
        const double corr = soft_correlation(dec.bits, llrs);
        if (!res.decoded || corr > best) {
            best = corr;
            res.codeword = dec.bits;
            res.decoded = true;
        }
    }
    if (!res.decoded)
        res.codeword = hard;
    res.info = extract_info(res.codeword);
    return res;
}

Interleaver::Interleaver(std::size_t n, std::uint64_t seed) : perm_(n) {
    if (n == 0)
        throw InvalidArgument("Interleaver: size must be >= 1");
    std::iota(perm_.begin(), perm_.end(), 0);
    auto gen = substream(seed, Stream::Interleaver, 0);
    for (std::size_t i = n - 1; i > 0; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i);
        std::swap(perm_[i], perm_[pick(gen)]);
    }
}

} // namespace pnshape
