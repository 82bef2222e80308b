#include "pnshape/channel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "pnshape/errors.hpp"
#include "pnshape/parallel.hpp"
#include "pnshape/rng.hpp"

namespace pnshape {

std::string to_string(ChannelMode mode) {
    switch (mode) {
    case ChannelMode::AwgnOnly:
        return "awgn";
    case ChannelMode::GaussianRpn:
        return "gaussian_rpn";
    case ChannelMode::RandomWalk:
        return "random_walk";
    }
    return "?";
}

ChannelMode parse_channel_mode(const std::string& s) {
    if (s == "awgn")
        return ChannelMode::AwgnOnly;
    if (s == "gaussian_rpn" || s == "rpn")
        return ChannelMode::GaussianRpn;
    if (s == "random_walk" || s == "rw")
        return ChannelMode::RandomWalk;
    throw InvalidArgument("unknown channel mode '" + s + "'");
}

double rpn_variance(double linewidth_hz, double symbol_rate_baud) {
    if (!(symbol_rate_baud > 0.0))
        throw InvalidArgument("rpn_variance: symbol rate must be positive");
    if (!(linewidth_hz >= 0.0))
        throw InvalidArgument("rpn_variance: linewidth must be nonnegative");
    return 2.0 * std::numbers::pi * linewidth_hz / symbol_rate_baud;
}

double equivalent_linewidth(double variance, double symbol_rate_baud) {
    if (!(symbol_rate_baud > 0.0) || !(variance >= 0.0))
        throw InvalidArgument("equivalent_linewidth: need variance >= 0 and a positive symbol rate");
    return variance * symbol_rate_baud / (2.0 * std::numbers::pi);
}

double ChannelSpec::n0() const {
    if (std::isinf(snr_db) && snr_db > 0)
        return 0.0;
    return std::pow(10.0, -snr_db / 10.0);
}

double ChannelSpec::phase_variance() const {
    return mode == ChannelMode::AwgnOnly ? 0.0 : rpn_variance(linewidth_hz, symbol_rate_baud);
}

void ChannelSpec::validate() const {
    if (std::isnan(snr_db) || (std::isinf(snr_db) && snr_db < 0))
        throw InvalidArgument("ChannelSpec: snr_db must be a number or +inf");
    (void)rpn_variance(linewidth_hz, symbol_rate_baud);
}

ChannelDraw draw_channel(std::size_t n, std::size_t order, ChannelMode mode, double phase_variance,
                         std::uint64_t seed, unsigned workers) {
    if (!(phase_variance >= 0.0))
        throw InvalidArgument("draw_channel: negative phase variance");
    ChannelDraw d;
    if (order > 0)
        d.tx.resize(n);
    d.theta.assign(n, 0.0);
    d.noise.resize(n);
    const double sigma = std::sqrt(phase_variance);
    const std::size_t blocks = block_count(n, kRngBlock);

    parallel_for(blocks, workers, [&](std::size_t b) {
        auto gen = substream(seed, Stream::Channel, b);
        std::uniform_int_distribution<std::uint32_t> pick(0, order > 0 ? static_cast<std::uint32_t>(order - 1) : 0);
        std::normal_distribution<double> phase(0.0, 1.0);
        std::normal_distribution<double> noise(0.0, std::numbers::sqrt2 / 2.0);
        const std::size_t lo = b * kRngBlock;
        const std::size_t hi = std::min(n, lo + kRngBlock);
        for (std::size_t k = lo; k < hi; ++k) {
            if (order > 0)
                d.tx[k] = pick(gen);
            const double w = sigma * phase(gen);
            if (mode != ChannelMode::AwgnOnly)
                d.theta[k] = w; // increment for RandomWalk, integrated below
            const double re = noise(gen);
            const double im = noise(gen);
            d.noise[k] = {re, im};
        }
    });

    if (mode == ChannelMode::RandomWalk && n > 0) {
        d.theta[0] = 0.0;
        for (std::size_t k = 1; k < n; ++k)
            d.theta[k] += d.theta[k - 1];
    }
    return d;
}

std::vector<std::uint32_t> random_indices(std::size_t n, std::size_t order, std::uint64_t seed,
                                          unsigned workers) {
    if (order == 0)
        throw InvalidArgument("random_indices: order must be >= 1");
    std::vector<std::uint32_t> out(n);
    parallel_for(block_count(n, kRngBlock), workers, [&](std::size_t b) {
        auto gen = substream(seed, Stream::Bits, b);
        std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(order - 1));
        const std::size_t hi = std::min(n, (b + 1) * kRngBlock);
        for (std::size_t k = b * kRngBlock; k < hi; ++k)
            out[k] = pick(gen);
    });
    return out;
}

namespace {

ChannelRealization realize(std::vector<cd> tx, ChannelDraw draw, const ChannelSpec& spec, std::uint64_t seed,
                           unsigned workers) {
    ChannelRealization r;
    r.seed = seed;
    r.tx = std::move(tx);
    r.tx_index = std::move(draw.tx);
    r.phase_track = std::move(draw.theta);
    r.rx.resize(r.tx.size());
    const double scale = std::sqrt(spec.n0());
    const std::size_t n = r.tx.size();
    parallel_for(block_count(n, kRngBlock), workers, [&](std::size_t b) {
        const std::size_t hi = std::min(n, (b + 1) * kRngBlock);
        for (std::size_t k = b * kRngBlock; k < hi; ++k)
            r.rx[k] = apply_phase_and_noise(r.tx[k], r.phase_track[k], scale * draw.noise[k]);
    });
    return r;
}

} // namespace

ChannelRealization transmit(const Constellation& c, std::size_t n_symbols, const ChannelSpec& spec,
                            std::uint64_t seed, unsigned workers) {
    spec.validate();
    if (n_symbols == 0)
        throw InvalidArgument("transmit: n_symbols must be >= 1");
    auto draw = draw_channel(n_symbols, c.order(), spec.mode, spec.phase_variance(), seed, workers);
    std::vector<cd> tx(n_symbols);
    for (std::size_t k = 0; k < n_symbols; ++k)
        tx[k] = c.points()[draw.tx[k]];
    return realize(std::move(tx), std::move(draw), spec, seed, workers);
}

ChannelRealization transmit_symbols(std::span<const cd> tx, const ChannelSpec& spec, std::uint64_t seed,
                                    unsigned workers) {
    spec.validate();
    if (tx.empty())
        throw InvalidArgument("transmit_symbols: empty symbol sequence");
    auto draw = draw_channel(tx.size(), 0, spec.mode, spec.phase_variance(), seed, workers);
    return realize({tx.begin(), tx.end()}, std::move(draw), spec, seed, workers);
}

void write_realization_csv(std::ostream& os, const ChannelRealization& r) {
    const auto old = os.precision(17);
    os << "k,tx_re,tx_im,rx_re,rx_im,theta\n";
    for (std::size_t k = 0; k < r.rx.size(); ++k) {
        os << k << ',' << r.tx[k].real() << ',' << r.tx[k].imag() << ',' << r.rx[k].real() << ','
           << r.rx[k].imag() << ',' << r.phase_track[k] << '\n';
    }
    os.precision(old);
}

} // namespace pnshape
