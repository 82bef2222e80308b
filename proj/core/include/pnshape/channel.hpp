#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pnshape/constellation.hpp"

namespace pnshape {

enum class ChannelMode { AwgnOnly, GaussianRpn, RandomWalk };

std::string to_string(ChannelMode mode);
ChannelMode parse_channel_mode(const std::string& s);

/// RPN variance 2*pi*linewidth/symbol_rate in rad^2.
double rpn_variance(double linewidth_hz, double symbol_rate_baud);

/// Linewidth whose rpn_variance() at `symbol_rate_baud` equals `variance`.
double equivalent_linewidth(double variance, double symbol_rate_baud);

/// SNR is Es/N0 with Es = 1 and N0 the total (two-dimensional) noise variance.
struct ChannelSpec {
    double snr_db = 20.0;
    double linewidth_hz = 0.0;
    double symbol_rate_baud = 60e9;
    ChannelMode mode = ChannelMode::AwgnOnly;

    /// 10^(-snr_db/10); exactly 0 for snr_db = +inf.
    double n0() const;
    /// Per-symbol phase variance; 0 in AwgnOnly mode.
    double phase_variance() const;
    void validate() const;
};

/// Phases and unit-variance noise for one Monte-Carlo realization, separated
/// from the constellation so that several constellations can be evaluated on
/// common random numbers.
struct ChannelDraw {
    std::vector<std::uint32_t> tx; ///< symbol indices; empty if not drawn
    std::vector<double> theta;     ///< true phase per symbol [rad]
    std::vector<cd> noise;         ///< CN(0, 1) samples, scaled by sqrt(n0) on use
};

/// Draw `n` channel uses. `order` = 0 skips symbol-index draws.
ChannelDraw draw_channel(std::size_t n, std::size_t order, ChannelMode mode, double phase_variance,
                         std::uint64_t seed, unsigned workers = 0);

/// Uniform symbol indices in [0, order) from the Bits stream of `seed`.
std::vector<std::uint32_t> random_indices(std::size_t n, std::size_t order, std::uint64_t seed,
                                          unsigned workers = 0);

struct ChannelRealization {
    std::vector<std::uint32_t> tx_index; ///< empty when the caller supplied symbols
    std::vector<cd> tx;
    std::vector<cd> rx;
    std::vector<double> phase_track;
    std::uint64_t seed = 0;
};

inline cd apply_phase_and_noise(cd x, double theta, cd noise) { return x * std::polar(1.0, theta) + noise; }

/// Uniform i.i.d. symbols from `c` through the channel described by `spec`.
ChannelRealization transmit(const Constellation& c, std::size_t n_symbols, const ChannelSpec& spec,
                            std::uint64_t seed, unsigned workers = 0);

/// Caller-supplied symbol sequence through the channel.
ChannelRealization transmit_symbols(std::span<const cd> tx, const ChannelSpec& spec, std::uint64_t seed,
                                    unsigned workers = 0);

/// CSV dump: k, tx_re, tx_im, rx_re, rx_im, theta.
void write_realization_csv(std::ostream& os, const ChannelRealization& r);

} // namespace pnshape
