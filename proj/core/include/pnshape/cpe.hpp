#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "pnshape/channel.hpp"
#include "pnshape/constellation.hpp"
#include "pnshape/demapper.hpp"
#include "pnshape/metrics.hpp"

namespace pnshape {

inline constexpr std::size_t kDefaultPilotSpacing = 32;
inline constexpr std::size_t kMinFilterTaps = 65;

/// Data symbols with one unit-power QPSK pilot after each block of
/// `spacing` data symbols (a final partial block also gets one).
struct PilotFrame {
    std::vector<cd> symbols;          ///< full frame, pilots included
    std::vector<std::uint8_t> is_pilot;
    std::vector<std::size_t> pilot_pos; ///< frame indices of the pilots
    std::vector<cd> pilots;
    std::size_t n_data = 0;
    std::size_t spacing = kDefaultPilotSpacing;

    std::size_t size() const noexcept { return symbols.size(); }
    double overhead() const noexcept { return 1.0 / static_cast<double>(spacing + 1); }
};

PilotFrame insert_pilots(std::span<const cd> data, std::size_t spacing, std::uint64_t seed);
std::vector<cd> remove_pilots(std::span<const cd> frame_symbols, const PilotFrame& layout);

/// arg(y_p conj(x_p)) per pilot, unwrapped along the pilot sequence.
std::vector<double> estimate_pilot_phases(std::span<const cd> frame_rx, const PilotFrame& layout);

struct CpeConfig {
    std::size_t filter_taps = kMinFilterTaps;
    double rpn_design_variance = 0.0; ///< per-symbol Wiener increment variance [rad^2]
    double n0_design = 0.1;           ///< pilot noise; phase measurement variance ~ n0/2

    void validate(std::size_t spacing) const;
};

/// Shortest odd length >= 65 whose edge weight is at most `tol` times the
/// centre weight (capped at 16385 taps).
std::size_t wiener_filter_length(double rpn_design_variance, double n0_design, std::size_t spacing,
                                 double tol = 1e-3);

/// Config designed for a channel: increment variance and n0 taken from spec.
/// `filter_taps` = 0 picks wiener_filter_length().
CpeConfig cpe_config_for(const ChannelSpec& spec, std::size_t filter_taps = 0,
                         std::size_t spacing = kDefaultPilotSpacing);

/// Symmetric smoothing weights over `filter_taps` symbols, centre at index
/// taps/2, summing to one. With pilot period L = spacing + 1, q = L sigma^2
/// and r = n0/2, the weight at lag l is beta^(|l|/L) with
/// beta = 1 + q/(2r) - sqrt((1 + q/(2r))^2 - 1).
std::vector<double> wiener_coefficients(const CpeConfig& cfg, std::size_t spacing);

/// Per-frame-symbol phase estimate: nearest-pilot hold, then the smoothing
/// filter (truncated and renormalized at the frame edges).
std::vector<double> wiener_interpolate(std::span<const double> pilot_phases, const PilotFrame& layout,
                                       const CpeConfig& cfg);

/// Data symbols rotated by exp(-j theta), pilots dropped.
std::vector<cd> derotate_and_strip(std::span<const cd> frame_rx, std::span<const double> theta,
                                   const PilotFrame& layout);

/// Variance of (truth - estimate) over the data positions of the frame.
double residual_phase_variance(std::span<const double> truth, std::span<const double> estimate,
                               const PilotFrame& layout);

struct ValidationResult {
    MetricReport report;            ///< gross (no pilot discount)
    double residual_variance = 0.0; ///< measured post-CPE phase error variance
    std::vector<std::uint32_t> tx_index;
    std::vector<cd> corrected;      ///< derotated data symbols
    std::vector<double> residual;   ///< per data symbol: true - estimated phase
};

/// Random-walk channel with pilots and CPE, then metrics on the corrected
/// data symbols. `spec.mode` may be RandomWalk or AwgnOnly.
ValidationResult validate_chain(const Constellation& c, const ChannelSpec& spec, const DemapperModel& model,
                                std::size_t n_data, const CpeConfig& cfg, std::size_t spacing, std::uint64_t seed,
                                unsigned workers = 0);

/// Measured post-CPE residual phase variance of a random-walk channel.
/// Only the pilots enter the estimate, so no data constellation is needed.
double measure_residual_variance(const ChannelSpec& spec, const CpeConfig& cfg, std::size_t spacing,
                                 std::size_t n_data, std::uint64_t seed, unsigned workers = 0);

/// CSV: k, theta_true, theta_est, residual (data symbols only).
void write_residual_csv(std::ostream& os, std::span<const double> truth, std::span<const double> estimate);

} // namespace pnshape
