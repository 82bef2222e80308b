#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pnshape/channel.hpp"
#include "pnshape/constellation.hpp"
#include "pnshape/demapper.hpp"

namespace pnshape {

/// Smallest Monte-Carlo sample count accepted by the estimators.
inline constexpr std::size_t kMinMonteCarloSymbols = std::size_t{1} << 14;

struct MetricReport {
    double mi_bits = 0.0;
    double gmi_bits = 0.0;
    double ser = 0.0;
    double pre_fec_ber = 0.0;
    std::size_t n_symbols = 0;
    std::uint64_t seed = 0;
    DemapperModel model{};
    bool net_factor_applied = false;
};

/// Demapper matched to the channel's noise (and phase variance for Pcawgn).
/// An infinite SNR maps to a tiny positive n0 so that LLRs saturate.
DemapperModel matched_model(const ChannelSpec& spec, DemapperKind kind = DemapperKind::MismatchedGaussian);

/// MI, GMI (s = 1), SER and pre-FEC BER from received samples with known
/// transmitted indices. Sample-average forms; no minimum size.
MetricReport evaluate_samples(const Constellation& c, std::span<const std::uint32_t> tx, std::span<const cd> rx,
                              const DemapperModel& model, unsigned workers = 0);

/// All four estimates on one realization of `n` symbols (n >= 2^14).
MetricReport gmi_montecarlo(const Constellation& c, const ChannelSpec& spec, const DemapperModel& model,
                            std::size_t n, std::uint64_t seed, unsigned workers = 0);

double mi_montecarlo(const Constellation& c, const ChannelSpec& spec, const DemapperModel& model, std::size_t n,
                     std::uint64_t seed, unsigned workers = 0);

/// Minimum-Euclidean-distance symbol error rate.
double ser(const Constellation& c, const ChannelSpec& spec, std::size_t n, std::uint64_t seed,
           unsigned workers = 0);

/// Fraction of LLR-sign decisions differing from the transmitted bits.
double pre_fec_ber(const Constellation& c, const ChannelSpec& spec, const DemapperModel& model, std::size_t n,
                   std::uint64_t seed, unsigned workers = 0);

/// Nodes/weights for integrals of the form int exp(-t^2) f(t) dt.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussHermiteRule gauss_hermite_rule(std::size_t order);

inline constexpr std::size_t kDefaultGaussHermiteOrder = 16;

/// Deterministic AWGN GMI by tensor Gauss-Hermite quadrature over the complex
/// noise, matched Gaussian demapper.
double gmi_gauss_hermite(const Constellation& c, double snr_db, std::size_t order = kDefaultGaussHermiteOrder);

/// GMI net of a one-in-(spacing+1) pilot overhead: gmi * spacing / (spacing + 1).
double apply_pilot_discount(double gmi, std::size_t spacing = 32);
MetricReport apply_pilot_discount(const MetricReport& r, std::size_t spacing = 32);

/// Linear interpolation of the first crossing of `threshold` (either
/// direction) in a curve sampled at increasing x. NaN when none exists.
double interpolate_crossing(std::span<const double> x, std::span<const double> y, double threshold);

struct BinomialInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Wilson score interval for `errors` out of `trials` (z = 1.96 for 95%).
BinomialInterval wilson_interval(std::size_t errors, std::size_t trials, double z = 1.96);

} // namespace pnshape
