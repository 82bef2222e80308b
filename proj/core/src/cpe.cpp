#include "pnshape/cpe.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "pnshape/errors.hpp"
#include "pnshape/parallel.hpp"
#include "pnshape/rng.hpp"

namespace pnshape {

PilotFrame insert_pilots(std::span<const cd> data, std::size_t spacing, std::uint64_t seed) {
    if (spacing == 0)
        throw InvalidArgument("insert_pilots: spacing must be >= 1");
    if (data.empty())
        throw InvalidArgument("insert_pilots: empty data");
    PilotFrame f;
    f.spacing = spacing;
    f.n_data = data.size();
    const std::size_t n_pilots = (data.size() + spacing - 1) / spacing;
    const std::size_t len = data.size() + n_pilots;
    f.symbols.reserve(len);
    f.is_pilot.reserve(len);
    f.pilot_pos.reserve(n_pilots);
    f.pilots.reserve(n_pilots);

    const double a = std::numbers::sqrt2 / 2.0;
    std::mt19937_64 gen;
    for (std::size_t p = 0; p < n_pilots; ++p) {
        if (p % kRngBlock == 0)
            gen = substream(seed, Stream::Pilots, p / kRngBlock);
        const auto q = gen() >> 62;
        const cd pilot{(q & 1U) ? -a : a, (q & 2U) ? -a : a};
        const std::size_t lo = p * spacing;
        const std::size_t hi = std::min(data.size(), lo + spacing);
        for (std::size_t k = lo; k < hi; ++k) {
            f.symbols.push_back(data[k]);
            f.is_pilot.push_back(0);
        }
        f.pilot_pos.push_back(f.symbols.size());
        f.pilots.push_back(pilot);
        f.symbols.push_back(pilot);
        f.is_pilot.push_back(1);
    }
    return f;
}

std::vector<cd> remove_pilots(std::span<const cd> frame_symbols, const PilotFrame& layout) {
    if (frame_symbols.size() != layout.size())
        throw InvalidArgument("remove_pilots: length mismatch");
    std::vector<cd> out;
    out.reserve(layout.n_data);
    for (std::size_t k = 0; k < frame_symbols.size(); ++k)
        if (!layout.is_pilot[k])
            out.push_back(frame_symbols[k]);
    return out;
}

std::vector<double> estimate_pilot_phases(std::span<const cd> frame_rx, const PilotFrame& layout) {
    if (frame_rx.size() != layout.size())
        throw InvalidArgument("estimate_pilot_phases: length mismatch");
    std::vector<double> ph(layout.pilot_pos.size());
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t p = 0; p < ph.size(); ++p) {
        const double raw = std::arg(frame_rx[layout.pilot_pos[p]] * std::conj(layout.pilots[p]));
        if (p == 0) {
            ph[p] = raw;
            continue;
        }
        // Choose the 2pi branch closest to the previous estimate.
        ph[p] = raw + two_pi * std::round((ph[p - 1] - raw) / two_pi);
    }
    return ph;
}

void CpeConfig::validate(std::size_t spacing) const {
    if (filter_taps % 2 == 0 || filter_taps < kMinFilterTaps)
        throw InvalidArgument("CpeConfig: filter_taps must be odd and >= 65");
    if (filter_taps < spacing + 2)
        throw InvalidArgument("CpeConfig: filter must span at least two pilots");
    if (!(rpn_design_variance >= 0.0))
        throw InvalidArgument("CpeConfig: rpn_design_variance must be nonnegative");
    if (!(n0_design > 0.0))
        throw InvalidArgument("CpeConfig: n0_design must be positive");
}

namespace {

double pilot_decay(double rpn_design_variance, double n0_design, std::size_t spacing) {
    const double q = static_cast<double>(spacing + 1) * rpn_design_variance;
    const double r = n0_design / 2.0;
    const double u = 1.0 + q / (2.0 * r);
    return u - std::sqrt(u * u - 1.0);
}

} // namespace

std::size_t wiener_filter_length(double rpn_design_variance, double n0_design, std::size_t spacing, double tol) {
    constexpr std::size_t kMaxTaps = 16385;
    const double beta = pilot_decay(rpn_design_variance, n0_design, spacing);
    const double period = static_cast<double>(spacing + 1);
    std::size_t taps = std::max(kMinFilterTaps, spacing + 2);
    if (beta > 0.0 && beta < 1.0) {
        const double half = std::ceil(period * std::log(tol) / std::log(beta));
        taps = std::max(taps, 2 * static_cast<std::size_t>(half) + 1);
    } else if (beta >= 1.0) {
        taps = kMaxTaps;
    }
    taps = std::min(taps, kMaxTaps);
    return taps % 2 == 0 ? taps + 1 : taps;
}

CpeConfig cpe_config_for(const ChannelSpec& spec, std::size_t filter_taps, std::size_t spacing) {
    CpeConfig cfg;
    cfg.rpn_design_variance = rpn_variance(spec.linewidth_hz, spec.symbol_rate_baud);
    cfg.n0_design = std::max(spec.n0(), 1e-12);
    cfg.filter_taps = filter_taps != 0 ? filter_taps
                                       : wiener_filter_length(cfg.rpn_design_variance, cfg.n0_design, spacing);
    return cfg;
}

std::vector<double> wiener_coefficients(const CpeConfig& cfg, std::size_t spacing) {
    cfg.validate(spacing);
    const double period = static_cast<double>(spacing + 1);
    const double beta = pilot_decay(cfg.rpn_design_variance, cfg.n0_design, spacing);
    const std::size_t taps = cfg.filter_taps;
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(taps / 2);
    std::vector<double> w(taps);
    double sum = 0.0;
    for (std::ptrdiff_t l = -half; l <= half; ++l) {
        const double v = beta > 0.0 ? std::pow(beta, std::abs(static_cast<double>(l)) / period) : (l == 0 ? 1.0 : 0.0);
        w[static_cast<std::size_t>(l + half)] = v;
        sum += v;
    }
    for (double& v : w)
        v /= sum;
    return w;
}

std::vector<double> wiener_interpolate(std::span<const double> pilot_phases, const PilotFrame& layout,
                                       const CpeConfig& cfg) {
    const std::size_t np = layout.pilot_pos.size();
    if (pilot_phases.size() != np)
        throw InvalidArgument("wiener_interpolate: one phase per pilot required");
    if (np < 2)
        throw InvalidArgument("wiener_interpolate: at least two pilots required");
    const auto w = wiener_coefficients(cfg, layout.spacing);
    const std::size_t n = layout.size();

    // Nearest-pilot hold; ties go to the earlier pilot.
    std::vector<double> held(n);
    std::size_t p = 0; // first pilot at or after k
    for (std::size_t k = 0; k < n; ++k) {
        while (p < np && layout.pilot_pos[p] < k)
            ++p;
        std::size_t best;
        if (p == np)
            best = np - 1;
        else if (p == 0)
            best = 0;
        else
            best = layout.pilot_pos[p] - k < k - layout.pilot_pos[p - 1] ? p : p - 1;
        held[k] = pilot_phases[best];
    }

    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(w.size() / 2);
    const auto sn = static_cast<std::ptrdiff_t>(n);
    std::vector<double> out(n);
    for (std::ptrdiff_t k = 0; k < sn; ++k) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, k - half);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(sn - 1, k + half);
        double acc = 0.0;
        double wsum = 0.0;
        for (std::ptrdiff_t j = lo; j <= hi; ++j) {
            const double wj = w[static_cast<std::size_t>(j - k + half)];
            acc += wj * held[static_cast<std::size_t>(j)];
            wsum += wj;
        }
        out[static_cast<std::size_t>(k)] = acc / wsum;
    }
    return out;
}

std::vector<cd> derotate_and_strip(std::span<const cd> frame_rx, std::span<const double> theta,
                                   const PilotFrame& layout) {
    if (frame_rx.size() != layout.size() || theta.size() != layout.size())
        throw InvalidArgument("derotate_and_strip: length mismatch");
    std::vector<cd> out;
    out.reserve(layout.n_data);
    for (std::size_t k = 0; k < frame_rx.size(); ++k)
        if (!layout.is_pilot[k])
            out.push_back(frame_rx[k] * std::polar(1.0, -theta[k]));
    return out;
}

double residual_phase_variance(std::span<const double> truth, std::span<const double> estimate,
                               const PilotFrame& layout) {
    if (truth.size() != layout.size() || estimate.size() != layout.size())
        throw InvalidArgument("residual_phase_variance: length mismatch");
    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        if (layout.is_pilot[k])
            continue;
        const double e = truth[k] - estimate[k];
        sum += e;
        sum2 += e * e;
        ++n;
    }
    if (n < 2)
        throw InvalidArgument("residual_phase_variance: need at least two data symbols");
    const double mean = sum / static_cast<double>(n);
    return (sum2 - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
}

ValidationResult validate_chain(const Constellation& c, const ChannelSpec& spec, const DemapperModel& model,
                                std::size_t n_data, const CpeConfig& cfg, std::size_t spacing, std::uint64_t seed,
                                unsigned workers) {
    if (spec.mode == ChannelMode::GaussianRpn)
        throw InvalidArgument("validate_chain: use random_walk or awgn mode");
    ValidationResult res;
    res.tx_index = random_indices(n_data, c.order(), seed, workers);
    std::vector<cd> data(n_data);
    for (std::size_t k = 0; k < n_data; ++k)
        data[k] = c.points()[res.tx_index[k]];
    const auto frame = insert_pilots(data, spacing, seed);
    const auto rx = transmit_symbols(frame.symbols, spec, seed, workers);
    const auto ph = estimate_pilot_phases(rx.rx, frame);
    const auto theta = wiener_interpolate(ph, frame, cfg);
    res.corrected = derotate_and_strip(rx.rx, theta, frame);
    res.residual_variance = residual_phase_variance(rx.phase_track, theta, frame);
    res.residual.reserve(n_data);
    for (std::size_t k = 0; k < frame.size(); ++k)
        if (!frame.is_pilot[k])
            res.residual.push_back(rx.phase_track[k] - theta[k]);
    res.report = evaluate_samples(c, res.tx_index, res.corrected, model, workers);
    res.report.seed = seed;
    return res;
}

double measure_residual_variance(const ChannelSpec& spec, const CpeConfig& cfg, std::size_t spacing,
                                 std::size_t n_data, std::uint64_t seed, unsigned workers) {
    if (spec.mode != ChannelMode::RandomWalk)
        throw InvalidArgument("measure_residual_variance: channel mode must be random_walk");
    const std::vector<cd> data(n_data, cd{0.0, 0.0});
    const auto frame = insert_pilots(data, spacing, seed);
    const auto rx = transmit_symbols(frame.symbols, spec, seed, workers);
    const auto theta = wiener_interpolate(estimate_pilot_phases(rx.rx, frame), frame, cfg);
    return residual_phase_variance(rx.phase_track, theta, frame);
}

void write_residual_csv(std::ostream& os, std::span<const double> truth, std::span<const double> estimate) {
    if (truth.size() != estimate.size())
        throw InvalidArgument("write_residual_csv: length mismatch");
    const auto old = os.precision(17);
    os << "k,theta_true,theta_est,residual\n";
    for (std::size_t k = 0; k < truth.size(); ++k)
        os << k << ',' << truth[k] << ',' << estimate[k] << ',' << truth[k] - estimate[k] << '\n';
    os.precision(old);
}

} // namespace pnshape
