#include "pnshape/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pnshape/errors.hpp"
#include "pnshape/parallel.hpp"
#include "pnshape/rng.hpp"
#include "soft_kernel.hpp"

namespace pnshape {

namespace {

void require_samples(std::size_t n) {
    if (n < kMinMonteCarloSymbols)
        throw InsufficientSamples("Monte-Carlo estimate needs at least " + std::to_string(kMinMonteCarloSymbols) +
                                  " symbols, got " + std::to_string(n));
}

struct Partial {
    double gmi_loss = 0.0;
    double mi = 0.0;
    double sym_err = 0.0;
    double bit_err = 0.0;
};

} // namespace

DemapperModel matched_model(const ChannelSpec& spec, DemapperKind kind) {
    const double n0 = std::max(spec.n0(), 1e-12);
    if (kind == DemapperKind::Pcawgn)
        return DemapperModel::pcawgn(n0, spec.phase_variance());
    return DemapperModel::gaussian(n0);
}

MetricReport evaluate_samples(const Constellation& c, std::span<const std::uint32_t> tx, std::span<const cd> rx,
                              const DemapperModel& model, unsigned workers) {
    if (tx.size() != rx.size())
        throw InvalidArgument("evaluate_samples: tx/rx length mismatch");
    if (rx.empty())
        throw InvalidArgument("evaluate_samples: no samples");
    const detail::SoftKernel kernel(c, model);
    const std::size_t n = rx.size();
    const std::size_t blocks = block_count(n, kRngBlock);
    std::vector<Partial> part(blocks);

    parallel_for(blocks, workers, [&](std::size_t b) {
        std::vector<double> scratch(kernel.scratch_size());
        Partial p;
        const std::size_t hi = std::min(n, (b + 1) * kRngBlock);
        for (std::size_t k = b * kRngBlock; k < hi; ++k) {
            const auto t = kernel.terms(rx[k], tx[k], scratch.data());
            p.gmi_loss += t.gmi_loss;
            p.mi += t.mi;
            p.sym_err += t.symbol_error;
            p.bit_err += t.bit_errors;
        }
        part[b] = p;
    });

    auto reduce = [&](double Partial::*field) {
        std::vector<double> v(blocks);
        for (std::size_t b = 0; b < blocks; ++b)
            v[b] = part[b].*field;
        return pairwise_sum(v);
    };
    const double nn = static_cast<double>(n);
    const double m = c.bits_per_symbol();
    MetricReport r;
    r.gmi_bits = m - reduce(&Partial::gmi_loss) / nn;
    r.mi_bits = reduce(&Partial::mi) / nn;
    r.ser = reduce(&Partial::sym_err) / nn;
    r.pre_fec_ber = reduce(&Partial::bit_err) / (nn * m);
    r.n_symbols = n;
    r.model = model;
    return r;
}

MetricReport gmi_montecarlo(const Constellation& c, const ChannelSpec& spec, const DemapperModel& model,
                            std::size_t n, std::uint64_t seed, unsigned workers) {
    require_samples(n);
    const auto real = transmit(c, n, spec, seed, workers);
    auto r = evaluate_samples(c, real.tx_index, real.rx, model, workers);
    r.seed = seed;
    return r;
}

double mi_montecarlo(const Constellation& c, const ChannelSpec& spec, const DemapperModel& model, std::size_t n,
                     std::uint64_t seed, unsigned workers) {
    return gmi_montecarlo(c, spec, model, n, seed, workers).mi_bits;
}

double ser(const Constellation& c, const ChannelSpec& spec, std::size_t n, std::uint64_t seed, unsigned workers) {
    return gmi_montecarlo(c, spec, matched_model(spec), n, seed, workers).ser;
}

double pre_fec_ber(const Constellation& c, const ChannelSpec& spec, const DemapperModel& model, std::size_t n,
                   std::uint64_t seed, unsigned workers) {
    return gmi_montecarlo(c, spec, model, n, seed, workers).pre_fec_ber;
}

double gmi_gauss_hermite(const Constellation& c, double snr_db, std::size_t order) {
    if (order < 8)
        throw InvalidArgument("gmi_gauss_hermite: order must be >= 8");
    ChannelSpec spec;
    spec.snr_db = snr_db;
    const auto model = matched_model(spec);
    const auto rule = gauss_hermite_rule(order);
    const detail::SoftKernel kernel(c, model);
    std::vector<double> scratch(kernel.scratch_size());
    const double s = std::sqrt(model.n0);
    const std::size_t m = c.order();

    std::vector<double> per_point(m);
    for (std::size_t t = 0; t < m; ++t) {
        double acc = 0.0;
        for (std::size_t i = 0; i < order; ++i) {
            for (std::size_t j = 0; j < order; ++j) {
                const cd y = c.points()[t] + s * cd{rule.nodes[i], rule.nodes[j]};
                acc += rule.weights[i] * rule.weights[j] *
                       kernel.gmi_loss(y, static_cast<std::uint32_t>(t), scratch.data());
            }
        }
        per_point[t] = acc / std::numbers::pi;
    }
    return c.bits_per_symbol() - pairwise_sum(per_point) / static_cast<double>(m);
}

double apply_pilot_discount(double gmi, std::size_t spacing) {
    if (!(gmi >= 0.0))
        throw InvalidArgument("apply_pilot_discount: gmi must be nonnegative");
    if (spacing == 0)
        throw InvalidArgument("apply_pilot_discount: spacing must be >= 1");
    return gmi * static_cast<double>(spacing) / static_cast<double>(spacing + 1);
}

MetricReport apply_pilot_discount(const MetricReport& r, std::size_t spacing) {
    MetricReport out = r;
    if (!r.net_factor_applied) {
        out.gmi_bits = apply_pilot_discount(std::max(0.0, r.gmi_bits), spacing);
        out.mi_bits = apply_pilot_discount(std::max(0.0, r.mi_bits), spacing);
        out.net_factor_applied = true;
    }
    return out;
}

double interpolate_crossing(std::span<const double> x, std::span<const double> y, double threshold) {
    if (x.size() != y.size())
        throw InvalidArgument("interpolate_crossing: size mismatch");
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = y[i] - threshold;
        const double b = y[i + 1] - threshold;
        if (a == 0.0)
            return x[i];
        if ((a < 0.0) != (b < 0.0) || b == 0.0) {
            const double f = a / (a - b);
            return x[i] + f * (x[i + 1] - x[i]);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

BinomialInterval wilson_interval(std::size_t errors, std::size_t trials, double z) {
    if (trials == 0 || errors > trials)
        throw InvalidArgument("wilson_interval: need 0 <= errors <= trials, trials > 0");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double z2 = z * z;
    const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

} // namespace pnshape
