#include "pnshape/objective.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pnshape/errors.hpp"
#include "pnshape/metrics.hpp"
#include "pnshape/parallel.hpp"
#include "pnshape/rng.hpp"
#include "soft_kernel.hpp"

namespace pnshape {

std::vector<cd> Objective::gradient(const Constellation& c, double h) const {
    if (!(h > 0.0))
        throw InvalidArgument("gradient: probe must be positive");
    std::vector<cd> g(c.order());
    for (std::size_t i = 0; i < c.order(); ++i) {
        const cd p = c.point(i);
        double d[2];
        for (int a = 0; a < 2; ++a) {
            const cd e = a == 0 ? cd{h, 0.0} : cd{0.0, h};
            d[a] = (value(with_point(c, i, p + e)) - value(with_point(c, i, p - e))) / (2.0 * h);
        }
        g[i] = {d[0], d[1]};
    }
    return g;
}

std::vector<double> Objective::swap_values(const Constellation& c) const {
    const std::size_t m = c.order();
    std::vector<double> out(m * m);
    const double base = value(c);
    for (std::size_t i = 0; i < m; ++i) {
        out[i * m + i] = base;
        for (std::size_t k = i + 1; k < m; ++k) {
            const double v = value(swap_labels(c, i, k));
            out[i * m + k] = v;
            out[k * m + i] = v;
        }
    }
    return out;
}

namespace {

// Per-block partial sums reduced in block order.
template <class Fn>
double blocked_sum(std::size_t n, unsigned workers, Fn&& per_sample_block) {
    const std::size_t blocks = block_count(n, kRngBlock);
    std::vector<double> part(blocks);
    parallel_for(blocks, workers, [&](std::size_t b) {
        part[b] = per_sample_block(b * kRngBlock, std::min(n, (b + 1) * kRngBlock));
    });
    return pairwise_sum(part);
}

} // namespace

double SampledGmiObjective::value(const Constellation& c) const {
    const detail::SoftKernel kernel(c, model_);
    const auto pts = c.points();
    const double loss = blocked_sum(tx_.size(), workers_, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> scratch(kernel.scratch_size());
        double acc = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            const cd y = pts[tx_[k]] * rot_[k] + offset_[k];
            acc += weight_[k] * kernel.gmi_loss(y, tx_[k], scratch.data());
        }
        return acc;
    });
    return static_cast<double>(c.bits_per_symbol()) - loss;
}

std::vector<cd> SampledGmiObjective::gradient(const Constellation& c, double h) const {
    if (model_.effective_kind() != DemapperKind::MismatchedGaussian)
        return Objective::gradient(c, h);
    const detail::SoftKernel kernel(c, model_);
    const auto pts = c.points();
    const std::size_t m = c.order();
    const std::size_t n = tx_.size();
    const std::size_t blocks = block_count(n, kRngBlock);
    std::vector<std::vector<cd>> part(blocks, std::vector<cd>(m));
    parallel_for(blocks, workers_, [&](std::size_t b) {
        std::vector<double> scratch(kernel.scratch_size());
        auto& g = part[b];
        const std::size_t hi = std::min(n, (b + 1) * kRngBlock);
        for (std::size_t k = b * kRngBlock; k < hi; ++k) {
            const cd y = pts[tx_[k]] * rot_[k] + offset_[k];
            kernel.accumulate_gradient(y, tx_[k], rot_[k], weight_[k], scratch.data(), g.data());
        }
    });
    std::vector<cd> g(m);
    std::vector<double> re(blocks), im(blocks);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t b = 0; b < blocks; ++b) {
            re[b] = part[b][j].real();
            im[b] = part[b][j].imag();
        }
        g[j] = {pairwise_sum(re), pairwise_sum(im)};
    }
    return g;
}

// Only labels change, so the posterior weights of every sample are fixed.
// A swap (a, b) alters the per-bit sums only on bits where the two labels
// differ, and only for samples where e_a or e_b is nonzero or tx is a or b.
std::vector<double> SampledGmiObjective::swap_values(const Constellation& c) const {
    const detail::SoftKernel kernel(c, model_);
    const auto pts = c.points();
    const std::size_t m = c.order();
    const unsigned nb = c.bits_per_symbol();
    const std::size_t n = tx_.size();
    const std::size_t blocks = block_count(n, kRngBlock);
    std::vector<std::vector<double>> part(blocks);

    parallel_for(blocks, workers_, [&](std::size_t blk) {
        auto& delta = part[blk];
        delta.assign(m * m, 0.0);
        std::vector<double> d(m), e(m), s(2 * nb);
        std::vector<std::uint32_t> active;
        std::vector<char> is_active(m, 0);
        std::vector<double> base_loss(nb);
        const std::size_t hi = std::min(n, (blk + 1) * kRngBlock);
        for (std::size_t k = blk * kRngBlock; k < hi; ++k) {
            const std::uint32_t t = tx_[k];
            const cd y = pts[t] * rot_[k] + offset_[k];
            const double dmax = kernel.log_metrics(y, d.data());
            kernel.exp_sums(d.data(), dmax, e.data(), s.data());
            const std::uint32_t lt = kernel.label(t);
            for (unsigned b = 0; b < nb; ++b) {
                const unsigned tb = (lt >> (nb - 1 - b)) & 1U;
                base_loss[b] = detail::loss_from_ratio(s[2 * b + tb], s[2 * b + 1 - tb]);
            }
            active.clear();
            for (std::uint32_t j = 0; j < m; ++j) {
                if (e[j] > 0.0 || j == t) {
                    active.push_back(j);
                    is_active[j] = 1;
                }
            }
            const double w = weight_[k];
            for (std::uint32_t a : active) {
                const std::uint32_t la = kernel.label(a);
                for (std::uint32_t bq = 0; bq < m; ++bq) {
                    if (bq == a || (is_active[bq] && bq < a))
                        continue;
                    const std::uint32_t lb = kernel.label(bq);
                    const std::uint32_t diff = la ^ lb;
                    const std::uint32_t new_lt = t == a ? lb : (t == bq ? la : lt);
                    const double de = e[bq] - e[a];
                    double dl = 0.0;
                    for (unsigned b = 0; b < nb; ++b) {
                        const unsigned sh = nb - 1 - b;
                        const bool flips = (diff >> sh) & 1U;
                        if (!flips && new_lt == lt)
                            continue;
                        double s0 = s[2 * b];
                        double s1 = s[2 * b + 1];
                        if (flips) {
                            // Point a now carries lb's bit, point bq carries la's bit.
                            if ((la >> sh) & 1U) {
                                s1 += de;
                                s0 -= de;
                            } else {
                                s0 += de;
                                s1 -= de;
                            }
                            s0 = std::max(s0, 0.0);
                            s1 = std::max(s1, 0.0);
                        }
                        const unsigned tb = (new_lt >> sh) & 1U;
                        const double own = tb ? s1 : s0;
                        const double other = tb ? s0 : s1;
                        dl += detail::loss_from_ratio(own, other) - base_loss[b];
                    }
                    const std::size_t lo_i = std::min(a, bq);
                    const std::size_t hi_i = std::max(a, bq);
                    delta[lo_i * m + hi_i] += w * dl;
                }
            }
            for (std::uint32_t a : active)
                is_active[a] = 0;
        }
    });

    const double base = value(c);
    std::vector<double> out(m * m, base);
    std::vector<double> col(blocks);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            for (std::size_t b = 0; b < blocks; ++b)
                col[b] = part[b][i * m + j];
            const double v = base - pairwise_sum(col);
            out[i * m + j] = v;
            out[j * m + i] = v;
        }
    }
    return out;
}

GaussHermiteObjective::GaussHermiteObjective(std::size_t order_m, double snr_db, std::size_t nodes,
                                             unsigned workers)
    : SampledGmiObjective(DemapperModel{}, workers), snr_db_(snr_db), nodes_(nodes) {
    if (nodes < 8)
        throw InvalidArgument("GaussHermiteObjective: at least 8 nodes required");
    ChannelSpec spec;
    spec.snr_db = snr_db;
    model_ = matched_model(spec);
    const auto rule = gauss_hermite_rule(nodes);
    const double s = std::sqrt(model_.n0);
    const double norm = 1.0 / (std::numbers::pi * static_cast<double>(order_m));
    const std::size_t total = order_m * nodes * nodes;
    tx_.reserve(total);
    rot_.assign(total, cd{1.0, 0.0});
    offset_.reserve(total);
    weight_.reserve(total);
    for (std::size_t t = 0; t < order_m; ++t) {
        for (std::size_t i = 0; i < nodes; ++i) {
            for (std::size_t j = 0; j < nodes; ++j) {
                tx_.push_back(static_cast<std::uint32_t>(t));
                offset_.push_back(s * cd{rule.nodes[i], rule.nodes[j]});
                weight_.push_back(rule.weights[i] * rule.weights[j] * norm);
            }
        }
    }
}

std::string GaussHermiteObjective::describe() const {
    std::ostringstream os;
    os << "gauss_hermite(snr_db=" << snr_db_ << ",nodes=" << nodes_ << ")";
    return os.str();
}

MonteCarloObjective::MonteCarloObjective(std::size_t order_m, const ChannelSpec& spec, const DemapperModel& model,
                                         std::size_t n_symbols, std::uint64_t seed, unsigned workers)
    : SampledGmiObjective(model, workers), order_(order_m), spec_(spec), n_(n_symbols), seed_(seed) {
    spec.validate();
    model.validate();
    if (n_symbols < kMinMonteCarloSymbols)
        throw InsufficientSamples("MonteCarloObjective: too few symbols per iteration");
    refresh(0);
}

void MonteCarloObjective::refresh(std::uint64_t round) {
    const auto draw = draw_channel(n_, order_, spec_.mode, spec_.phase_variance(),
                                   derive_seed(seed_, static_cast<std::uint64_t>(Stream::Objective), round),
                                   workers_);
    const double s = std::sqrt(spec_.n0());
    tx_ = draw.tx;
    rot_.resize(n_);
    offset_.resize(n_);
    weight_.assign(n_, 1.0 / static_cast<double>(n_));
    for (std::size_t k = 0; k < n_; ++k) {
        rot_[k] = std::polar(1.0, draw.theta[k]);
        offset_[k] = s * draw.noise[k];
    }
}

std::string MonteCarloObjective::describe() const {
    std::ostringstream os;
    os << "monte_carlo(snr_db=" << spec_.snr_db << ",sigma2=" << spec_.phase_variance() << ",n=" << n_
       << ",model=" << model_.describe() << ")";
    return os.str();
}

} // namespace pnshape
