#include "soft_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pnshape::detail {

namespace {
constexpr double kInvLn2 = 1.0 / std::numbers::ln2;
} // namespace

// log2(1 + exp(-z)) for the clamped LLR z = (1 - 2b) llr, given the ratio
// r = S_other / S_own = exp(-z_unclamped).
double loss_from_ratio(double own, double other) noexcept {
    static const double lo = std::log1p(std::exp(-kLlrClamp)) * kInvLn2;
    static const double hi = std::log1p(std::exp(kLlrClamp)) * kInvLn2;
    static const double r_hi = std::exp(kLlrClamp);
    static const double r_lo = std::exp(-kLlrClamp);
    if (own <= 0.0)
        return hi;
    const double r = other / own;
    if (r >= r_hi)
        return hi;
    if (r <= r_lo)
        return lo;
    return std::log1p(r) * kInvLn2;
}

double clamp_llr(double s0, double s1) noexcept {
    if (s1 <= 0.0)
        return kLlrClamp;
    if (s0 <= 0.0)
        return -kLlrClamp;
    return std::clamp(std::log(s0 / s1), -kLlrClamp, kLlrClamp);
}

SoftKernel::SoftKernel(const Constellation& c, const DemapperModel& model)
    : bits_(c.bits_per_symbol()), kind_(model.effective_kind()), inv_n0_(1.0 / model.n0),
      two_s2_over_n0_(2.0 * model.phase_variance / model.n0) {
    model.validate();
    const std::size_t m = c.order();
    re_.resize(m);
    im_.resize(m);
    amp_.resize(m);
    ang_.resize(m);
    labels_.assign(c.labels().begin(), c.labels().end());
    for (std::size_t j = 0; j < m; ++j) {
        const cd p = c.points()[j];
        re_[j] = p.real();
        im_[j] = p.imag();
        amp_[j] = std::abs(p);
        ang_[j] = std::arg(p);
    }
}

double SoftKernel::log_metrics(cd y, double* d) const noexcept {
    const std::size_t m = re_.size();
    const double yr = y.real();
    const double yi = y.imag();
    double dmax = -std::numeric_limits<double>::infinity();
    if (kind_ == DemapperKind::MismatchedGaussian) {
        for (std::size_t j = 0; j < m; ++j) {
            const double dr = yr - re_[j];
            const double di = yi - im_[j];
            const double v = -(dr * dr + di * di) * inv_n0_;
            d[j] = v;
            dmax = v > dmax ? v : dmax;
        }
        return dmax;
    }
    const double rho = std::hypot(yr, yi);
    const double ay = std::atan2(yi, yr);
    for (std::size_t j = 0; j < m; ++j) {
        double v;
        if (amp_[j] == 0.0 || rho == 0.0) {
            const double dr = yr - re_[j];
            const double di = yi - im_[j];
            v = -(dr * dr + di * di) * inv_n0_;
        } else {
            const double drho = rho - amp_[j];
            const double dth = wrap_angle(ay - ang_[j]);
            const double g2 = 1.0 / (1.0 / (amp_[j] * rho) + two_s2_over_n0_);
            v = -0.5 * std::log(g2) - (drho * drho + g2 * dth * dth) * inv_n0_;
        }
        d[j] = v;
        dmax = v > dmax ? v : dmax;
    }
    return dmax;
}

double SoftKernel::exp_sums(const double* d, double dmax, double* e, double* s) const noexcept {
    const std::size_t m = re_.size();
    const unsigned nb = bits_;
    std::fill(s, s + 2 * nb, 0.0);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double x = d[j] - dmax;
        if (x < -kSkip) {
            e[j] = 0.0;
            continue;
        }
        const double ej = std::exp(x);
        e[j] = ej;
        total += ej;
        const std::uint32_t lab = labels_[j];
        for (unsigned b = 0; b < nb; ++b)
            s[2 * b + ((lab >> (nb - 1 - b)) & 1U)] += ej;
    }
    return total;
}

void SoftKernel::llrs(cd y, double* llr, double* scratch) const noexcept {
    const std::size_t m = re_.size();
    double* d = scratch;
    double* e = scratch + m;
    double* s = scratch + 2 * m;
    const double dmax = log_metrics(y, d);
    exp_sums(d, dmax, e, s);
    for (unsigned b = 0; b < bits_; ++b)
        llr[b] = clamp_llr(s[2 * b], s[2 * b + 1]);
}

SampleTerms SoftKernel::terms(cd y, std::uint32_t tx, double* scratch) const noexcept {
    const std::size_t m = re_.size();
    double* d = scratch;
    double* e = scratch + m;
    double* s = scratch + 2 * m;
    const double dmax = log_metrics(y, d);
    const double total = exp_sums(d, dmax, e, s);

    SampleTerms t;
    const std::uint32_t lab = labels_[tx];
    for (unsigned b = 0; b < bits_; ++b) {
        const unsigned tb = (lab >> (bits_ - 1 - b)) & 1U;
        const double own = s[2 * b + tb];
        const double other = s[2 * b + (1 - tb)];
        t.gmi_loss += loss_from_ratio(own, other);
        const unsigned decided = s[2 * b + 1] > s[2 * b] ? 1U : 0U;
        t.bit_errors += decided != tb ? 1 : 0;
    }
    t.mi = std::log2(static_cast<double>(m)) + (d[tx] - dmax - std::log(total)) * kInvLn2;
    t.symbol_error = nearest(y) != tx ? 1 : 0;
    return t;
}

double SoftKernel::gmi_loss(cd y, std::uint32_t tx, double* scratch) const noexcept {
    const std::size_t m = re_.size();
    double* d = scratch;
    double* e = scratch + m;
    double* s = scratch + 2 * m;
    const double dmax = log_metrics(y, d);
    exp_sums(d, dmax, e, s);
    const std::uint32_t lab = labels_[tx];
    double loss = 0.0;
    for (unsigned b = 0; b < bits_; ++b) {
        const unsigned tb = (lab >> (bits_ - 1 - b)) & 1U;
        loss += loss_from_ratio(s[2 * b + tb], s[2 * b + (1 - tb)]);
    }
    return loss;
}

void SoftKernel::accumulate_gradient(cd y, std::uint32_t tx, cd rot, double weight, double* scratch,
                                     cd* grad) const noexcept {
    const std::size_t m = re_.size();
    double* d = scratch;
    double* e = scratch + m;
    double* s = scratch + 2 * m;
    const double dmax = log_metrics(y, d);
    const double total = exp_sums(d, dmax, e, s);
    const std::uint32_t lab_tx = labels_[tx];

    // dG/d(ln e_j) = (1/ln2) sum_b ([bit_b(j) == b_tx] e_j / S_b,own - e_j / S)
    double inv_own[32];
    for (unsigned b = 0; b < bits_; ++b) {
        const unsigned tb = (lab_tx >> (bits_ - 1 - b)) & 1U;
        const double own = s[2 * b + tb];
        inv_own[b] = own > 0.0 ? 1.0 / own : 0.0;
    }
    const double inv_total = 1.0 / total;
    const double scale = weight * kInvLn2 * 2.0 * inv_n0_;
    cd gy{0.0, 0.0};
    for (std::size_t j = 0; j < m; ++j) {
        if (e[j] == 0.0)
            continue;
        const std::uint32_t diff = labels_[j] ^ lab_tx;
        double acc = -static_cast<double>(bits_) * inv_total;
        for (unsigned b = 0; b < bits_; ++b) {
            if (((diff >> (bits_ - 1 - b)) & 1U) == 0)
                acc += inv_own[b];
        }
        const double w = e[j] * acc * scale;
        const cd delta{y.real() - re_[j], y.imag() - im_[j]};
        grad[j] += w * delta;
        gy -= w * delta;
    }
    grad[tx] += std::conj(rot) * gy;
}

std::uint32_t SoftKernel::nearest(cd y) const noexcept {
    const std::size_t m = re_.size();
    std::uint32_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
        const double dr = y.real() - re_[j];
        const double di = y.imag() - im_[j];
        const double v = dr * dr + di * di;
        if (v < bd) {
            bd = v;
            best = static_cast<std::uint32_t>(j);
        }
    }
    return best;
}

} // namespace pnshape::detail
