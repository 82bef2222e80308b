#pragma once

#include <cstdint>
#include <vector>

#include "pnshape/constellation.hpp"
#include "pnshape/demapper.hpp"

namespace pnshape::detail {

/// log2(1 + other/own), saturating where the clamped LLR would saturate.
double loss_from_ratio(double own, double other) noexcept;
double clamp_llr(double s0, double s1) noexcept;

/// Contributions of one received sample with known transmitted index.
struct SampleTerms {
    double gmi_loss = 0.0; ///< sum_i log2(1 + exp(-(1 - 2 b_i) llr_i))
    double mi = 0.0;       ///< log2 f(y|x_tx) / f_Y(y)
    int symbol_error = 0;  ///< min-distance decision differs from tx
    int bit_errors = 0;    ///< LLR-sign decisions differing from tx bits
};

/// Precomputed point tables for fast per-sample soft demapping.
///
/// Log-metrics are computed up to the additive constant -ln(pi n0), which
/// cancels in LLRs and in the MI ratio. Terms more than kSkip nats below the
/// per-sample maximum are dropped from the sums; that only affects LLRs whose
/// magnitude already exceeds the clamp.
class SoftKernel {
  public:
    static constexpr double kSkip = 60.0;

    SoftKernel(const Constellation& c, const DemapperModel& model);

    std::size_t order() const noexcept { return re_.size(); }
    unsigned bits() const noexcept { return bits_; }
    /// Doubles of scratch needed by the per-sample calls.
    std::size_t scratch_size() const noexcept { return 2 * re_.size() + 2 * bits_ + 2; }

    /// Writes log-metrics to d[0..M) and returns the maximum.
    double log_metrics(cd y, double* d) const noexcept;

    /// Clamped LLRs into llr[0..m).
    void llrs(cd y, double* llr, double* scratch) const noexcept;

    SampleTerms terms(cd y, std::uint32_t tx, double* scratch) const noexcept;

    /// GMI loss only (the optimizer objective's hot path).
    double gmi_loss(cd y, std::uint32_t tx, double* scratch) const noexcept;

    /// Gaussian model only: accumulates weight * dG/dc_j into grad (complex
    /// encodes d/dre + j d/dim), where G = -gmi_loss for the sample
    /// y = c_tx * rot + noise with the noise held fixed.
    void accumulate_gradient(cd y, std::uint32_t tx, cd rot, double weight, double* scratch,
                             cd* grad) const noexcept;

    std::uint32_t nearest(cd y) const noexcept;

    /// Fills e[j] = exp(d[j] - dmax) (0 when skipped) and s[2b + v], the sum
    /// over points whose bit b equals v; returns the total.
    double exp_sums(const double* d, double dmax, double* e, double* s) const noexcept;

    std::uint32_t label(std::size_t j) const noexcept { return labels_[j]; }

  private:

    std::vector<double> re_, im_, amp_, ang_;
    std::vector<std::uint32_t> labels_;
    unsigned bits_;
    DemapperKind kind_;
    double inv_n0_, two_s2_over_n0_;
};

} // namespace pnshape::detail
