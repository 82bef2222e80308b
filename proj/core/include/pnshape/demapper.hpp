#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pnshape/constellation.hpp"

namespace pnshape {

enum class DemapperKind { MismatchedGaussian, Pcawgn };

std::string to_string(DemapperKind kind);
DemapperKind parse_demapper_kind(const std::string& s);

/// Auxiliary channel law used to compute likelihoods.
struct DemapperModel {
    DemapperKind kind = DemapperKind::MismatchedGaussian;
    double n0 = 1.0;
    double phase_variance = 0.0; ///< Pcawgn only; alpha = 1 / phase_variance

    static DemapperModel gaussian(double n0) { return {DemapperKind::MismatchedGaussian, n0, 0.0}; }
    static DemapperModel pcawgn(double n0, double sigma2) { return {DemapperKind::Pcawgn, n0, sigma2}; }

    /// Pcawgn with zero phase variance degenerates to the Gaussian law.
    DemapperKind effective_kind() const noexcept {
        return kind == DemapperKind::Pcawgn && phase_variance > 0.0 ? DemapperKind::Pcawgn
                                                                    : DemapperKind::MismatchedGaussian;
    }
    void validate() const;
    std::string describe() const;
};

/// |LLR| saturation (natural log).
inline constexpr double kLlrClamp = 50.0;

/// Wrap to [-pi, pi).
double wrap_angle(double a) noexcept;

/// ln of the circular Gaussian density (pi n0)^-1 exp(-|y-x|^2 / n0).
double gaussian_metric(cd y, cd x, double n0);

/// ln of the reduced-complexity partially coherent AWGN likelihood with K = 1:
/// -ln(pi gamma n0) - (drho^2 + (gamma dtheta)^2) / n0,
/// gamma = (1/(|x| rho) + 2 sigma2 / n0)^(-1/2). Falls back to the Gaussian
/// law when x or y is at the origin.
double pcawgn_metric(cd y, cd x, double n0, double sigma2);

/// Model-dispatched log-likelihood.
double log_likelihood(cd y, cd x, const DemapperModel& model);

/// Row-major n_symbols x bits matrix. Positive LLR favours bit 0.
struct LlrFrame {
    std::size_t n_symbols = 0;
    unsigned bits = 0;
    std::vector<double> llrs;

    double at(std::size_t k, unsigned i) const { return llrs[k * bits + i]; }
    std::span<const double> row(std::size_t k) const { return {llrs.data() + k * bits, bits}; }
};

/// Per-bit LLRs via max-shifted log-sum-exp, clamped to +-kLlrClamp.
LlrFrame bitwise_llrs(std::span<const cd> y, const Constellation& c, const DemapperModel& model,
                      unsigned workers = 0);

/// CSV dump: k, llr_0, ..., llr_{m-1}.
void write_llr_csv(std::ostream& os, const LlrFrame& f);

} // namespace pnshape
