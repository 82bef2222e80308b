#include "pnshape/demapper.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "pnshape/errors.hpp"
#include "pnshape/parallel.hpp"
#include "pnshape/rng.hpp"
#include "soft_kernel.hpp"

namespace pnshape {

std::string to_string(DemapperKind kind) {
    return kind == DemapperKind::MismatchedGaussian ? "gaussian" : "pcawgn";
}

DemapperKind parse_demapper_kind(const std::string& s) {
    if (s == "gaussian" || s == "mismatched_gaussian")
        return DemapperKind::MismatchedGaussian;
    if (s == "pcawgn")
        return DemapperKind::Pcawgn;
    throw InvalidArgument("unknown demapper model '" + s + "'");
}

void DemapperModel::validate() const {
    if (!(n0 > 0.0) || !std::isfinite(n0))
        throw InvalidArgument("DemapperModel: n0 must be positive and finite");
    if (!(phase_variance >= 0.0))
        throw InvalidArgument("DemapperModel: phase variance must be nonnegative");
}

std::string DemapperModel::describe() const {
    std::ostringstream os;
    os.precision(6);
    os << to_string(effective_kind()) << "(n0=" << n0;
    if (effective_kind() == DemapperKind::Pcawgn)
        os << ",sigma2=" << phase_variance;
    os << ")";
    return os.str();
}

double wrap_angle(double a) noexcept {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = a - two_pi * std::floor((a + std::numbers::pi) / two_pi);
    if (w >= std::numbers::pi)
        w -= two_pi;
    return w;
}

double gaussian_metric(cd y, cd x, double n0) { return -std::norm(y - x) / n0 - std::log(std::numbers::pi * n0); }

double pcawgn_metric(cd y, cd x, double n0, double sigma2) {
    const double ax = std::abs(x);
    const double rho = std::abs(y);
    if (ax == 0.0 || rho == 0.0 || !(sigma2 > 0.0))
        return gaussian_metric(y, x, n0);
    const double gamma = 1.0 / std::sqrt(1.0 / (ax * rho) + 2.0 * sigma2 / n0);
    const double drho = rho - ax;
    const double dth = wrap_angle(std::arg(y) - std::arg(x));
    return -std::log(std::numbers::pi * gamma * n0) - (drho * drho + gamma * gamma * dth * dth) / n0;
}

double log_likelihood(cd y, cd x, const DemapperModel& model) {
    return model.effective_kind() == DemapperKind::Pcawgn ? pcawgn_metric(y, x, model.n0, model.phase_variance)
                                                          : gaussian_metric(y, x, model.n0);
}

LlrFrame bitwise_llrs(std::span<const cd> y, const Constellation& c, const DemapperModel& model, unsigned workers) {
    const detail::SoftKernel kernel(c, model);
    LlrFrame f;
    f.n_symbols = y.size();
    f.bits = c.bits_per_symbol();
    f.llrs.resize(y.size() * f.bits);
    parallel_for(block_count(y.size(), kRngBlock), workers, [&](std::size_t b) {
        std::vector<double> scratch(kernel.scratch_size());
        const std::size_t hi = std::min(y.size(), (b + 1) * kRngBlock);
        for (std::size_t k = b * kRngBlock; k < hi; ++k)
            kernel.llrs(y[k], f.llrs.data() + k * f.bits, scratch.data());
    });
    return f;
}

void write_llr_csv(std::ostream& os, const LlrFrame& f) {
    const auto old = os.precision(17);
    os << "k";
    for (unsigned i = 0; i < f.bits; ++i)
        os << ",llr_" << i;
    os << '\n';
    for (std::size_t k = 0; k < f.n_symbols; ++k) {
        os << k;
        for (unsigned i = 0; i < f.bits; ++i)
            os << ',' << f.at(k, i);
        os << '\n';
    }
    os.precision(old);
}

} // namespace pnshape
