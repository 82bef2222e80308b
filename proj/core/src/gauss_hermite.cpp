#include <cmath>
#include <numbers>

#include "pnshape/errors.hpp"
#include "pnshape/metrics.hpp"

namespace pnshape {

// Newton iteration on orthonormal Hermite polynomials, seeded with the
// classical asymptotic root estimates.
GaussHermiteRule gauss_hermite_rule(std::size_t order) {
    if (order < 1 || order > 200)
        throw InvalidArgument("gauss_hermite_rule: order must be in [1, 200]");
    const int n = static_cast<int>(order);
    const double pim4 = std::pow(std::numbers::pi, -0.25);
    GaussHermiteRule rule;
    rule.nodes.assign(order, 0.0);
    rule.weights.assign(order, 0.0);
    auto& x = rule.nodes;
    auto& w = rule.weights;

    double z = 0.0;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * x[1];
        else
            z = 2.0 * z - x[i - 2];

        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt(static_cast<double>(j - 1) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z)))
                break;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    // Ascending node order.
    for (int i = 0; i < n / 2; ++i) {
        std::swap(x[i], x[n - 1 - i]);
        std::swap(w[i], w[n - 1 - i]);
    }
    return rule;
}

} // namespace pnshape
