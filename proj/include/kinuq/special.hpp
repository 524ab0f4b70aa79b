#pragma once

#include <cmath>
#include <stdexcept>

namespace kinuq {

// Error function (standard library provides a correctly-rounded erf).
inline double erf(double x) { return std::erf(x); }

// Imaginary error function erfi(x) = (2/sqrt(pi)) * int_0^x e^{y^2} dy.
// Maclaurin series for |x| <= 6: all terms are positive, so there is no
// cancellation and the sum is good to machine precision; the asymptotic
// expansion e^{x^2}/(sqrt(pi) x) * sum (2k-1)!!/(2x^2)^k takes over beyond,
// where its smallest term is below 1e-15. Arguments past |x| = 30 are
// rejected: e^{x^2} overflows a double long before that.
inline double erfi(double x) {
    if (std::isnan(x)) return x;
    const double ax = std::abs(x);
    if (ax > 30.0)
        throw std::domain_error("erfi: |x| > 30 overflows double range");

    const double two_over_sqrt_pi = 1.1283791670955125738961589031;
    double result;
    if (ax <= 6.0) {
        const double x2 = ax * ax;
        double u = ax;      // x^{2k+1} / k!
        double sum = ax;    // k = 0 term
        for (int k = 1; k < 200; ++k) {
            u *= x2 / static_cast<double>(k);
            const double term = u / (2.0 * k + 1.0);
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        result = two_over_sqrt_pi * sum;
    } else {
        const double inv2x2 = 1.0 / (2.0 * ax * ax);
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 60; ++k) {
            term *= (2.0 * k - 1.0) * inv2x2;
            if (term < 1e-17 * sum) break;
            sum += term;
        }
        result = std::exp(ax * ax) / (std::sqrt(3.14159265358979323846) * ax) * sum;
    }
    return x < 0.0 ? -result : result;
}

} // namespace kinuq
