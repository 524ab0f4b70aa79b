#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kinuq {

// Nodes and weights of a Gaussian rule, normalized against a probability
// density: sum(weights) == 1 and sum(w_k * h(x_k)) approximates E[h(X)].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }

    // density-weighted average of h; fixed ascending-node summation order
    template <class F>
    double average(F&& h) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k)
            acc += weights[k] * h(nodes[k]);
        return acc;
    }
};

namespace detail {

inline void check_order(std::size_t n) {
    if (n < 1 || n > 64)
        throw std::invalid_argument("quadrature order must be in [1,64]");
}

} // namespace detail

// Gauss-Legendre rule on [lower,upper] with weights normalized to the uniform
// average over the interval (sum of weights is 1). Roots of P_n by Newton
// iteration on the three-term recurrence, cosine initial guess; converges to
// ~1e-15 in a handful of iterations.
inline QuadratureRule gauss_legendre(std::size_t n, double lower, double upper) {
    detail::check_order(n);
    if (!(lower < upper))
        throw std::invalid_argument("gauss_legendre: lower must be < upper");

    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    const double pi = 3.14159265358979323846;
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        // i-th root counted from the upper end of [-1,1]
        double x = std::cos(pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // evaluate P_n(x) and P'_n(x)
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - static_cast<double>(j) * p2) /
                     (static_cast<double>(j) + 1.0);
            }
            dp = static_cast<double>(n) * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / dp;
            x -= dx;
            if (std::abs(dx) <= 1e-14 * std::max(1.0, std::abs(x))) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map to [lower,upper], probability normalization divides by the length
        const double mid = 0.5 * (lower + upper);
        const double hw = 0.5 * (upper - lower);
        rule.nodes[i] = mid - hw * x;
        rule.nodes[n - 1 - i] = mid + hw * x;
        rule.weights[i] = 0.5 * w;
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

// Gauss-Hermite rule in probabilists' normalization: sum(w_k * h(x_k))
// approximates E[h(Z)] for Z ~ N(0,1). Computed as the physicists' rule
// (weight e^{-x^2}) via Newton on the orthonormal recurrence, then rescaled
// (nodes by sqrt(2), weights by 1/sqrt(pi)).
inline QuadratureRule gauss_hermite(std::size_t n) {
    detail::check_order(n);

    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    const double pim4 = 0.7511255444649425; // pi^{-1/4}
    const std::size_t half = (n + 1) / 2;
    double root1 = 0.0, root2 = 0.0; // two previously found roots
    for (std::size_t i = 0; i < half; ++i) {
        // classic initial guesses, largest root first
        double x;
        if (i == 0) {
            x = std::sqrt(2.0 * n + 1.0) -
                1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            x = root1 - 1.14 * std::pow(static_cast<double>(n), 0.426) / root1;
        } else if (i == 2) {
            x = 1.86 * root1 - 0.86 * root2;
        } else if (i == 3) {
            x = 1.91 * root1 - 0.91 * root2;
        } else {
            x = 2.0 * root1 - root2;
        }
        double dp = 0.0;
        for (int iter = 0; iter < 200; ++iter) {
            // orthonormal Hermite recurrence wrt e^{-x^2}
            double p1 = pim4, p2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = x * std::sqrt(2.0 / (j + 1.0)) * p2 -
                     std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
            }
            dp = std::sqrt(2.0 * n) * p2;
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) <= 1e-14 * std::max(1.0, std::abs(x))) break;
        }
        root2 = root1;
        root1 = x;
        const double w = 2.0 / (dp * dp);
        // physicists' -> probabilists': node*sqrt(2), weight/sqrt(pi)
        rule.nodes[n - 1 - i] = x * std::sqrt(2.0);
        rule.nodes[i] = -x * std::sqrt(2.0);
        rule.weights[i] = w / std::sqrt(3.14159265358979323846);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    if (n % 2 == 1) rule.nodes[half - 1] = 0.0; // middle root is exact
    return rule;
}

} // namespace kinuq
