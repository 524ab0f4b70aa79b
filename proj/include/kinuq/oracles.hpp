#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>

#include "special.hpp"

// Closed-form solutions and bounds used as references by the tests, the
// report generator and the `oracle` CLI subcommand. Everything here is an
// explicit formula; no solver code is reused, so these act as independent
// checks on the numerical paths.
namespace kinuq::oracle {

inline constexpr double kSqrtPi = 1.7724538509055160273;

// ---- Kac model -------------------------------------------------------------

// Mean of the theta-averaged Kac model, m(0) = 1.
inline double kac_mean_deterministic(double t) { return std::exp(-t); }

// Mean of the fixed-theta Kac model, m(0) = 1.
inline double kac_mean_fixed_theta(double t, double theta) {
    return std::exp((std::cos(theta) - 1.0) * t);
}

// Lower bound on the theta-averaged mean m_fbar(t); tight as t -> 0.
inline double kac_mean_averaged_lower_bound(double t) {
    if (t < 0.0) throw std::domain_error("kac_mean_averaged_lower_bound: t < 0");
    if (t == 0.0) return 1.0;
    const double pi = 3.14159265358979323846;
    return kinuq::erf(pi * std::sqrt(0.5 * t)) / std::sqrt(2.0 * pi * t);
}

// ---- linear consensus, Boltzmann level (E(0) = 1, zero mean) ---------------

inline double consensus_energy_deterministic(double t, double q0, double lambda,
                                             double theta_variance) {
    return std::exp(2.0 * (q0 * q0 - q0 + lambda * lambda * theta_variance) * t);
}

inline double consensus_energy_fixed_theta(double t, double q0, double lambda,
                                           double theta) {
    const double e = q0 * q0 - q0 + lambda * lambda * theta * theta +
                     lambda * (2.0 * q0 - 1.0) * theta;
    return std::exp(2.0 * e * t);
}

inline double xi_plus(double q0, double lambda) {
    return std::sqrt(2.0) * lambda + (2.0 * q0 - 1.0) / std::sqrt(2.0);
}

inline double xi_minus(double q0, double lambda) {
    return -std::sqrt(2.0) * lambda + (2.0 * q0 - 1.0) / std::sqrt(2.0);
}

// A-posteriori average of the energy for theta ~ U(-1,1): exact erfi form by
// default, or the large-t asymptotic expansion (leading erfi terms) when
// `asymptotic` is set. Growth past exp(700) is reported as +infinity.
inline double consensus_energy_averaged_uniform(double t, double q0,
                                                double lambda,
                                                bool asymptotic = false) {
    if (t < 0.0) throw std::domain_error("consensus energy: t < 0");
    // degenerate width: the family collapses onto the single exponent
    if (lambda * std::sqrt(t) < 1e-8)
        return std::exp(2.0 * q0 * (q0 - 1.0) * t);
    const double xp = xi_plus(q0, lambda);
    const double xm = xi_minus(q0, lambda);
    if (std::max(xp * xp, xm * xm) * t > 700.0)
        return std::numeric_limits<double>::infinity();
    if (asymptotic) {
        // erfi(x) ~ e^{x^2}/(sqrt(pi) x): each endpoint contributes
        // e^{(xi^2 - 1/2) t} / (4 sqrt(2) lambda xi t)
        if (xp == 0.0 || xm == 0.0)
            throw std::domain_error("asymptotic branch undefined at xi = 0");
        const double c = 4.0 * std::sqrt(2.0) * lambda * t;
        return std::exp((xp * xp - 0.5) * t) / (c * xp) -
               std::exp((xm * xm - 0.5) * t) / (c * xm);
    }
    const double sq = std::sqrt(t);
    return 0.25 / lambda * std::sqrt(3.14159265358979323846 / (2.0 * t)) *
           std::exp(-0.5 * t) * (erfi(xp * sq) - erfi(xm * sq));
}

// Average energy for theta ~ N(0,1); empty when the integral diverges
// (blow-up at t >= 1/(4 lambda^2)).
inline std::optional<double> consensus_energy_averaged_normal(double t,
                                                              double q0,
                                                              double lambda) {
    if (t < 0.0) throw std::domain_error("consensus energy: t < 0");
    const double denom = 1.0 - 4.0 * lambda * lambda * t;
    if (denom <= 0.0) return std::nullopt;
    const double c = 2.0 * q0 - 1.0;
    const double expo = 2.0 * q0 * (q0 - 1.0) * t +
                        2.0 * lambda * lambda * c * c * t * t / denom;
    return std::exp(expo) / std::sqrt(denom);
}

inline double normal_theta_blowup_time(double lambda) {
    if (lambda == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (4.0 * lambda * lambda);
}

// Consensus (vanishing energy) conditions, zero-mean theta.
inline bool consensus_condition_deterministic(double q0, double lambda,
                                              double theta_variance) {
    return lambda * lambda * theta_variance < q0 * (1.0 - q0);
}

// theta ~ U(-1,1): q(theta) must stay within [0,1]
inline bool consensus_condition_stochastic_uniform(double q0, double lambda) {
    return lambda <= std::min(q0, 1.0 - q0);
}

// ---- inelastic Kac with constant diffusion (Fokker-Planck level) -----------

inline double inelastic_kac_steady_profile(double v, double d2) {
    const double d = std::sqrt(d2);
    return std::exp(-v * v / d2) / (d * kSqrtPi);
}

inline double inelastic_kac_steady_energy_deterministic(double d2) {
    return 0.5 * d2;
}

// c(theta) = 1 - cos(theta)|cos(theta)|^p; zero only at theta = 0 mod 2 pi
inline double inelastic_kac_dissipation(double theta, double p) {
    const double c = std::cos(theta);
    return 1.0 - c * std::pow(std::abs(c), p);
}

inline double inelastic_kac_fixed_theta_profile(double v, double d2, double p,
                                                double theta) {
    const double c = inelastic_kac_dissipation(theta, p);
    if (c <= 0.0)
        throw std::domain_error("inelastic Kac: no steady state at theta = 0");
    const double d = std::sqrt(d2);
    return std::sqrt(c) * std::exp(-c * v * v / d2) / (d * kSqrtPi);
}

inline double inelastic_kac_steady_energy_fixed_theta(double d2, double p,
                                                      double theta) {
    const double c = inelastic_kac_dissipation(theta, p);
    if (c <= 0.0) return std::numeric_limits<double>::infinity();
    return 0.5 * d2 / c;
}

// The a-posteriori averaged steady energy diverges: c(theta) vanishes
// quadratically at the edges of the support, so the average of D^2/(2c)
// over U(0,2pi) is +infinity. Flagged, not computed.
inline double inelastic_kac_steady_energy_averaged() {
    return std::numeric_limits<double>::infinity();
}

// ---- linear consensus with constant diffusion (Fokker-Planck level) --------

inline double const_diff_steady_profile(double v, double q0, double d2) {
    const double d = std::sqrt(d2);
    return std::sqrt(q0) / (d * kSqrtPi) * std::exp(-q0 * v * v / d2);
}

inline double const_diff_steady_energy_deterministic(double q0, double d2) {
    return 0.5 * d2 / q0;
}

// theta ~ U(-1,1), 0 <= lambda < q0
inline double const_diff_steady_energy_averaged(double q0, double lambda,
                                                double d2) {
    if (!(lambda >= 0.0 && lambda < q0))
        throw std::domain_error("const_diff steady: need 0 <= lambda < q0");
    if (lambda == 0.0) return 0.5 * d2 / q0;
    return 0.25 * d2 / lambda * std::log1p(2.0 * lambda / (q0 - lambda));
}

// E_fbar^inf / E_g^inf >= 1, independent of D^2
inline double const_diff_energy_ratio(double q0, double lambda) {
    if (!(lambda >= 0.0 && lambda < q0))
        throw std::domain_error("const_diff ratio: need 0 <= lambda < q0");
    if (lambda == 0.0) return 1.0;
    return 0.5 * q0 / lambda * std::log1p(2.0 * lambda / (q0 - lambda));
}

// Averaged stationary profile fbar^inf(v) for theta ~ U(-1,1). The removable
// singularity at v = 0 is bridged by the quadratic Taylor polynomial.
inline double const_diff_averaged_profile(double v, double q0, double lambda,
                                          double d2) {
    if (!(lambda > 0.0 && lambda < q0))
        throw std::domain_error("const_diff profile: need 0 < lambda < q0");
    const double d = std::sqrt(d2);
    const double b1 = std::sqrt(q0 - lambda) / d;
    const double b2 = std::sqrt(q0 + lambda) / d;
    if (std::abs(v) * b2 <= 1e-3) {
        const double f0 = (std::pow(q0 + lambda, 1.5) - std::pow(q0 - lambda, 1.5)) /
                          (3.0 * lambda * d * kSqrtPi);
        const double f2 = -(std::pow(q0 + lambda, 2.5) - std::pow(q0 - lambda, 2.5)) /
                          (5.0 * lambda * d * d2 * kSqrtPi);
        return f0 + f2 * v * v;
    }
    const double c1 = d * std::sqrt(q0 - lambda) / (2.0 * lambda * kSqrtPi);
    const double c2 = -d * std::sqrt(q0 + lambda) / (2.0 * lambda * kSqrtPi);
    const double c3 = 0.25 * d2 / lambda *
                      (kinuq::erf(b2 * v) - kinuq::erf(b1 * v));
    const double v2 = v * v;
    return (c1 * std::exp(-b1 * b1 * v2) + c2 * std::exp(-b2 * b2 * v2) +
            c3 / v) / v2;
}

// ---- consensus with quadratic diffusion D(v) = D0 (1 - v^2) ----------------

// Unnormalized stationary shape on (-1,1); q is the effective exponent
// q0 / D0^2 (deterministic) or q(theta) / D0^2 (fixed theta). The boundary
// values are the (zero) limits; beyond them the shape is undefined.
inline double nonlinear_diffusion_steady_shape(double v, double q) {
    if (std::abs(v) > 1.0)
        throw std::domain_error("nonlinear diffusion shape: |v| > 1");
    if (std::abs(v) == 1.0) return 0.0;
    const double s = 1.0 - v * v;
    return std::exp(-q / s) / (s * s);
}

// Companion normalizer: integral of the shape over (-1,1), composite Simpson.
inline double nonlinear_diffusion_steady_normalizer(double q,
                                                    std::size_t intervals = 4096) {
    if (intervals % 2 != 0) ++intervals;
    const double h = 2.0 / static_cast<double>(intervals);
    double sum = 0.0; // endpoint values vanish
    for (std::size_t i = 1; i < intervals; ++i) {
        const double v = -1.0 + h * static_cast<double>(i);
        sum += (i % 2 == 1 ? 4.0 : 2.0) * nonlinear_diffusion_steady_shape(v, q);
    }
    return sum * h / 3.0;
}

// ---- misc -------------------------------------------------------------------

// 2-Wasserstein distance from a zero-mean distribution with the given second
// moment to the Dirac mass at the origin.
inline double w2_distance_to_dirac(double second_moment) {
    if (second_moment < 0.0)
        throw std::domain_error("w2_distance_to_dirac: negative second moment");
    return std::sqrt(second_moment);
}

// Unnormalized bimodal initial profile with modes at +-1/2.
inline double bimodal_h0(double v) {
    const double a = v - 0.5, b = v + 0.5;
    return std::exp(-20.0 * a * a) + std::exp(-20.0 * b * b);
}

} // namespace kinuq::oracle
