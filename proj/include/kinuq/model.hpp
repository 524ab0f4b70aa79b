#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "quadrature.hpp"
#include "rng.hpp"

namespace kinuq {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.28318530717958647692;

// Law of the uncertain interaction parameter theta.
struct UncertainParameter {
    enum class Law { Uniform, StandardNormal };

    Law law = Law::Uniform;
    double lower = -1.0; // Uniform support
    double upper = 1.0;

    static UncertainParameter uniform(double lo, double hi) {
        if (!(lo < hi))
            throw std::invalid_argument("UncertainParameter: empty support");
        UncertainParameter p;
        p.law = Law::Uniform;
        p.lower = lo;
        p.upper = hi;
        return p;
    }

    static UncertainParameter standard_normal() {
        UncertainParameter p;
        p.law = Law::StandardNormal;
        return p;
    }

    double mean() const {
        return law == Law::Uniform ? 0.5 * (lower + upper) : 0.0;
    }

    double variance() const {
        if (law == Law::Uniform) {
            const double w = upper - lower;
            return w * w / 12.0;
        }
        return 1.0;
    }

    double sample(RngStream& rng) const {
        return law == Law::Uniform ? rng.uniform(lower, upper) : rng.normal();
    }
};

// Symmetric zero-mean interaction noise eta with prescribed variance.
struct NoiseSpec {
    enum class Law { UniformSymmetric, TwoPointSymmetric };

    double variance = 0.0;
    Law law = Law::UniformSymmetric;

    static NoiseSpec none() { return NoiseSpec{}; }

    static NoiseSpec uniform(double sigma2) {
        if (sigma2 < 0.0)
            throw std::invalid_argument("NoiseSpec: variance must be >= 0");
        return NoiseSpec{sigma2, Law::UniformSymmetric};
    }

    static NoiseSpec two_point(double sigma2) {
        if (sigma2 < 0.0)
            throw std::invalid_argument("NoiseSpec: variance must be >= 0");
        return NoiseSpec{sigma2, Law::TwoPointSymmetric};
    }

    double sample(RngStream& rng) const {
        if (variance == 0.0) return 0.0;
        if (law == Law::UniformSymmetric) {
            const double a = std::sqrt(3.0 * variance);
            return rng.uniform(-a, a);
        }
        return rng.two_point(std::sqrt(variance));
    }
};

// Microscopic state space V: the whole real line (with a truncation radius L
// used only by grids, histograms and samplers) or a hard-bounded interval.
struct StateSpace {
    enum class Kind { RealLine, BoundedInterval };

    Kind kind = Kind::RealLine;
    double lower = -5.0;
    double upper = 5.0;

    static StateSpace real_line(double truncation = 5.0) {
        if (!(truncation > 0.0))
            throw std::invalid_argument("StateSpace: truncation must be > 0");
        return StateSpace{Kind::RealLine, -truncation, truncation};
    }

    static StateSpace bounded(double lo, double hi) {
        if (!(lo < hi))
            throw std::invalid_argument("StateSpace: empty interval");
        return StateSpace{Kind::BoundedInterval, lo, hi};
    }

    bool contains(double v) const {
        return kind == Kind::RealLine || (v >= lower && v <= upper);
    }
};

// Local diffusion amplitude D(v) multiplying the noise.
struct DiffusionCoefficient {
    enum class Kind { Zero, Constant, Quadratic };

    Kind kind = Kind::Zero;
    double d2 = 0.0; // D^2 for Constant
    double d0 = 0.0; // amplitude for Quadratic, D(v) = d0 (1 - v^2)

    static DiffusionCoefficient none() { return DiffusionCoefficient{}; }

    static DiffusionCoefficient constant(double d2) {
        if (!(d2 > 0.0))
            throw std::invalid_argument("DiffusionCoefficient: D^2 must be > 0");
        DiffusionCoefficient d;
        d.kind = Kind::Constant;
        d.d2 = d2;
        return d;
    }

    static DiffusionCoefficient quadratic(double d0) {
        if (!(d0 > 0.0))
            throw std::invalid_argument("DiffusionCoefficient: d0 must be > 0");
        DiffusionCoefficient d;
        d.kind = Kind::Quadratic;
        d.d0 = d0;
        return d;
    }

    double value(double v) const {
        switch (kind) {
            case Kind::Zero: return 0.0;
            case Kind::Constant: return std::sqrt(d2);
            default: return d0 * (1.0 - v * v);
        }
    }

    double squared(double v) const {
        switch (kind) {
            case Kind::Zero: return 0.0;
            case Kind::Constant: return d2;
            default: {
                const double s = 1.0 - v * v;
                return d0 * d0 * s * s;
            }
        }
    }

    double squared_derivative(double v) const {
        if (kind != Kind::Quadratic) return 0.0;
        return -4.0 * d0 * d0 * v * (1.0 - v * v);
    }

    bool is_zero() const { return kind == Kind::Zero; }
};

// Binary interaction model: a rule family plus its uncertainty, noise,
// diffusion and state space. The rules are
//   v* = v + gamma [ (p1(theta)-1) v + q1(theta) w ] + D(v) eta_v
//   w* = w + gamma [ p2(theta) v + (q2(theta)-1) w ] + D(w) eta_w
// with Kac-type coefficients p1 = q2 = cos(theta)|cos(theta)|^p,
// p2 = -q1 = sin(theta)|sin(theta)|^p, and symmetric compromise rules
// p1 = q2 = 1 - q, q1 = p2 = q.
struct InteractionModel {
    enum class Kind { Kac, InelasticKac, LinearConsensus, BoundedConfidence };

    Kind kind = Kind::Kac;
    double p = 0.0;       // inelasticity exponent (Kac family)
    double q0 = 0.5;      // compromise propensity q(theta) = q0 + lambda theta
    double lambda = 0.0;
    double delta0 = 1.0;  // confidence threshold Delta(theta) = delta0 + slope theta
    double slope = 0.0;

    UncertainParameter theta;
    NoiseSpec noise;
    DiffusionCoefficient diffusion;
    StateSpace space;

    static InteractionModel kac() {
        InteractionModel m;
        m.kind = Kind::Kac;
        m.theta = UncertainParameter::uniform(0.0, kTwoPi);
        m.space = StateSpace::real_line();
        return m;
    }

    static InteractionModel inelastic_kac(double p,
                                          DiffusionCoefficient diffusion =
                                              DiffusionCoefficient::none(),
                                          NoiseSpec noise = NoiseSpec::none()) {
        if (p < 0.0)
            throw std::invalid_argument("inelastic_kac: p must be >= 0");
        InteractionModel m;
        m.kind = Kind::InelasticKac;
        m.p = p;
        m.theta = UncertainParameter::uniform(0.0, kTwoPi); // fixed for Kac family
        m.noise = noise;
        m.diffusion = diffusion;
        m.space = StateSpace::real_line();
        return m;
    }

    static InteractionModel linear_consensus(
        double q0, double lambda,
        UncertainParameter theta = UncertainParameter::uniform(-1.0, 1.0),
        NoiseSpec noise = NoiseSpec::none(),
        DiffusionCoefficient diffusion = DiffusionCoefficient::none(),
        StateSpace space = StateSpace::real_line()) {
        if (!(q0 > 0.0 && q0 < 1.0))
            throw std::invalid_argument("linear_consensus: need 0 < q0 < 1");
        if (lambda < 0.0)
            throw std::invalid_argument("linear_consensus: lambda must be >= 0");
        InteractionModel m;
        m.kind = Kind::LinearConsensus;
        m.q0 = q0;
        m.lambda = lambda;
        m.theta = theta;
        m.noise = noise;
        m.diffusion = diffusion;
        m.space = space;
        return m;
    }

    static InteractionModel bounded_confidence(
        double delta0, double slope,
        UncertainParameter theta = UncertainParameter::uniform(-1.0, 1.0),
        NoiseSpec noise = NoiseSpec::none(),
        DiffusionCoefficient diffusion = DiffusionCoefficient::none(),
        StateSpace space = StateSpace::bounded(-1.0, 1.0)) {
        if (theta.law != UncertainParameter::Law::Uniform)
            throw std::invalid_argument(
                "bounded_confidence: theta must have bounded (uniform) support");
        if (space.kind != StateSpace::Kind::BoundedInterval)
            throw std::invalid_argument(
                "bounded_confidence: state space must be a bounded interval");
        // 0 <= Delta(theta) <= 2 over the whole support
        const double dlo = delta0 + slope * theta.lower;
        const double dhi = delta0 + slope * theta.upper;
        if (std::min(dlo, dhi) < 0.0 || std::max(dlo, dhi) > 2.0)
            throw std::invalid_argument(
                "bounded_confidence: Delta(theta) must stay within [0,2]");
        InteractionModel m;
        m.kind = Kind::BoundedConfidence;
        m.delta0 = delta0;
        m.slope = slope;
        m.theta = theta;
        m.noise = noise;
        m.diffusion = diffusion;
        m.space = space;
        return m;
    }

    bool is_kac_family() const {
        return kind == Kind::Kac || kind == Kind::InelasticKac;
    }

    // compromise propensity q(v,w;theta) for the symmetric rules
    double q_of(double v, double w, double theta_val) const {
        if (kind == Kind::LinearConsensus) return q0 + lambda * theta_val;
        const double d = delta0 + slope * theta_val;
        return std::abs(w - v) <= d ? 1.0 : 0.0;
    }
};

// Post-interaction states; in_bounds reports containment in V so that the
// caller can apply its rejection policy on bounded spaces.
struct InteractionOutcome {
    double v_star;
    double w_star;
    bool in_bounds;
};

namespace detail {

// cos(theta)|cos(theta)|^p and sin(theta)|sin(theta)|^p
inline void kac_coefficients(double theta, double p, double& c, double& s) {
    c = std::cos(theta);
    s = std::sin(theta);
    if (p == 0.0) return;
    if (p == 1.0) { // hot path of the scaled inelastic runs
        c *= std::abs(c);
        s *= std::abs(s);
        return;
    }
    c *= std::pow(std::abs(c), p);
    s *= std::pow(std::abs(s), p);
}

} // namespace detail

inline InteractionOutcome post_interaction(const InteractionModel& model,
                                           double v, double w, double theta,
                                           double gamma = 1.0,
                                           double eta_v = 0.0,
                                           double eta_w = 0.0) {
    double vs, ws;
    if (model.is_kac_family()) {
        double c, s;
        detail::kac_coefficients(theta, model.p, c, s);
        vs = v + gamma * ((c - 1.0) * v - s * w);
        ws = w + gamma * (s * v + (c - 1.0) * w);
    } else {
        const double q = model.q_of(v, w, theta);
        vs = v + gamma * q * (w - v);
        ws = w + gamma * q * (v - w);
    }
    vs += model.diffusion.value(v) * eta_v;
    ws += model.diffusion.value(w) * eta_w;
    const bool ok = model.space.contains(vs) && model.space.contains(ws);
    return InteractionOutcome{vs, ws, ok};
}

// First-order drift kernel P(v,w;theta) = ((p1+q2-2) v + (p2+q1) w) / 2 of
// the quasi-invariant limit.
inline double drift_kernel(const InteractionModel& model, double v, double w,
                           double theta) {
    if (model.is_kac_family()) {
        double c, s;
        detail::kac_coefficients(theta, model.p, c, s);
        return (c - 1.0) * v;
    }
    return model.q_of(v, w, theta) * (w - v);
}

// Average of the bounded-confidence propensity over uniform theta: the
// fraction of the support where Delta(theta) >= |w - v|.
inline double bounded_confidence_mean_propensity(const InteractionModel& model,
                                                 double r) {
    const double a = model.theta.lower, b = model.theta.upper;
    const double s = model.slope;
    if (s == 0.0) return r <= model.delta0 ? 1.0 : 0.0;
    // Delta is monotone in theta; measure the admissible sub-interval
    const double cut = (r - model.delta0) / s;
    double frac = s > 0.0 ? (b - cut) / (b - a) : (cut - a) / (b - a);
    return std::clamp(frac, 0.0, 1.0);
}

// <P(v,w;theta)>: closed forms for all built-in families.
inline double averaged_drift_kernel(const InteractionModel& model, double v,
                                    double w) {
    switch (model.kind) {
        case InteractionModel::Kind::Kac:
        case InteractionModel::Kind::InelasticKac:
            // <cos(theta)|cos|^p> over the full period vanishes by symmetry
            return -v;
        case InteractionModel::Kind::LinearConsensus:
            // theta has zero mean for both supported laws
            return model.q0 * (w - v);
        default:
            return bounded_confidence_mean_propensity(model, std::abs(w - v)) *
                   (w - v);
    }
}

// Quadrature estimate of <P>; independent route used to validate the closed
// forms and available for custom parameter laws.
inline double averaged_drift_kernel_quadrature(const InteractionModel& model,
                                               double v, double w,
                                               std::size_t order = 48) {
    const QuadratureRule rule =
        model.theta.law == UncertainParameter::Law::Uniform
            ? gauss_legendre(order, model.theta.lower, model.theta.upper)
            : gauss_hermite(order);
    return rule.average(
        [&](double th) { return drift_kernel(model, v, w, th); });
}

} // namespace kinuq
