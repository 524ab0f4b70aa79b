#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "model.hpp"
#include "moments.hpp"
#include "quadrature.hpp"

// Structure-preserving finite-volume solver for the mean-field Fokker-Planck
// equations: Chang-Cooper-type flux with per-interface delta weights, RK4 time
// stepping and zero-flux boundaries. The flux is built so that discrete steady
// states satisfy f_{i+1}/f_i = exp(-lambda_{i+1/2}) exactly, which preserves
// analytic equilibria to quadrature accuracy.
namespace kinuq::fp {

struct SingularDiffusion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StabilityViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotConverged : std::runtime_error {
    NotConverged(const std::string& what, double residual)
        : std::runtime_error(what), final_residual(residual) {}
    double final_residual;
};

// How the per-cell integral defining C-tilde is evaluated.
enum class QuadOrder {
    SP2, // midpoint
    SP4, // Simpson
    SPG, // 6-point Gauss per cell
    SPE, // closed form (constant diffusion + linear drift); else SPG + warning
};

// ---- grid and field ---------------------------------------------------------

struct Grid1D {
    std::size_t n_points = 0;
    double lower = 0.0;
    double upper = 0.0;
    double dv = 0.0;

    static Grid1D uniform(std::size_t n, double lower, double upper) {
        if (n < 3) throw std::invalid_argument("Grid1D: need at least 3 points");
        if (!(lower < upper)) throw std::invalid_argument("Grid1D: empty range");
        Grid1D g;
        g.n_points = n;
        g.lower = lower;
        g.upper = upper;
        g.dv = (upper - lower) / static_cast<double>(n - 1);
        return g;
    }

    [[nodiscard]] double center(std::size_t i) const {
        return lower + dv * static_cast<double>(i);
    }
    // v_{i+1/2}, between cells i and i+1; valid for i in [0, n_points-2]
    [[nodiscard]] double interface_at(std::size_t i) const {
        return lower + dv * (static_cast<double>(i) + 0.5);
    }
    [[nodiscard]] std::vector<double> centers() const {
        std::vector<double> v(n_points);
        for (std::size_t i = 0; i < n_points; ++i) v[i] = center(i);
        return v;
    }
};

struct FieldOnGrid {
    Grid1D grid;
    std::vector<double> values;

    [[nodiscard]] double mass() const {
        double m = 0.0;
        for (double f : values) m += f;
        return m * grid.dv;
    }
    [[nodiscard]] double mean() const {
        double m = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            m += values[i] * grid.center(i);
        return m * grid.dv;
    }
    [[nodiscard]] double energy() const {
        double m = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double v = grid.center(i);
            m += values[i] * v * v;
        }
        return m * grid.dv;
    }
};

template <typename F>
FieldOnGrid field_from_function(const Grid1D& grid, F&& profile,
                                bool normalize = true) {
    FieldOnGrid f;
    f.grid = grid;
    f.values.resize(grid.n_points);
    for (std::size_t i = 0; i < grid.n_points; ++i)
        f.values[i] = profile(grid.center(i));
    if (normalize) {
        const double m = f.mass();
        if (!(m > 0.0))
            throw std::invalid_argument("field_from_function: nonpositive mass");
        for (auto& x : f.values) x /= m;
    }
    return f;
}

inline void normalize(FieldOnGrid& f) {
    const double m = f.mass();
    if (!(m > 0.0)) throw std::invalid_argument("normalize: nonpositive mass");
    for (auto& x : f.values) x /= m;
}

inline double l1_distance(const FieldOnGrid& a, const FieldOnGrid& b) {
    if (a.values.size() != b.values.size())
        throw std::invalid_argument("l1_distance: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        s += std::abs(a.values[i] - b.values[i]);
    return s * a.grid.dv;
}

// Strict interior local maxima (plateaus do not count). rel_floor discards
// maxima below that fraction of the global peak: exponential tails carry
// last-ulp dust (values like 1e-70 between exact zeros) that would otherwise
// register as modes.
inline std::vector<std::size_t> local_maxima(const FieldOnGrid& f,
                                             double rel_floor = 0.0) {
    double peak = 0.0;
    for (double x : f.values) peak = std::max(peak, x);
    const double floor = rel_floor * peak;
    std::vector<std::size_t> idx;
    for (std::size_t i = 1; i + 1 < f.values.size(); ++i)
        if (f.values[i] > f.values[i - 1] && f.values[i] > f.values[i + 1] &&
            (rel_floor <= 0.0 || f.values[i] > floor))
            idx.push_back(i);
    return idx;
}

// ---- flux coefficients ------------------------------------------------------

// delta(lambda) = 1/lambda + 1/(1 - exp(lambda)), continuously extended.
// Taylor branch avoids the 1/lambda cancellation for small arguments; the
// direct branch goes through expm1 so 1 - e^lambda keeps full precision near
// the branch point, and is IEEE-safe at +-infinity (overflow/underflow give
// the correct upwind limits 0 and 1).
inline double compute_delta(double lambda) {
    if (std::abs(lambda) < 1e-2) {
        const double l2 = lambda * lambda;
        return 0.5 - lambda * (1.0 / 12.0) + lambda * l2 * (1.0 / 720.0);
    }
    return 1.0 / lambda - 1.0 / std::expm1(lambda);
}

struct FluxCoefficients {
    std::vector<double> ctilde; // per interior interface, size n_points-1
    std::vector<double> lambda;
    std::vector<double> delta;
    std::vector<double> d2; // D^2 at the interface
};

namespace detail {

// Total advection C[f](v) = -Integral P(v,w;theta) f(w) dw + (D^2)'(v)/2 with
// the field's mass and mean frozen at construction (one evaluation per RK
// stage). theta = nullopt means the theta-averaged interaction kernel.
struct DriftEval {
    const InteractionModel* model;
    const FieldOnGrid* field;
    std::optional<double> theta;
    double mass = 0.0;
    double mean = 0.0;
    double kac_factor = 0.0; // 1 - c(theta), or 1 for the averaged kernel
    double q_eff = 0.0;      // consensus propensity

    DriftEval(const InteractionModel& m, const FieldOnGrid& f,
              std::optional<double> th)
        : model(&m), field(&f), theta(th), mass(f.mass()), mean(f.mean()) {
        if (m.is_kac_family()) {
            if (theta) {
                double c = 0.0, s = 0.0;
                kinuq::detail::kac_coefficients(*theta, m.p, c, s);
                kac_factor = 1.0 - c;
            } else {
                kac_factor = 1.0; // cos averages to zero over a full period
            }
        } else if (m.kind == InteractionModel::Kind::LinearConsensus) {
            q_eff = theta ? m.q0 + m.lambda * *theta
                          : m.q0 + m.lambda * m.theta.mean();
        }
    }

    [[nodiscard]] double operator()(double v) const {
        double c;
        switch (model->kind) {
        case InteractionModel::Kind::Kac:
        case InteractionModel::Kind::InelasticKac:
            c = kac_factor * v * mass;
            break;
        case InteractionModel::Kind::LinearConsensus:
            c = q_eff * (v * mass - mean);
            break;
        case InteractionModel::Kind::BoundedConfidence: {
            // grid quadrature of -Integral P(v,w) f(w) dw
            double s = 0.0;
            const auto& g = field->grid;
            if (theta) {
                const double reach = model->delta0 + model->slope * *theta;
                for (std::size_t j = 0; j < g.n_points; ++j) {
                    const double d = g.center(j) - v;
                    if (std::abs(d) <= reach) s += d * field->values[j];
                }
            } else {
                for (std::size_t j = 0; j < g.n_points; ++j) {
                    const double d = g.center(j) - v;
                    s += bounded_confidence_mean_propensity(*model,
                                                            std::abs(d)) *
                         d * field->values[j];
                }
            }
            c = -s * g.dv;
            break;
        }
        default:
            c = 0.0;
        }
        return c + 0.5 * model->diffusion.squared_derivative(v);
    }
};

// True when the SPE closed form (midpoint of a linear-in-v integrand) is
// exact: constant diffusion and a drift linear in v.
inline bool spe_exact_available(const InteractionModel& m) {
    return m.diffusion.kind == DiffusionCoefficient::Kind::Constant &&
           m.kind != InteractionModel::Kind::BoundedConfidence;
}

} // namespace detail

// (D^2_{i+1/2} / (2 dv)) * Integral_{v_i}^{v_{i+1}} C[f](v) / (D^2(v)/2) dv,
// by midpoint (SP2), Simpson (SP4), 6-point Gauss (SPG) or the closed form
// when exact (SPE; falls back to SPG otherwise, reported via spe_fell_back).
inline double ctilde_at(const detail::DriftEval& drift, std::size_t i,
                        QuadOrder quad, bool* spe_fell_back = nullptr) {
    const auto& model = *drift.model;
    const auto& grid = drift.field->grid;
    const double vl = grid.center(i);
    const double vmid = grid.interface_at(i);
    const double d2half = model.diffusion.squared(vmid);

    if (d2half <= 0.0) {
        if (model.diffusion.is_zero())
            return drift(vmid); // pure advection: plain drift, upwinded later
        throw SingularDiffusion("diffusion degenerate at interior interface");
    }

    QuadOrder effective = quad;
    if (quad == QuadOrder::SPE) {
        if (detail::spe_exact_available(model)) return drift(vmid);
        if (spe_fell_back) *spe_fell_back = true;
        effective = QuadOrder::SPG;
    }

    // quadrature of the ratio integrand on [v_i, v_{i+1}]
    auto ratio = [&](double v) {
        const double d2 = model.diffusion.squared(v);
        if (d2 <= 0.0)
            throw SingularDiffusion("quadrature node hit a zero of D(v)");
        return drift(v) / (0.5 * d2);
    };
    double integral_over_dv = 0.0; // (1/dv) * Integral = weight-averaged value
    switch (effective) {
    case QuadOrder::SP2:
        integral_over_dv = ratio(vmid);
        break;
    case QuadOrder::SP4:
        integral_over_dv = (ratio(vl) + 4.0 * ratio(vmid) +
                            ratio(vl + grid.dv)) / 6.0;
        break;
    default: {
        static const QuadratureRule ref = gauss_legendre(6, 0.0, 1.0);
        for (std::size_t k = 0; k < ref.size(); ++k)
            integral_over_dv += ref.weights[k] * ratio(vl + ref.nodes[k] * grid.dv);
        break;
    }
    }
    return 0.5 * d2half * integral_over_dv;
}

inline FluxCoefficients compute_coefficients(const FieldOnGrid& field,
                                             const InteractionModel& model,
                                             std::optional<double> theta,
                                             QuadOrder quad,
                                             bool* spe_fell_back = nullptr) {
    const std::size_t n = field.grid.n_points;
    detail::DriftEval drift(model, field, theta);
    FluxCoefficients c;
    c.ctilde.resize(n - 1);
    c.lambda.resize(n - 1);
    c.delta.resize(n - 1);
    c.d2.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d2half = model.diffusion.squared(field.grid.interface_at(i));
        const double ct = ctilde_at(drift, i, quad, spe_fell_back);
        double lam;
        if (d2half > 0.0)
            lam = field.grid.dv * ct / (0.5 * d2half);
        else // upwind limit of the convex weight
            lam = ct > 0.0 ? std::numeric_limits<double>::infinity()
                 : ct < 0.0 ? -std::numeric_limits<double>::infinity()
                            : 0.0;
        c.ctilde[i] = ct;
        c.lambda[i] = lam;
        c.delta[i] = compute_delta(lam);
        c.d2[i] = d2half;
    }
    return c;
}

// Standalone single-interface evaluation (the batch path above shares the
// frozen moments across interfaces).
inline double compute_ctilde(const FieldOnGrid& field,
                             const InteractionModel& model,
                             std::optional<double> theta,
                             std::size_t interface_index, QuadOrder quad) {
    if (interface_index + 1 >= field.grid.n_points)
        throw std::out_of_range("compute_ctilde: interface index");
    detail::DriftEval drift(model, field, theta);
    return ctilde_at(drift, interface_index, quad);
}

// F_{i+1/2}; out-of-range indices are the zero-flux boundaries.
inline double numerical_flux(const FieldOnGrid& field,
                             const FluxCoefficients& coeffs,
                             std::ptrdiff_t interface_index) {
    if (interface_index < 0 ||
        interface_index + 1 >= static_cast<std::ptrdiff_t>(field.grid.n_points))
        return 0.0;
    const auto i = static_cast<std::size_t>(interface_index);
    const double fl = field.values[i];
    const double fr = field.values[i + 1];
    const double delta = coeffs.delta[i];
    return coeffs.ctilde[i] * ((1.0 - delta) * fr + delta * fl) +
           0.5 * coeffs.d2[i] * (fr - fl) / field.grid.dv;
}

inline std::vector<double> rhs(const FieldOnGrid& field,
                               const InteractionModel& model,
                               std::optional<double> theta, QuadOrder quad,
                               bool* spe_fell_back = nullptr) {
    const std::size_t n = field.grid.n_points;
    const auto coeffs = compute_coefficients(field, model, theta, quad,
                                             spe_fell_back);
    std::vector<double> r(n);
    double flux_left = 0.0; // zero-flux boundary
    for (std::size_t i = 0; i < n; ++i) {
        const double flux_right =
            numerical_flux(field, coeffs, static_cast<std::ptrdiff_t>(i));
        r[i] = (flux_right - flux_left) / field.grid.dv;
        flux_left = flux_right;
    }
    return r;
}

// ---- time stepping ----------------------------------------------------------

struct StepDiagnostics {
    std::uint64_t floored_cells = 0;
    double mass_adjustment = 0.0; // total |mass drift| absorbed by rescaling
    bool spe_fell_back = false;
};

inline void step_rk4(FieldOnGrid& f, const InteractionModel& model,
                     std::optional<double> theta, double dt, QuadOrder quad,
                     StepDiagnostics* diag = nullptr) {
    const std::size_t n = f.grid.n_points;
    bool fell_back = false;

    const double mass_before = f.mass();
    double tv_before = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        tv_before += std::abs(f.values[i + 1] - f.values[i]);

    const auto k1 = rhs(f, model, theta, quad, &fell_back);
    FieldOnGrid stage = f;
    for (std::size_t i = 0; i < n; ++i)
        stage.values[i] = f.values[i] + 0.5 * dt * k1[i];
    const auto k2 = rhs(stage, model, theta, quad, &fell_back);
    for (std::size_t i = 0; i < n; ++i)
        stage.values[i] = f.values[i] + 0.5 * dt * k2[i];
    const auto k3 = rhs(stage, model, theta, quad, &fell_back);
    for (std::size_t i = 0; i < n; ++i)
        stage.values[i] = f.values[i] + dt * k3[i];
    const auto k4 = rhs(stage, model, theta, quad, &fell_back);
    for (std::size_t i = 0; i < n; ++i)
        f.values[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    // structure restoration: clip negative undershoots, rescale the mass
    std::uint64_t floored = 0;
    for (auto& x : f.values)
        if (x < 0.0) {
            x = 0.0;
            ++floored;
        }
    const double mass_after = f.mass();
    if (floored > 0 && mass_after > 0.0) {
        const double scale = mass_before / mass_after;
        for (auto& x : f.values) x *= scale;
    }
    if (diag) {
        diag->floored_cells += floored;
        diag->mass_adjustment += std::abs(mass_after - mass_before);
        diag->spe_fell_back = diag->spe_fell_back || fell_back;
    }

    // divergence detectors. Non-finite values mean an outright overflow; a
    // clip that removes more than the whole mass means the rescale above just
    // laundered a divergent step. Stable runs sit orders of magnitude below
    // both (clip adjustments are ~1e-13 per step when they happen at all).
    for (double x : f.values)
        if (!std::isfinite(x))
            throw StabilityViolation("field left the finite range");
    if (std::abs(mass_after - mass_before) > std::abs(mass_before))
        throw StabilityViolation("clipped more than the total mass in one step");

    // the mass/span floor keeps near-flat fields from tripping the TV check
    // on their first rearrangement
    double tv_after = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        tv_after += std::abs(f.values[i + 1] - f.values[i]);
    const double tv_scale =
        tv_before + std::abs(mass_before) / (f.grid.upper - f.grid.lower);
    if (tv_after > 10.0 * tv_scale)
        throw StabilityViolation("total variation blew up within one step");
}

// dt budget dv^2 / (2 max D^2 + dv max |C~[f0]|) from the initial field.
inline double suggested_dt(const FieldOnGrid& f0, const InteractionModel& model,
                           std::optional<double> theta, QuadOrder quad) {
    const auto coeffs = compute_coefficients(f0, model, theta, quad);
    double max_d2 = 0.0, max_ct = 0.0;
    for (std::size_t i = 0; i < coeffs.d2.size(); ++i) {
        max_d2 = std::max(max_d2, coeffs.d2[i]);
        max_ct = std::max(max_ct, std::abs(coeffs.ctilde[i]));
    }
    const double denom = 2.0 * max_d2 + f0.grid.dv * max_ct;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return f0.grid.dv * f0.grid.dv / denom;
}

// ---- drivers ----------------------------------------------------------------

struct FPConfig {
    double dt = 0.0; // <= 0: 0.8 x suggested_dt(f0)
    double t_final = 20.0;
    double record_every = 0.25;
    QuadOrder quad = QuadOrder::SPG;
    bool store_snapshots = false; // keep the field at every record time
};

struct FPResult {
    MomentSeries moments;
    FieldOnGrid field;
    StepDiagnostics diagnostics;
    double dt_used = 0.0;
    std::vector<FieldOnGrid> snapshots; // with store_snapshots
    std::vector<double> snapshot_times;
};

inline MomentRecord field_moments(const FieldOnGrid& f, double time) {
    return grid_moments(f.values, f.grid.centers(), f.grid.dv, time);
}

inline FPResult run_fp(const InteractionModel& model,
                       std::optional<double> theta, FieldOnGrid f0,
                       const FPConfig& cfg) {
    if (!(cfg.t_final > 0.0))
        throw std::invalid_argument("run_fp: t_final must be positive");
    double dt = cfg.dt;
    if (dt <= 0.0) {
        dt = 0.8 * suggested_dt(f0, model, theta, cfg.quad);
        if (!std::isfinite(dt)) dt = cfg.t_final; // static field, one pass
    }
    const auto steps = static_cast<std::uint64_t>(
        std::ceil(cfg.t_final / dt - 1e-9));
    dt = cfg.t_final / static_cast<double>(steps);
    auto stride = static_cast<std::uint64_t>(std::llround(cfg.record_every / dt));
    if (stride == 0) stride = 1;

    FPResult res;
    res.dt_used = dt;
    res.moments.push(field_moments(f0, 0.0));
    if (cfg.store_snapshots) {
        res.snapshots.push_back(f0);
        res.snapshot_times.push_back(0.0);
    }
    for (std::uint64_t s = 1; s <= steps; ++s) {
        step_rk4(f0, model, theta, dt, cfg.quad, &res.diagnostics);
        if (s % stride == 0 || s == steps) {
            const double t = dt * static_cast<double>(s);
            res.moments.push(field_moments(f0, t));
            if (cfg.store_snapshots) {
                res.snapshots.push_back(f0);
                res.snapshot_times.push_back(t);
            }
        }
    }
    res.field = std::move(f0);
    return res;
}

struct SteadyResult {
    FieldOnGrid field;
    bool converged = false;
    double final_residual = 0.0;
    double dt_used = 0.0;
    StepDiagnostics diagnostics;
    // rows: time, max-norm residual, mass, energy
    std::vector<std::array<double, 4>> history;
};

// Gate for callers that need the fixed point, not a best effort.
inline const SteadyResult& require_steady(const SteadyResult& res) {
    if (!res.converged)
        throw NotConverged("steady solve stopped at residual " +
                               std::to_string(res.final_residual),
                           res.final_residual);
    return res;
}

inline SteadyResult run_to_steady(const InteractionModel& model,
                                  std::optional<double> theta, FieldOnGrid f0,
                                  double dt, QuadOrder quad,
                                  double residual_tol, double t_max) {
    if (dt <= 0.0) {
        dt = 0.8 * suggested_dt(f0, model, theta, quad);
        if (!std::isfinite(dt)) dt = 1.0;
    }
    SteadyResult res;
    res.dt_used = dt;

    const std::uint64_t check_every = 20;
    const auto max_steps = static_cast<std::uint64_t>(
        std::ceil(t_max / dt - 1e-9));
    auto residual_of = [&](const FieldOnGrid& f) {
        const auto r = rhs(f, model, theta, quad);
        double m = 0.0;
        for (double x : r) m = std::max(m, std::abs(x));
        return m;
    };

    double t = 0.0;
    double residual = residual_of(f0);
    auto m0 = field_moments(f0, 0.0);
    res.history.push_back({0.0, residual, m0.mass, m0.energy});
    std::uint64_t s = 0;
    while (residual >= residual_tol && s < max_steps) {
        step_rk4(f0, model, theta, dt, quad, &res.diagnostics);
        ++s;
        t = dt * static_cast<double>(s);
        if (s % check_every == 0 || s == max_steps) {
            residual = residual_of(f0);
            const auto m = field_moments(f0, t);
            res.history.push_back({t, residual, m.mass, m.energy});
        }
    }
    if (s == 0) res.history.push_back({0.0, residual, m0.mass, m0.energy});
    res.converged = residual < residual_tol;
    res.final_residual = residual;
    res.field = std::move(f0);
    return res;
}

} // namespace kinuq::fp
