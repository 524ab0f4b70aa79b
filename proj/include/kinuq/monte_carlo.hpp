#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "model.hpp"
#include "moments.hpp"
#include "rng.hpp"

// Direct simulation Monte Carlo for the binary-interaction dynamics
// (Nanbu-Babovsky pair selection: disjoint pairs, round(N dt / 2) of them per
// step, so each particle interacts with probability dt per unit time).
namespace kinuq::mc {

enum class ThetaMode {
    Averaged, // fresh draw of theta for every interaction
    Fixed,    // one prescribed theta for the whole run
};

struct MCConfig {
    std::size_t particles = 100000;
    double dt = 0.01;        // step on the interaction clock; must be in (0, 1]
    double t_final = 50.0;   // final time on the interaction clock
    double gamma = 1.0;      // interaction strength; recorded time is gamma * t
    ThetaMode theta_mode = ThetaMode::Averaged;
    double theta_fixed = 0.0;
    std::uint64_t seed = 1234;
    std::uint64_t stream = 0;
    std::uint64_t record_every = 25; // moment-record spacing, in steps

    void validate() const {
        if (particles < 2 || particles % 2 != 0)
            throw std::invalid_argument("MCConfig: particle count must be even");
        if (!(dt > 0.0) || dt > 1.0 + 1e-12)
            throw std::invalid_argument("MCConfig: dt must lie in (0, 1]");
        if (!(t_final > 0.0))
            throw std::invalid_argument("MCConfig: t_final must be positive");
        if (!(gamma > 0.0) || gamma > 1.0 + 1e-12)
            throw std::invalid_argument("MCConfig: gamma must lie in (0, 1]");
        if (record_every == 0)
            throw std::invalid_argument("MCConfig: record_every must be positive");
    }
};

struct MCResult {
    MomentSeries moments; // times in recorded (scaled) units
    std::vector<double> final_state;
    std::uint64_t interactions = 0;
    std::uint64_t boundary_rejections = 0; // pairs left unchanged
};

// ---- initial ensembles ------------------------------------------------------

inline std::vector<double> initial_dirac(std::size_t n, double v0) {
    return std::vector<double>(n, v0);
}

// alternating +1/-1: for even n the sample mean is exactly 0 and the sample
// second moment exactly 1
inline std::vector<double> initial_rademacher(std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = (i % 2 == 0) ? 1.0 : -1.0;
    return v;
}

inline std::vector<double> initial_uniform(std::size_t n, double a, double b,
                                           RngStream& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(a, b);
    return v;
}

// Rejection sampling from the bimodal profile
// h0(v) ~ exp(-20 (v-1/2)^2) + exp(-20 (v+1/2)^2), restricted to [a, b].
inline std::vector<double> initial_bimodal_h0(std::size_t n, double a, double b,
                                              RngStream& rng) {
    std::vector<double> v(n);
    const double bound = 1.01; // sup of the unnormalized profile is just above 1
    for (auto& x : v) {
        for (;;) {
            const double cand = rng.uniform(a, b);
            const double dm = cand - 0.5, dp = cand + 0.5;
            const double h = std::exp(-20.0 * dm * dm) + std::exp(-20.0 * dp * dp);
            if (rng.uniform01() * bound <= h) {
                x = cand;
                break;
            }
        }
    }
    return v;
}

// ---- stepping ---------------------------------------------------------------

namespace detail {

// Applies one interaction to (v, w) in place. Out-of-range proposals redraw
// the noise a bounded number of times, then the pair is left unchanged.
inline bool apply_interaction(const InteractionModel& model, double& v,
                              double& w, double theta, double gamma,
                              RngStream& rng) {
    const bool with_noise = model.noise.variance > 0.0;
    for (int attempt = 0; attempt < 51; ++attempt) {
        double ev = 0.0, ew = 0.0;
        if (with_noise && attempt < 50) {
            ev = model.noise.sample(rng);
            ew = model.noise.sample(rng);
        }
        const auto out = post_interaction(model, v, w, theta, gamma, ev, ew);
        if (out.in_bounds) {
            v = out.v_star;
            w = out.w_star;
            return true;
        }
        if (!with_noise) break; // retrying cannot change the outcome
    }
    return false;
}

} // namespace detail

// One Nanbu-Babovsky step over the whole ensemble. `perm` is a permutation of
// the particle indices that is partially re-shuffled here (Fisher-Yates on the
// first 2*pairs slots), which selects uniformly random disjoint pairs without
// touching the rest of the array.
inline void nanbu_babovsky_step(const InteractionModel& model,
                                std::vector<double>& state,
                                std::vector<std::uint32_t>& perm, double dt,
                                double gamma, ThetaMode mode,
                                double theta_fixed, RngStream& rng,
                                std::uint64_t& interactions,
                                std::uint64_t& rejections) {
    const std::size_t n = state.size();
    std::size_t pairs = static_cast<std::size_t>(std::llround(0.5 * n * dt));
    if (pairs > n / 2) pairs = n / 2;
    for (std::size_t j = 0; j < 2 * pairs; ++j) {
        const std::size_t k = j + static_cast<std::size_t>(rng.bounded(n - j));
        std::swap(perm[j], perm[k]);
    }
    for (std::size_t i = 0; i < pairs; ++i) {
        double& v = state[perm[2 * i]];
        double& w = state[perm[2 * i + 1]];
        const double theta = (mode == ThetaMode::Averaged)
                                 ? model.theta.sample(rng)
                                 : theta_fixed;
        if (detail::apply_interaction(model, v, w, theta, gamma, rng))
            ++interactions;
        else
            ++rejections;
    }
}

inline MCResult run_mc(const InteractionModel& model, std::vector<double> state,
                       const MCConfig& cfg) {
    cfg.validate();
    if (state.size() != cfg.particles)
        throw std::invalid_argument("run_mc: state size != cfg.particles");

    RngStream rng(cfg.seed, cfg.stream);
    std::vector<std::uint32_t> perm(state.size());
    std::iota(perm.begin(), perm.end(), 0u);

    const auto steps = static_cast<std::uint64_t>(
        std::llround(cfg.t_final / cfg.dt));
    const double tau_step = cfg.gamma * cfg.dt;

    MCResult res;
    res.moments.push(particle_moments(state, 0.0));
    for (std::uint64_t s = 1; s <= steps; ++s) {
        nanbu_babovsky_step(model, state, perm, cfg.dt, cfg.gamma,
                            cfg.theta_mode, cfg.theta_fixed, rng,
                            res.interactions, res.boundary_rejections);
        if (s % cfg.record_every == 0 || s == steps)
            res.moments.push(particle_moments(state, tau_step * s));
    }
    res.final_state = std::move(state);
    return res;
}

// ---- histogram --------------------------------------------------------------

struct Histogram {
    std::vector<double> centers;
    std::vector<double> density; // integrates to 1 over the requested range
    std::uint64_t out_of_range = 0;
};

// Density estimate normalized to integrate to 1 over [lower, upper).
inline Histogram histogram(const std::vector<double>& state, double lower,
                           double upper, std::size_t bins) {
    if (!(lower < upper) || bins == 0)
        throw std::invalid_argument("histogram: empty range");
    if (state.empty()) throw std::invalid_argument("histogram: empty state");
    Histogram h;
    h.centers.resize(bins);
    h.density.assign(bins, 0.0);
    const double width = (upper - lower) / bins;
    for (std::size_t b = 0; b < bins; ++b)
        h.centers[b] = lower + (b + 0.5) * width;
    std::uint64_t in_range = 0;
    for (double x : state) {
        if (x < lower || x >= upper) {
            ++h.out_of_range;
            continue;
        }
        auto b = static_cast<std::size_t>((x - lower) / width);
        if (b >= bins) b = bins - 1;
        h.density[b] += 1.0;
        ++in_range;
    }
    if (in_range > 0) {
        const double norm = 1.0 / (width * static_cast<double>(in_range));
        for (auto& d : h.density) d *= norm;
    }
    return h;
}

} // namespace kinuq::mc
