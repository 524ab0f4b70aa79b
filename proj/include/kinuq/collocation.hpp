#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fokker_planck.hpp"
#include "model.hpp"
#include "monte_carlo.hpp"
#include "quadrature.hpp"

// Stochastic collocation: one FixedTheta solve per node theta_k, then
// weighted post-processing into the averaged field fbar, its theta-variance
// and averaged moments. Node rules are sorted ascending and reductions run in
// that fixed order, so outputs are bitwise independent of thread count and of
// any permutation of the input nodes.
namespace kinuq::uq {

struct NodeError : std::runtime_error {
    NodeError(std::size_t node_index, const std::string& what)
        : std::runtime_error("node " + std::to_string(node_index) + ": " + what),
          node(node_index) {}
    std::size_t node;
};

struct BackendMismatch : std::logic_error {
    using std::logic_error::logic_error;
};

enum class Backend { MC, FP };

enum class NodeSource {
    Quadrature,    // Gauss nodes matched to the theta law
    RandomUniform, // seeded i.i.d. draws from the law, equal weights
};

// Nodes ascending, weights attached and normalized to sum to 1.
inline QuadratureRule sorted_rule(QuadratureRule rule) {
    const std::size_t n = rule.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return rule.nodes[a] < rule.nodes[b];
    });
    QuadratureRule out;
    out.nodes.resize(n);
    out.weights.resize(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.nodes[i] = rule.nodes[order[i]];
        out.weights[i] = rule.weights[order[i]];
        total += out.weights[i];
    }
    if (!(total > 0.0))
        throw std::invalid_argument("sorted_rule: weights must sum to > 0");
    for (auto& w : out.weights) w /= total;
    return out;
}

// Collocation node set for an uncertain parameter: Gauss-Legendre for a
// uniform law, Gauss-Hermite for a standard normal one, or seeded random
// draws with equal weights.
inline QuadratureRule make_theta_rule(const UncertainParameter& theta,
                                      std::size_t n_nodes,
                                      NodeSource source = NodeSource::Quadrature,
                                      std::uint64_t seed = 0,
                                      std::uint64_t stream = 0) {
    if (n_nodes == 0)
        throw std::invalid_argument("make_theta_rule: need at least one node");
    if (source == NodeSource::Quadrature) {
        if (theta.law == UncertainParameter::Law::Uniform)
            return sorted_rule(gauss_legendre(n_nodes, theta.lower, theta.upper));
        return sorted_rule(gauss_hermite(n_nodes));
    }
    RngStream rng(seed, stream);
    QuadratureRule rule;
    rule.nodes.resize(n_nodes);
    rule.weights.assign(n_nodes, 1.0 / static_cast<double>(n_nodes));
    for (auto& x : rule.nodes) x = theta.sample(rng);
    return sorted_rule(rule);
}

struct MCHistogramSpec {
    std::size_t bins = 0; // 0: no histograms
    double lower = 0.0;
    double upper = 0.0;
};

struct CollocationEnsemble {
    Backend backend = Backend::FP;
    QuadratureRule rule; // sorted ascending, weights summing to 1
    std::vector<MomentSeries> moments; // one series per node, shared times
    // FP backend: per-node field snapshots at the shared record times
    std::vector<std::vector<fp::FieldOnGrid>> fields;
    std::vector<double> snapshot_times;
    std::vector<fp::StepDiagnostics> diagnostics;
    // MC backend: final-time histograms (when requested)
    std::vector<mc::Histogram> histograms;

    [[nodiscard]] std::size_t n_nodes() const { return rule.size(); }
    [[nodiscard]] std::size_t n_times() const {
        return moments.empty() ? 0 : moments.front().size();
    }
    [[nodiscard]] std::size_t n_snapshots() const { return snapshot_times.size(); }
};

namespace detail {

template <typename Fn>
void parallel_over_nodes(std::size_t n, unsigned threads, Fn&& body) {
    std::vector<std::exception_ptr> errors(n);
    if (threads <= 1 || n <= 1) {
        for (std::size_t k = 0; k < n; ++k) {
            try {
                body(k);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    } else {
        const unsigned workers = std::min<unsigned>(
            threads, static_cast<unsigned>(n));
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t k = next.fetch_add(1);
                    if (k >= n) return;
                    try {
                        body(k);
                    } catch (...) {
                        errors[k] = std::current_exception();
                    }
                }
            });
        for (auto& t : pool) t.join();
    }
    for (std::size_t k = 0; k < n; ++k)
        if (errors[k]) {
            try {
                std::rethrow_exception(errors[k]);
            } catch (const std::exception& e) {
                throw NodeError(k, e.what());
            }
        }
}

} // namespace detail

// One FixedTheta MC run per node; node k draws from stream base.stream+1+k so
// realizations are independent of each other and of the companion averaged
// run on base.stream.
inline CollocationEnsemble run_collocation_mc(const InteractionModel& model,
                                              const mc::MCConfig& base,
                                              const QuadratureRule& rule,
                                              const std::vector<double>& initial,
                                              unsigned threads = 1,
                                              const MCHistogramSpec& hist = {}) {
    CollocationEnsemble ens;
    ens.backend = Backend::MC;
    ens.rule = sorted_rule(rule);
    const std::size_t n = ens.rule.size();
    ens.moments.resize(n);
    if (hist.bins > 0) ens.histograms.resize(n);
    detail::parallel_over_nodes(n, threads, [&](std::size_t k) {
        mc::MCConfig cfg = base;
        cfg.theta_mode = mc::ThetaMode::Fixed;
        cfg.theta_fixed = ens.rule.nodes[k];
        cfg.stream = base.stream + 1 + k;
        auto res = mc::run_mc(model, initial, cfg);
        ens.moments[k] = std::move(res.moments);
        if (hist.bins > 0)
            ens.histograms[k] =
                mc::histogram(res.final_state, hist.lower, hist.upper, hist.bins);
    });
    return ens;
}

// One FixedTheta FP solve per node. All nodes share the grid, the initial
// field and the time step; pass base.dt <= 0 to resolve it as 0.8 x the
// tightest per-node stability budget.
inline CollocationEnsemble run_collocation_fp(const InteractionModel& model,
                                              const fp::FPConfig& base,
                                              const QuadratureRule& rule,
                                              const fp::FieldOnGrid& f0,
                                              unsigned threads = 1) {
    CollocationEnsemble ens;
    ens.backend = Backend::FP;
    ens.rule = sorted_rule(rule);
    const std::size_t n = ens.rule.size();

    fp::FPConfig cfg = base;
    cfg.store_snapshots = true;
    if (cfg.dt <= 0.0) {
        double dt = std::numeric_limits<double>::infinity();
        for (double node : ens.rule.nodes)
            dt = std::min(dt, fp::suggested_dt(f0, model, node, cfg.quad));
        if (!std::isfinite(dt)) dt = cfg.t_final;
        cfg.dt = 0.8 * dt;
    }

    ens.moments.resize(n);
    ens.fields.resize(n);
    ens.diagnostics.resize(n);
    detail::parallel_over_nodes(n, threads, [&](std::size_t k) {
        auto res = fp::run_fp(model, ens.rule.nodes[k], f0, cfg);
        ens.moments[k] = std::move(res.moments);
        ens.fields[k] = std::move(res.snapshots);
        ens.diagnostics[k] = res.diagnostics;
        if (k == 0) ens.snapshot_times = std::move(res.snapshot_times);
    });
    return ens;
}

// ---- post-processing (fixed ascending-node reduction order) ------------------

struct AveragedMoments {
    double time = 0.0;
    double mass = 0.0;
    double mean = 0.0;
    double energy = 0.0;
    double stderr_mean = 0.0;   // from per-node MC standard errors
    double stderr_energy = 0.0;
};

inline AveragedMoments averaged_moments(const CollocationEnsemble& ens,
                                        std::size_t time_index) {
    if (ens.moments.empty())
        throw std::logic_error("averaged_moments: empty ensemble");
    AveragedMoments out;
    double var_mean = 0.0, var_energy = 0.0;
    for (std::size_t k = 0; k < ens.n_nodes(); ++k) {
        const auto& rec = ens.moments[k][time_index];
        const double w = ens.rule.weights[k];
        out.mass += w * rec.mass;
        out.mean += w * rec.mean;
        out.energy += w * rec.energy;
        var_mean += w * w * rec.stderr_mean * rec.stderr_mean;
        var_energy += w * w * rec.stderr_energy * rec.stderr_energy;
    }
    out.time = ens.moments.front()[time_index].time;
    out.stderr_mean = std::sqrt(var_mean);
    out.stderr_energy = std::sqrt(var_energy);
    return out;
}

inline fp::FieldOnGrid mean_field(const CollocationEnsemble& ens,
                                  std::size_t snapshot_index) {
    if (ens.backend != Backend::FP)
        throw BackendMismatch("mean_field needs the FP backend");
    if (ens.fields.empty() || snapshot_index >= ens.n_snapshots())
        throw std::out_of_range("mean_field: snapshot index");
    fp::FieldOnGrid out = ens.fields.front()[snapshot_index];
    for (auto& x : out.values) x = 0.0;
    for (std::size_t k = 0; k < ens.n_nodes(); ++k) {
        const double w = ens.rule.weights[k];
        const auto& f = ens.fields[k][snapshot_index].values;
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] += w * f[i];
    }
    return out;
}

// Var[f](v) = <f^2> - fbar^2, clamped at 0 against roundoff.
inline fp::FieldOnGrid variance_field(const CollocationEnsemble& ens,
                                      std::size_t snapshot_index) {
    if (ens.backend != Backend::FP)
        throw BackendMismatch("variance_field needs the FP backend");
    if (ens.fields.empty() || snapshot_index >= ens.n_snapshots())
        throw std::out_of_range("variance_field: snapshot index");
    fp::FieldOnGrid mean = mean_field(ens, snapshot_index);
    fp::FieldOnGrid out = mean;
    for (auto& x : out.values) x = 0.0;
    for (std::size_t k = 0; k < ens.n_nodes(); ++k) {
        const double w = ens.rule.weights[k];
        const auto& f = ens.fields[k][snapshot_index].values;
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] += w * f[i] * f[i];
    }
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = std::max(0.0, out.values[i] - mean.values[i] * mean.values[i]);
    return out;
}

// Histogram-space analogues for the MC backend.
inline mc::Histogram mean_histogram(const CollocationEnsemble& ens) {
    if (ens.backend != Backend::MC)
        throw BackendMismatch("mean_histogram needs the MC backend");
    if (ens.histograms.empty())
        throw std::logic_error("mean_histogram: no histograms were recorded");
    mc::Histogram out = ens.histograms.front();
    for (auto& x : out.density) x = 0.0;
    for (std::size_t k = 0; k < ens.n_nodes(); ++k) {
        const double w = ens.rule.weights[k];
        for (std::size_t i = 0; i < out.density.size(); ++i)
            out.density[i] += w * ens.histograms[k].density[i];
    }
    return out;
}

inline mc::Histogram variance_histogram(const CollocationEnsemble& ens) {
    mc::Histogram mean = mean_histogram(ens);
    mc::Histogram out = mean;
    for (auto& x : out.density) x = 0.0;
    for (std::size_t k = 0; k < ens.n_nodes(); ++k) {
        const double w = ens.rule.weights[k];
        for (std::size_t i = 0; i < out.density.size(); ++i)
            out.density[i] += w * ens.histograms[k].density[i] *
                              ens.histograms[k].density[i];
    }
    for (std::size_t i = 0; i < out.density.size(); ++i)
        out.density[i] = std::max(0.0, out.density[i] -
                                           mean.density[i] * mean.density[i]);
    return out;
}

// Shared time step for a deterministic run plus a node family: 0.8 x the
// tightest stability budget across all of them.
inline double shared_dt(const InteractionModel& model,
                        const fp::FieldOnGrid& f0, const QuadratureRule& rule,
                        fp::QuadOrder quad, bool include_averaged = true) {
    double dt = std::numeric_limits<double>::infinity();
    if (include_averaged)
        dt = fp::suggested_dt(f0, model, std::nullopt, quad);
    for (double node : rule.nodes)
        dt = std::min(dt, fp::suggested_dt(f0, model, node, quad));
    return 0.8 * dt;
}

} // namespace kinuq::uq
