#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kinuq {

// One snapshot of the low-order moments of a particle ensemble or a grid
// density. Standard errors are only meaningful for Monte Carlo runs and stay
// zero otherwise.
struct MomentRecord {
    double time = 0.0;
    double mass = 0.0;
    double mean = 0.0;
    double energy = 0.0;      // second moment about zero
    double stderr_mean = 0.0;
    double stderr_energy = 0.0;
};

struct MomentSeries {
    std::vector<MomentRecord> records;

    [[nodiscard]] std::size_t size() const { return records.size(); }
    [[nodiscard]] bool empty() const { return records.empty(); }
    const MomentRecord& operator[](std::size_t i) const { return records[i]; }
    const MomentRecord& back() const { return records.back(); }

    void push(const MomentRecord& r) { records.push_back(r); }

    // Record at (or nearest to) the requested time; series must be nonempty.
    [[nodiscard]] const MomentRecord& at_time(double t) const {
        if (records.empty())
            throw std::logic_error("MomentSeries::at_time on empty series");
        std::size_t best = 0;
        double gap = std::abs(records[0].time - t);
        for (std::size_t i = 1; i < records.size(); ++i) {
            const double g = std::abs(records[i].time - t);
            if (g < gap) { gap = g; best = i; }
        }
        return records[best];
    }
};

// Moments of a particle set. Standard errors use the usual unbiased sample
// variance of v and of v^2.
inline MomentRecord particle_moments(const std::vector<double>& v, double time) {
    const std::size_t n = v.size();
    if (n == 0) throw std::invalid_argument("particle_moments: empty ensemble");
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (double x : v) {
        s1 += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    const double mean = s1 / n;
    const double energy = s2 / n;
    MomentRecord r;
    r.time = time;
    r.mass = 1.0;
    r.mean = mean;
    r.energy = energy;
    if (n > 1) {
        const double var_v = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
        const double var_v2 = std::max(0.0, (s4 - n * energy * energy) / (n - 1.0));
        r.stderr_mean = std::sqrt(var_v / n);
        r.stderr_energy = std::sqrt(var_v2 / n);
    }
    return r;
}

// Moments of a cell-centered density: plain dv-weighted sums, which are the
// quantities the zero-flux finite-volume update conserves exactly.
inline MomentRecord grid_moments(const std::vector<double>& f,
                                 const std::vector<double>& v, double dv,
                                 double time) {
    if (f.size() != v.size() || f.size() < 2)
        throw std::invalid_argument("grid_moments: bad sizes");
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        m0 += dv * f[i];
        m1 += dv * f[i] * v[i];
        m2 += dv * f[i] * v[i] * v[i];
    }
    MomentRecord r;
    r.time = time;
    r.mass = m0;
    r.mean = m1;
    r.energy = m2;
    return r;
}

} // namespace kinuq
