#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "kinuq/oracles.hpp"

namespace oracle = kinuq::oracle;

namespace {

// trapezoid average of h(theta) over U(lo,hi)
template <class F>
double theta_average(F&& h, double lo, double hi, int n) {
    double acc = 0.5 * (h(lo) + h(hi));
    for (int i = 1; i < n; ++i) acc += h(lo + (hi - lo) * i / n);
    return acc / n;
}

} // namespace

TEST_CASE("Kac means") {
    REQUIRE(oracle::kac_mean_deterministic(0.0) == 1.0);
    REQUIRE(std::abs(oracle::kac_mean_deterministic(1.0) - 0.36787944117144233) <
            1e-15);
    REQUIRE(oracle::kac_mean_fixed_theta(0.0, 2.0) == 1.0);
    // theta = pi: cos - 1 = -2
    REQUIRE(std::abs(oracle::kac_mean_fixed_theta(1.0,
                                                  3.14159265358979323846) -
                     0.1353352832366127) < 1e-15);
}

TEST_CASE("Kac averaged-mean lower bound") {
    REQUIRE(oracle::kac_mean_averaged_lower_bound(0.0) == 1.0);
    // erf(pi sqrt(t/2)) / sqrt(2 pi t) at t = 2
    REQUIRE(std::abs(oracle::kac_mean_averaged_lower_bound(2.0) -
                     0.2820922878592168) < 1e-12);
    REQUIRE_THROWS_AS(oracle::kac_mean_averaged_lower_bound(-1.0),
                      std::domain_error);
    // the bound sits below the averaged mean computed by brute force
    for (double t : {0.5, 1.0, 2.0, 5.0}) {
        const double mbar = theta_average(
            [t](double th) { return oracle::kac_mean_fixed_theta(t, th); }, 0.0,
            2.0 * 3.14159265358979323846, 200000);
        REQUIRE(oracle::kac_mean_averaged_lower_bound(t) <= mbar * (1.0 + 1e-9));
    }
}

TEST_CASE("consensus energies at reference points") {
    // theta ~ U(-1,1): Var = 1/3, exponent 2(q0^2 - q0 + lambda^2/3)
    REQUIRE(std::abs(oracle::consensus_energy_deterministic(1.0, 0.5, 0.5,
                                                            1.0 / 3.0) -
                     std::exp(-1.0 / 3.0)) < 1e-15);
    REQUIRE(oracle::consensus_energy_deterministic(0.0, 0.5, 0.5, 1.0 / 3.0) ==
            1.0);
    // fixed theta = 0 collapses onto q = q0
    REQUIRE(std::abs(oracle::consensus_energy_fixed_theta(2.0, 0.5, 0.5, 0.0) -
                     std::exp(-1.0)) < 1e-15);
}

TEST_CASE("averaged uniform energy: exact erfi form against brute force") {
    for (double t : {0.2, 1.0, 3.0, 8.0}) {
        for (double q0 : {0.3, 0.5, 0.7}) {
            for (double lambda : {0.2, 0.5}) {
                const double brute = theta_average(
                    [&](double th) {
                        return oracle::consensus_energy_fixed_theta(t, q0,
                                                                    lambda, th);
                    },
                    -1.0, 1.0, 100000);
                const double exact =
                    oracle::consensus_energy_averaged_uniform(t, q0, lambda);
                REQUIRE(std::abs(exact - brute) <= 1e-6 * brute);
            }
        }
    }
}

TEST_CASE("averaged uniform energy: limits and the asymptotic branch") {
    // continuous at t -> 0+
    REQUIRE(std::abs(oracle::consensus_energy_averaged_uniform(1e-12, 0.5, 0.5) -
                     1.0) < 1e-9);
    // algebraic decay to zero when the stochastic condition holds
    const double e100 = oracle::consensus_energy_averaged_uniform(100.0, 0.5, 0.5);
    REQUIRE(e100 < 0.02);
    REQUIRE(oracle::consensus_energy_averaged_uniform(1000.0, 0.5, 0.5) <
            e100 / 5.0);
    // the asymptotic expansion closes in on the exact form for large t
    for (double t : {50.0, 100.0}) {
        const double exact =
            oracle::consensus_energy_averaged_uniform(t, 0.5, 0.5);
        const double asym =
            oracle::consensus_energy_averaged_uniform(t, 0.5, 0.5, true);
        REQUIRE(std::abs(asym - exact) < 0.05 * exact);
    }
    REQUIRE_THROWS_AS(oracle::consensus_energy_averaged_uniform(-0.5, 0.5, 0.5),
                      std::domain_error);
}

TEST_CASE("xi identities") {
    for (double q0 : {0.2, 0.5, 0.8}) {
        for (double lambda : {0.1, 0.4, 0.9}) {
            const double xp = oracle::xi_plus(q0, lambda);
            const double xm = oracle::xi_minus(q0, lambda);
            REQUIRE(std::abs(xp * xp - xm * xm - 4.0 * lambda * (2.0 * q0 - 1.0)) <
                    1e-12);
        }
    }
}

TEST_CASE("consensus conditions truth table") {
    const double var = 1.0 / 3.0; // U(-1,1)
    REQUIRE(oracle::consensus_condition_deterministic(0.5, 0.5, var));
    REQUIRE(oracle::consensus_condition_stochastic_uniform(0.5, 0.5));
    REQUIRE(oracle::consensus_condition_deterministic(0.5, 0.7, var));
    REQUIRE_FALSE(oracle::consensus_condition_stochastic_uniform(0.5, 0.7));
    REQUIRE_FALSE(oracle::consensus_condition_deterministic(0.5, 0.9, var));
    REQUIRE_FALSE(oracle::consensus_condition_stochastic_uniform(0.5, 0.9));
}

TEST_CASE("normal-law averaged energy and blow-up") {
    // q0 = 1/2 kills the linear term: E = exp(-t/2) / sqrt(1 - 4 lambda^2 t)
    const auto e = oracle::consensus_energy_averaged_normal(0.5, 0.5, 0.5);
    REQUIRE(e.has_value());
    REQUIRE(std::abs(*e - 1.1013906298063675) < 1e-12); // sqrt(2) e^{-1/4}
    REQUIRE(*oracle::consensus_energy_averaged_normal(0.0, 0.5, 0.5) == 1.0);
    // finite-time blow-up at t = 1/(4 lambda^2)
    REQUIRE(std::abs(oracle::normal_theta_blowup_time(0.5) - 1.0) < 1e-15);
    REQUIRE_FALSE(oracle::consensus_energy_averaged_normal(1.0, 0.5, 0.5)
                      .has_value());
    REQUIRE_FALSE(oracle::consensus_energy_averaged_normal(2.0, 0.5, 0.5)
                      .has_value());
    REQUIRE(std::isinf(oracle::normal_theta_blowup_time(0.0)));
    // brute-force check below the blow-up time (Gauss-Hermite would need many
    // nodes here, trapezoid over +-12 sigma is simpler)
    const double t = 0.4, q0 = 0.3, lambda = 0.4;
    const double h = 24.0 / 400000;
    double brute = 0.0;
    for (int i = 0; i <= 400000; ++i) {
        const double th = -12.0 + i * h;
        const double wt = (i == 0 || i == 400000) ? 0.5 : 1.0;
        brute += wt * std::exp(-0.5 * th * th) *
                 oracle::consensus_energy_fixed_theta(t, q0, lambda, th);
    }
    brute *= h / std::sqrt(2.0 * 3.14159265358979323846);
    const auto exact = oracle::consensus_energy_averaged_normal(t, q0, lambda);
    REQUIRE(exact.has_value());
    REQUIRE(std::abs(*exact - brute) < 1e-6 * brute);
}

TEST_CASE("inelastic Kac steady state") {
    REQUIRE(std::abs(oracle::inelastic_kac_steady_energy_deterministic(0.1) -
                     0.05) < 1e-15);
    const double pi = 3.14159265358979323846;
    REQUIRE(std::abs(oracle::inelastic_kac_steady_energy_fixed_theta(
                         0.1, 1.0, 0.5 * pi) -
                     0.05) < 1e-15);
    REQUIRE(std::abs(oracle::inelastic_kac_steady_energy_fixed_theta(0.1, 1.0,
                                                                     pi) -
                     0.025) < 1e-15);
    // no dissipation at theta = 0 or 2 pi: degenerate
    REQUIRE(std::isinf(
        oracle::inelastic_kac_steady_energy_fixed_theta(0.1, 1.0, 0.0)));
    REQUIRE_THROWS_AS(
        oracle::inelastic_kac_fixed_theta_profile(0.3, 0.1, 1.0, 0.0),
        std::domain_error);
    REQUIRE_THROWS_AS(
        oracle::inelastic_kac_fixed_theta_profile(0.3, 0.1, 1.0, 2.0 * pi),
        std::domain_error);
    REQUIRE(std::isinf(oracle::inelastic_kac_steady_energy_averaged()));
    // profiles integrate to one and carry the right energy
    const int n = 40000;
    double mass = 0.0, energy = 0.0;
    const double h = 10.0 / n;
    for (int i = 0; i <= n; ++i) {
        const double v = -5.0 + i * h;
        const double wt = (i == 0 || i == n) ? 0.5 : 1.0;
        const double f =
            oracle::inelastic_kac_fixed_theta_profile(v, 0.1, 1.0, pi);
        mass += wt * f;
        energy += wt * f * v * v;
    }
    REQUIRE(std::abs(mass * h - 1.0) < 1e-8);
    REQUIRE(std::abs(energy * h - 0.025) < 1e-8);
}

TEST_CASE("constant-diffusion consensus steady state") {
    REQUIRE(std::abs(oracle::const_diff_steady_energy_deterministic(0.5, 0.1) -
                     0.1) < 1e-15);
    // q0 = 0.5, lambda = 0.4: ratio = (q0 / 2 lambda) ln 9
    const double ratio = oracle::const_diff_energy_ratio(0.5, 0.4);
    REQUIRE(std::abs(ratio - 0.625 * std::log(9.0)) < 1e-14);
    REQUIRE(std::abs(ratio - 1.3732653608351372) < 1e-12);
    REQUIRE(std::abs(oracle::const_diff_steady_energy_averaged(0.5, 0.4, 0.1) -
                     ratio * 0.1) < 1e-15);
    REQUIRE(oracle::const_diff_energy_ratio(0.5, 0.0) == 1.0);
    // ratio -> 1 as the uncertainty vanishes, and it grows with lambda
    REQUIRE(std::abs(oracle::const_diff_energy_ratio(0.5, 1e-9) - 1.0) < 1e-8);
    double prev = 1.0;
    for (double lam = 0.05; lam < 0.5; lam += 0.05) {
        const double r = oracle::const_diff_energy_ratio(0.5, lam);
        REQUIRE(r > prev);
        prev = r;
    }
    REQUIRE_THROWS_AS(oracle::const_diff_steady_energy_averaged(0.5, 0.5, 0.1),
                      std::domain_error);
    REQUIRE_THROWS_AS(oracle::const_diff_energy_ratio(0.3, 0.4),
                      std::domain_error);
}

TEST_CASE("constant-diffusion steady profiles integrate correctly") {
    // deterministic profile: unit mass, energy D^2 / (2 q0)
    const int n = 64000;
    const double h = 16.0 / n;
    double mass = 0.0, energy = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double v = -8.0 + i * h;
        const double wt = (i == 0 || i == n) ? 0.5 : 1.0;
        const double f = oracle::const_diff_steady_profile(v, 0.5, 0.1);
        mass += wt * f;
        energy += wt * f * v * v;
    }
    REQUIRE(std::abs(mass * h - 1.0) < 1e-8);
    REQUIRE(std::abs(energy * h - 0.1) < 1e-8);

    // averaged profile: unit mass, energy equal to the averaged steady energy
    mass = 0.0;
    energy = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double v = -8.0 + i * h;
        const double wt = (i == 0 || i == n) ? 0.5 : 1.0;
        const double f = oracle::const_diff_averaged_profile(v, 0.5, 0.4, 0.1);
        mass += wt * f;
        energy += wt * f * v * v;
    }
    REQUIRE(std::abs(mass * h - 1.0) < 1e-6);
    REQUIRE(std::abs(energy * h -
                     oracle::const_diff_steady_energy_averaged(0.5, 0.4, 0.1)) <
            1e-6);
    // the Taylor bridge at v = 0 joins the closed form continuously
    const double inner = oracle::const_diff_averaged_profile(1e-4, 0.5, 0.4, 0.1);
    const double outer = oracle::const_diff_averaged_profile(2e-3, 0.5, 0.4, 0.1);
    REQUIRE(std::abs(inner - outer) < 1e-3 * inner);
    REQUIRE_THROWS_AS(oracle::const_diff_averaged_profile(0.1, 0.5, 0.0, 0.1),
                      std::domain_error);
}

TEST_CASE("nonlinear diffusion steady shape") {
    REQUIRE(std::abs(oracle::nonlinear_diffusion_steady_shape(0.0, 0.5) -
                     0.6065306597126334) < 1e-15);
    REQUIRE(oracle::nonlinear_diffusion_steady_shape(1.0, 0.5) == 0.0);
    REQUIRE(oracle::nonlinear_diffusion_steady_shape(-1.0, 0.5) == 0.0);
    for (double v : {0.1, 0.4, 0.9})
        REQUIRE(oracle::nonlinear_diffusion_steady_shape(v, 2.0) ==
                oracle::nonlinear_diffusion_steady_shape(-v, 2.0));
    REQUIRE_THROWS_AS(oracle::nonlinear_diffusion_steady_shape(1.2, 0.5),
                      std::domain_error);
    // normalizer turns the shape into a probability density
    const double q = 20.0;
    const double z = oracle::nonlinear_diffusion_steady_normalizer(q);
    const int n = 20000;
    const double h = 2.0 / n;
    double mass = 0.0;
    for (int i = 1; i < n; ++i)
        mass += oracle::nonlinear_diffusion_steady_shape(-1.0 + i * h, q);
    REQUIRE(std::abs(mass * h / z - 1.0) < 1e-6);
}

TEST_CASE("Wasserstein distance to the origin") {
    REQUIRE(oracle::w2_distance_to_dirac(0.0) == 0.0);
    REQUIRE(std::abs(oracle::w2_distance_to_dirac(0.05) - 0.22360679774997896) <
            1e-15);
    REQUIRE(oracle::w2_distance_to_dirac(1.0) == 1.0);
    REQUIRE_THROWS_AS(oracle::w2_distance_to_dirac(-0.01), std::domain_error);
}

TEST_CASE("bimodal initial profile") {
    REQUIRE(oracle::bimodal_h0(0.5) > 1.0);
    REQUIRE(oracle::bimodal_h0(0.5) == oracle::bimodal_h0(-0.5));
    REQUIRE(oracle::bimodal_h0(0.0) < oracle::bimodal_h0(0.5));
}
