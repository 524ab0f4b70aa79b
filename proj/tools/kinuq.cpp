// Command-line front end: canned experiments, free-form runs, closed-form
// reference values, and re-grading of existing run directories.
//
// Exit codes: 0 success (and all checks passed), 1 solver failure,
// 2 comparison failure, 3 bad configuration or unusable input.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kinuq/collocation.hpp"
#include "kinuq/csv.hpp"
#include "kinuq/oracles.hpp"
#include "kinuq/presets.hpp"

namespace {

using kinuq::preset::ReportRow;
using kinuq::preset::RunOptions;

void add_run_options(CLI::App* cmd, RunOptions& opt) {
    auto add = [cmd, &opt](const std::string& flag, const std::string& key,
                           const std::string& help) {
        cmd->add_option_function<std::string>(
            flag, [&opt, key](const std::string& v) { opt.set(key, v); }, help);
    };
    add("--model", "model", "interaction model: kac|inelastic|consensus|bounded");
    add("--solver", "solver", "solver for free-form runs: mc|fp (default mc)");
    add("--q0", "q0", "base compromise propensity");
    add("--lambda", "lambda", "uncertainty amplitude in q(theta) = q0 + lambda theta");
    add("--gamma", "gamma", "interaction strength (and scaled-run step)");
    add("--sigma2", "sigma2", "interaction noise variance");
    add("--d2", "d2", "constant diffusion coefficient D^2");
    add("--d0", "d0", "selective diffusion amplitude, D(v) = d0 (1 - v^2)");
    add("--p", "p", "inelasticity exponent");
    add("--delta0", "delta0", "base confidence radius");
    add("--slope", "slope", "radius uncertainty, Delta(theta) = delta0 + slope theta");
    add("--particles", "particles", "Monte Carlo ensemble size (even)");
    add("--nodes", "nodes", "collocation nodes (0: deterministic run only)");
    add("--grid-points", "grid-points", "mean-field grid points");
    add("--domain", "domain", "state-space interval as <lo>:<hi>");
    add("--dt", "dt", "time step (<= 0 or unset: solver picks one)");
    add("--t-final", "t-final", "final time on the recorded clock");
    add("--seed", "seed", "base RNG seed");
    add("--out", "out", "output directory");
    add("--quad-order", "quad-order", "flux quadrature: sp2|sp4|spg|spe");
    add("--init", "init", "initial data: rademacher|dirac:<v0>|uniform|h0");
    add("--theta-law", "theta-law", "uncertainty law: uniform:<lo>:<hi>|normal");
    add("--node-source", "node-source", "collocation nodes: quadrature|random");
    add("--record-every", "record-every", "Monte Carlo record stride, in steps");
    add("--threads", "threads", "worker threads for the collocation ensemble");
}

void print_rows(const std::vector<ReportRow>& rows) {
    for (const auto& r : rows)
        std::cout << (r.pass ? "  PASS  " : "  FAIL  ") << r.name
                  << ": observed=" << kinuq::csv::format_number(r.observed)
                  << '\n';
    std::cout << (kinuq::preset::all_pass(rows) ? "overall: PASS"
                                                : "overall: FAIL")
              << std::endl;
}

RunOptions merged_options(const RunOptions& cli,
                          const std::string& config_path) {
    if (config_path.empty()) return cli;
    return kinuq::preset::merge(kinuq::preset::load_config_file(config_path),
                                cli);
}

int cmd_run(const RunOptions& opt) {
    if (opt.preset) {
        const auto outcome = kinuq::preset::run_preset(*opt.preset, opt);
        std::cout << "report: " << outcome.report_path << '\n';
        print_rows(outcome.rows);
        return outcome.passed ? 0 : 2;
    }
    kinuq::preset::run_free(opt);
    std::cout << "wrote " << opt.out.value_or("out") << std::endl;
    return 0;
}

int cmd_compare(const std::string& dir, const RunOptions& opt) {
    if (!opt.preset)
        throw kinuq::preset::ConfigError("compare needs --preset");
    const auto rows = kinuq::preset::compare_preset(*opt.preset, dir, opt);
    print_rows(rows);
    return kinuq::preset::all_pass(rows) ? 0 : 2;
}

int cmd_oracle(const RunOptions& opt, const std::vector<double>& times) {
    namespace oracle = kinuq::oracle;
    const std::string model = opt.model.value_or("consensus");
    const double q0 = opt.q0.value_or(0.5);
    const double lambda = opt.lambda.value_or(0.5);
    auto print = [](const std::string& name, double value) {
        std::cout << name << ',' << kinuq::csv::format_number(value) << '\n';
    };
    std::cout << "quantity,value\n";

    if (model == "kac") {
        for (double t : times) {
            print("m_g(" + kinuq::csv::format_number(t) + ")",
                  oracle::kac_mean_deterministic(t));
            print("m_fbar_lower_bound(" + kinuq::csv::format_number(t) + ")",
                  oracle::kac_mean_averaged_lower_bound(t));
        }
        return 0;
    }
    if (model == "consensus") {
        const auto theta = opt.theta_law
                               ? kinuq::preset::detail::parse_theta_law(
                                     *opt.theta_law)
                               : kinuq::UncertainParameter::uniform(-1.0, 1.0);
        const bool normal =
            theta.law == kinuq::UncertainParameter::Law::StandardNormal;
        for (double t : times) {
            const auto tag = kinuq::csv::format_number(t);
            print("E_g(" + tag + ")",
                  oracle::consensus_energy_deterministic(t, q0, lambda,
                                                         theta.variance()));
            if (normal) {
                const auto e =
                    oracle::consensus_energy_averaged_normal(t, q0, lambda);
                print("E_fbar(" + tag + ")",
                      e ? *e : std::numeric_limits<double>::infinity());
            } else {
                print("E_fbar(" + tag + ")",
                      oracle::consensus_energy_averaged_uniform(t, q0, lambda));
            }
        }
        if (normal)
            print("blowup_time", oracle::normal_theta_blowup_time(lambda));
        std::cout << "deterministic_relaxes,"
                  << (oracle::consensus_condition_deterministic(
                          q0, lambda, theta.variance())
                          ? "true"
                          : "false")
                  << '\n';
        std::cout << "stochastic_relaxes,"
                  << (!normal && oracle::consensus_condition_stochastic_uniform(
                                     q0, lambda)
                          ? "true"
                          : "false")
                  << '\n';
        return 0;
    }
    if (model == "const-diff") {
        const double d2 = opt.d2.value_or(0.1);
        print("E_g_steady",
              oracle::const_diff_steady_energy_deterministic(q0, d2));
        print("E_fbar_steady",
              oracle::const_diff_steady_energy_averaged(q0, lambda, d2));
        print("energy_ratio", oracle::const_diff_energy_ratio(q0, lambda));
        return 0;
    }
    if (model == "inelastic") {
        const double d2 = opt.d2.value_or(0.1);
        print("E_g_steady", oracle::inelastic_kac_steady_energy_deterministic(d2));
        print("E_fbar_steady", oracle::inelastic_kac_steady_energy_averaged());
        return 0;
    }
    if (model == "nonlinear") {
        const double d0 = opt.d0.value_or(std::sqrt(0.025));
        const double q_eff = q0 / (d0 * d0);
        print("shape_normalizer",
              oracle::nonlinear_diffusion_steady_normalizer(q_eff));
        return 0;
    }
    throw kinuq::preset::ConfigError(
        "unknown oracle model: " + model +
        " (expected kac|consensus|const-diff|inelastic|nonlinear)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kinetic models with uncertain binary interactions"};
    app.require_subcommand(1);

    RunOptions run_opt;
    std::string run_config;
    auto* run = app.add_subcommand("run", "run a preset or a free-form model");
    run->add_option_function<std::string>(
        "--preset",
        [&run_opt](const std::string& v) { run_opt.set("preset", v); },
        "canned experiment: ex1a|ex2a|ex1b|ex2b|ex3b");
    run->add_option("--config", run_config,
                    "key=value file; command-line flags win");
    add_run_options(run, run_opt);

    RunOptions cmp_opt;
    std::string cmp_dir, cmp_config;
    auto* cmp = app.add_subcommand(
        "compare", "re-grade an existing run directory against a preset");
    cmp->add_option("dir", cmp_dir, "run directory")->required();
    cmp->add_option_function<std::string>(
        "--preset",
        [&cmp_opt](const std::string& v) { cmp_opt.set("preset", v); },
        "preset the directory was produced with");
    cmp->add_option("--config", cmp_config,
                    "key=value file; command-line flags win");
    add_run_options(cmp, cmp_opt);

    RunOptions orc_opt;
    std::vector<double> orc_times{1.0};
    auto* orc = app.add_subcommand(
        "oracle", "print closed-form reference values for a model");
    orc->add_option("--t", orc_times, "evaluation times");
    add_run_options(orc, orc_opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    } catch (const std::exception& e) { // bad value inside an option callback
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    }

    try {
        if (run->parsed()) return cmd_run(merged_options(run_opt, run_config));
        if (cmp->parsed())
            return cmd_compare(cmp_dir, merged_options(cmp_opt, cmp_config));
        return cmd_oracle(orc_opt, orc_times);
    } catch (const kinuq::preset::ConfigError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    } catch (const kinuq::csv::MissingData& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    } catch (const std::logic_error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << std::endl;
        return 1;
    }
}
