#pragma once

#include "fraclap/reduction.hpp"
#include "fraclap/report.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fraclap {

struct Tolerances {
    double eigen = 1e-10;          ///< eigenpair relative residual
    double cg = 1e-12;             ///< linear solve relative residual
    double identity = 1e-10;       ///< exact identities (scaling, additivity)
    double form_slack = 1e-12;     ///< quadratic-form inequalities on random vectors
    double chain_slack = 1e-10;    ///< averaging chain and Poincare bound
    double sandwich_slack = 1e-10; ///< eigenvalue bounds
    double degenerate = 1e-13;     ///< inequalities closer than this are flagged
};

struct ExperimentConfig {
    std::string experiment = "sandwich";
    std::vector<double> s_values{0.25, 0.5, 0.75};
    /// Adds s = 1 (three-point Laplacian) rows where an experiment supports them.
    bool include_baseline = false;
    std::vector<double> ell_values{1, 2, 4, 8};
    double omega_lo = -1.0;
    double omega_hi = 1.0;
    double hx = 2.0 / 64.0;
    double ht = 0.0; ///< 0 means ht = hx
    LoadSpec load;
    Tolerances tol;
    std::size_t random_vectors = 200;
    std::uint64_t seed = 20240917;
    std::string out = "fraclap-out";
    std::size_t threads = 0; ///< 0: FRACLAP_THREADS or the hardware concurrency
    /// sandwich: also solve the full two-axis eigenproblems (off: tensor identities only)
    bool full_form = true;
    std::size_t recovery_nt_fine = 4095;     ///< t nodes of B_1 for the 1-D cut-off quantities
    std::size_t recovery_nt_cylinder = 1023; ///< t nodes of B_1 for the two-axis functionals
    std::size_t mc_samples = 1000000;
    double gaussian_h = 0.05;
    double self_convergence_s = 0.5;
    double self_convergence_order = 1.0;
    FormOptions form;

    double effective_ht() const { return ht > 0.0 ? ht : hx; }
};

const std::vector<std::string>& experiment_names();

/// Defaults tuned per experiment (sweeps, s values).
ExperimentConfig default_config(const std::string& experiment);
/// Overlays the keys present in `j` on `config`. Unknown keys are errors.
void apply_json(ExperimentConfig& config, const Json& j);
/// default_config(experiment) overlaid with the JSON file at `path`.
ExperimentConfig load_config(const std::string& experiment, const std::filesystem::path& path);
/// Throws ConfigError on out-of-range values.
void validate(const ExperimentConfig& config);
Json to_json(const ExperimentConfig& config);

/// FRACLAP_THREADS if set, else config.threads, else the hardware concurrency.
std::size_t pool_size(const ExperimentConfig& config);

ExperimentReport run_scaling(const ExperimentConfig& config);
ExperimentReport run_sandwich(const ExperimentConfig& config);
ExperimentReport run_forms_check(const ExperimentConfig& config);
ExperimentReport run_reduction(const ExperimentConfig& config);
ExperimentReport run_recovery(const ExperimentConfig& config);
ExperimentReport run_gamma_pointwise(const ExperimentConfig& config);
ExperimentReport run_oracle(const ExperimentConfig& config);

ExperimentReport run_experiment(const ExperimentConfig& config);

} // namespace fraclap
