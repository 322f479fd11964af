#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hothand/grid.hpp"
#include "hothand/inference.hpp"

namespace hothand {

struct OptimizerConfig {
    double tol_grad = 1e-5;       // max-norm on the mean-NLL gradient
    double tol_rel_loglik = 1e-8;
    int max_iter = 500;
    double fd_step = 1e-6;        // scaled by max(1, |x_i|)
    double start_jitter = 0.0;    // uniform perturbation of the start point
    std::uint64_t seed = 0;       // drives the start-point jitter
};

enum class ModelKind { Ssm, Benchmark };

struct Interval {
    double lower;
    double upper;
};

struct FitResult {
    ModelKind kind = ModelKind::Benchmark;
    std::optional<OUParams> ou;
    RegressionParams reg;
    double loglik = 0.0;
    int k = 0;           // parameter count
    long n = 0;          // total number of throws
    double aic = 0.0;
    double bic = 0.0;
    bool ci_available = false;
    std::map<std::string, Interval> ci;  // natural scale, keyed by parameter name
    int iterations = 0;
    bool converged = false;
    double grad_norm = 0.0;
    std::vector<std::string> warnings;

    // Names in packing order: (log_theta, log_sigma for SSM,) b0:<player>...,
    // beta_home, beta_scorediff, beta_last30, beta_ft2, beta_ft3.
    std::vector<std::string> param_names;
    Eigen::VectorXd estimates;  // natural scale, same order
};

struct ComparisonReport {
    double delta_aic;  // AIC_benchmark - AIC_ssm
    double delta_bic;
    std::string preferred_aic;  // "ssm" or "benchmark"
    std::string preferred_bic;
    long n;
};

FitResult fit_ssm(const std::vector<ThrowSequence>& data, const StateGrid& grid,
                  const OptimizerConfig& config = {});

FitResult fit_benchmark(const std::vector<ThrowSequence>& data,
                        const OptimizerConfig& config = {});

// Warm-started variants, e.g. for refitting from a previous optimum.
FitResult fit_ssm(const std::vector<ThrowSequence>& data, const StateGrid& grid,
                  const OptimizerConfig& config, const FitResult& warm_start);
FitResult fit_benchmark(const std::vector<ThrowSequence>& data, const OptimizerConfig& config,
                        const FitResult& warm_start);

// Numerical Hessian of the negative log-likelihood on the working scale at
// the optimum; CIs as estimate +- 1.96 se, exponentiated endpoints for
// theta and sigma. A non-positive-definite Hessian leaves ci_available
// false.
FitResult confidence_intervals(FitResult fit, const std::vector<ThrowSequence>& data,
                               const StateGrid& grid);

ComparisonReport compare(const FitResult& ssm, const FitResult& benchmark);

// Gradient of total_loglik at the given packed working-scale point, as the
// optimizer computes it. Exposed for the gradient-check property.
Eigen::VectorXd loglik_gradient(const std::vector<ThrowSequence>& data, const StateGrid& grid,
                                ModelKind kind, const Eigen::VectorXd& x,
                                const std::vector<std::string>& names,
                                const OptimizerConfig& config = {});

// Working-scale packing used by the optimizer (log theta, log sigma,
// intercepts in sorted player order, then slopes).
std::vector<std::string> param_names_for(const std::vector<ThrowSequence>& data, ModelKind kind);
Eigen::VectorXd pack_params(ModelKind kind, const std::optional<OUParams>& ou,
                            const RegressionParams& reg,
                            const std::vector<std::string>& names);
void unpack_params(ModelKind kind, const Eigen::VectorXd& x,
                   const std::vector<std::string>& names, std::optional<OUParams>& ou,
                   RegressionParams& reg);

}  // namespace hothand
