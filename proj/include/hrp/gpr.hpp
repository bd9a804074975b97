#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace hrp {

struct KernelParams {
    double amplitude = 1.0;    // tau
    double length_scale = 1.0; // eta
    void validate() const;
};

struct NoiseParam {
    double noise_std = 0.1; // observation noise; distinct from the Huber delta
    void validate() const;
};

// k(h, h') = tau^2 exp(-|h - h'|^2 / (2 eta^2))
double se_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelParams& k);

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& inputs, const KernelParams& k);

// Exact GP regressor with zero prior mean over the extractor's hidden states.
// chol is the lower Cholesky factor of K + noise^2 I + jitter I and alpha the
// cached solve of that matrix against the targets.
struct GPModel {
    Eigen::MatrixXd train_inputs; // n x m
    Eigen::VectorXd targets;      // n
    KernelParams kernel;
    NoiseParam noise;
    Eigen::MatrixXd chol;
    Eigen::VectorXd alpha;
    double jitter = 0.0; // the value actually used, after any escalation

    int size() const { return static_cast<int>(train_inputs.rows()); }
    int input_dim() const { return static_cast<int>(train_inputs.cols()); }
};

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
};

struct Interval {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double alpha = 0.05;
};

// Factorizes K + noise^2 I. A non-positive-definite matrix triggers jitter
// escalation from 1e-10 tau^2 by factors of 10 up to 1e-4 tau^2; beyond that a
// ConditioningError reports the last jitter tried.
GPModel fit_gp(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
               const KernelParams& kernel, const NoiseParam& noise, double jitter = 0.0);

// mean = k*^T (K + noise^2 I)^-1 y, variance = k(h*,h*) - k*^T (K + noise^2 I)^-1 k*.
// Rounding negatives above -1e-10 are clamped to zero; anything lower throws.
Posterior posterior(const GPModel& model, const Eigen::VectorXd& query);

double predict_point(const GPModel& model, const Eigen::VectorXd& query);

// Bounds are point -/+ z_{alpha/2} sqrt(variance), z from the normal inverse CDF.
Interval predict_interval(const GPModel& model, const Eigen::VectorXd& query, double alpha);

double log_marginal_likelihood(const GPModel& model);

// Inverse standard normal CDF (Acklam's rational approximation, Halley-refined).
double normal_quantile(double p);

struct HyperparamResult {
    KernelParams kernel;
    NoiseParam noise;
    double log_marginal = 0.0;
};

// Multi-start compass search in log-parameter space maximizing the marginal
// likelihood. The init triple is always evaluated first, so the result is never
// worse than init. budget counts likelihood evaluations across all restarts.
HyperparamResult optimize_hyperparams(const Eigen::MatrixXd& inputs,
                                      const Eigen::VectorXd& targets, const KernelParams& init_k,
                                      const NoiseParam& init_n, int budget, int restarts = 8,
                                      std::uint64_t seed = 0, double jitter = 0.0);

// Identity when n <= n_max; otherwise a seeded uniform subset without
// replacement, returned in ascending order.
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t n_max, std::uint64_t seed);

} // namespace hrp
