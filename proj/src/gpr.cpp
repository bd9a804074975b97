#include "hrp/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "hrp/errors.hpp"
#include "hrp/rng.hpp"

namespace hrp {

void KernelParams::validate() const {
    if (!(amplitude > 0.0)) throw ConfigError("kernel amplitude must be > 0");
    if (!(length_scale > 0.0)) throw ConfigError("kernel length_scale must be > 0");
}

void NoiseParam::validate() const {
    if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
}

double se_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelParams& k) {
    if (a.size() != b.size()) throw ShapeError("se_kernel: dimension mismatch");
    const double d2 = (a - b).squaredNorm();
    return k.amplitude * k.amplitude * std::exp(-d2 / (2.0 * k.length_scale * k.length_scale));
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& inputs, const KernelParams& k) {
    const Eigen::Index n = inputs.rows();
    const double tau2 = k.amplitude * k.amplitude;
    const double inv = 1.0 / (2.0 * k.length_scale * k.length_scale);
    Eigen::MatrixXd kk(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        kk(i, i) = tau2;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d2 = (inputs.row(i) - inputs.row(j)).squaredNorm();
            const double v = tau2 * std::exp(-d2 * inv);
            kk(i, j) = v;
            kk(j, i) = v; // symmetric by construction
        }
    }
    return kk;
}

GPModel fit_gp(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
               const KernelParams& kernel, const NoiseParam& noise, double jitter) {
    kernel.validate();
    noise.validate();
    if (inputs.rows() < 1) throw DomainError("fit_gp: need at least one training point");
    if (inputs.rows() != targets.size()) throw ShapeError("fit_gp: inputs/targets length mismatch");
    if (!inputs.allFinite() || !targets.allFinite())
        throw NumericError("fit_gp: non-finite training data");
    if (jitter < 0.0) throw ConfigError("fit_gp: jitter must be >= 0");

    const Eigen::Index n = inputs.rows();
    const double tau2 = kernel.amplitude * kernel.amplitude;
    const Eigen::MatrixXd base =
        kernel_matrix(inputs, kernel) +
        noise.noise_std * noise.noise_std * Eigen::MatrixXd::Identity(n, n);

    // Jitter ladder: the caller's value first, then 1e-10 tau^2 escalating x10
    // up to 1e-4 tau^2.
    std::vector<double> ladder{jitter};
    for (double j = 1e-10 * tau2; j <= 1e-4 * tau2 * (1.0 + 1e-12); j *= 10.0)
        if (j > jitter) ladder.push_back(j);

    for (const double j : ladder) {
        const Eigen::MatrixXd m = base + j * Eigen::MatrixXd::Identity(n, n);
        const Eigen::LLT<Eigen::MatrixXd> llt(m);
        if (llt.info() != Eigen::Success) continue;
        GPModel model;
        model.train_inputs = inputs;
        model.targets = targets;
        model.kernel = kernel;
        model.noise = noise;
        model.chol = llt.matrixL();
        model.alpha = llt.solve(targets);
        model.jitter = j;
        return model;
    }
    throw ConditioningError("fit_gp: factorization failed up to jitter " +
                            std::to_string(ladder.back()));
}

namespace {

Eigen::VectorXd kernel_vector(const GPModel& model, const Eigen::VectorXd& query) {
    if (query.size() != model.input_dim())
        throw ShapeError("posterior: query has dimension " + std::to_string(query.size()) +
                         ", model expects " + std::to_string(model.input_dim()));
    const Eigen::Index n = model.train_inputs.rows();
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i)
        k(i) = se_kernel(model.train_inputs.row(i).transpose(), query, model.kernel);
    return k;
}

} // namespace

Posterior posterior(const GPModel& model, const Eigen::VectorXd& query) {
    const Eigen::VectorXd k_star = kernel_vector(model, query);
    const Eigen::VectorXd v = model.chol.triangularView<Eigen::Lower>().solve(k_star);

    Posterior post;
    post.mean = k_star.dot(model.alpha);
    const double prior = model.kernel.amplitude * model.kernel.amplitude;
    double var = prior - v.squaredNorm();
    if (var < 0.0) {
        if (var < -1e-10)
            throw NumericError("posterior variance " + std::to_string(var) +
                               " is negative beyond rounding tolerance");
        var = 0.0;
    }
    post.variance = var;
    return post;
}

double predict_point(const GPModel& model, const Eigen::VectorXd& query) {
    return posterior(model, query).mean;
}

Interval predict_interval(const GPModel& model, const Eigen::VectorXd& query, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
    const Posterior post = posterior(model, query);
    const double z = normal_quantile(1.0 - alpha / 2.0);
    const double half_width = z * std::sqrt(post.variance);
    return Interval{post.mean, post.mean - half_width, post.mean + half_width, alpha};
}

double log_marginal_likelihood(const GPModel& model) {
    const Eigen::Index n = model.train_inputs.rows();
    const double quad = model.targets.dot(model.alpha);
    const double log_det_half = model.chol.diagonal().array().log().sum();
    return -0.5 * quad - log_det_half -
           0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0,1)");

    // Acklam's rational approximation.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Halley step against the exact CDF brings the result to machine accuracy.
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

namespace {

struct LogPoint {
    double log_tau;
    double log_eta;
    double log_noise; // noise floored at 1e-8 inside the search
};

constexpr double kNoiseFloor = 1e-8;

LogPoint to_log(const KernelParams& k, const NoiseParam& n) {
    return {std::log(k.amplitude), std::log(k.length_scale),
            std::log(std::max(n.noise_std, kNoiseFloor))};
}

std::pair<KernelParams, NoiseParam> from_log(const LogPoint& p) {
    return {KernelParams{std::exp(p.log_tau), std::exp(p.log_eta)},
            NoiseParam{std::exp(p.log_noise)}};
}

} // namespace

HyperparamResult optimize_hyperparams(const Eigen::MatrixXd& inputs,
                                      const Eigen::VectorXd& targets, const KernelParams& init_k,
                                      const NoiseParam& init_n, int budget, int restarts,
                                      std::uint64_t seed, double jitter) {
    init_k.validate();
    init_n.validate();
    if (budget < 1) throw ConfigError("optimize_hyperparams: budget must be >= 1");
    if (restarts < 1) throw ConfigError("optimize_hyperparams: restarts must be >= 1");

    int evals_left = budget;
    const auto evaluate = [&](const KernelParams& k, const NoiseParam& n) -> double {
        if (evals_left <= 0) return -std::numeric_limits<double>::infinity();
        --evals_left;
        try {
            return log_marginal_likelihood(fit_gp(inputs, targets, k, n, jitter));
        } catch (const NumericError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    HyperparamResult best{init_k, init_n, evaluate(init_k, init_n)};

    Rng rng(seed);
    const LogPoint origin = to_log(init_k, init_n);
    for (int r = 0; r < restarts && evals_left > 0; ++r) {
        LogPoint point = origin;
        if (r > 0) {
            point.log_tau += rng.uniform(-1.5, 1.5);
            point.log_eta += rng.uniform(-1.5, 1.5);
            point.log_noise += rng.uniform(-1.5, 1.5);
        }
        auto [k, n] = from_log(point);
        double value = evaluate(k, n);
        if (value > best.log_marginal) best = {k, n, value};

        double step = 0.5;
        while (step >= 1e-3 && evals_left > 0) {
            bool improved = false;
            for (double* coord : {&point.log_tau, &point.log_eta, &point.log_noise}) {
                for (const double dir : {+1.0, -1.0}) {
                    if (evals_left <= 0) break;
                    const double saved = *coord;
                    *coord = saved + dir * step;
                    auto [ck, cn] = from_log(point);
                    const double cv = evaluate(ck, cn);
                    if (cv > value) {
                        value = cv;
                        improved = true;
                        if (cv > best.log_marginal) best = {ck, cn, cv};
                        break; // keep the move
                    }
                    *coord = saved;
                }
            }
            if (!improved) step *= 0.5;
        }
    }
    return best;
}

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t n_max, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (n <= n_max) return idx;

    Rng rng(seed);
    for (std::size_t i = 0; i < n_max; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n_max);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace hrp
