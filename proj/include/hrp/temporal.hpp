#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>

#include "hrp/preprocess.hpp"

namespace hrp {

// Gated recurrent cell. Each weight matrix acts on the concatenation
// [h_prev, x_t], so its shape is hidden x (hidden + features).
struct CellParams {
    Eigen::MatrixXd w_forget, w_input, w_cell, w_output;
    Eigen::VectorXd b_forget, b_input, b_cell, b_output;

    int hidden_size() const { return static_cast<int>(w_forget.rows()); }
    int feature_size() const {
        return static_cast<int>(w_forget.cols() - w_forget.rows());
    }
    void check_consistent() const;
};

// Recurrent extractor plus a scalar affine readout. The readout provides the
// supervised training signal; downstream regression consumes the hidden state.
struct ExtractorModel {
    CellParams cell;
    int hidden_size = 0;
    int n_features = 0;
    Eigen::VectorXd readout_weight;
    double readout_bias = 0.0;
};

enum class Optimizer { PlainSgd, AdaptivePerParameter };

Optimizer optimizer_from_string(const std::string& name);
std::string optimizer_name(Optimizer opt);

struct TrainConfig {
    int hidden_size = 32;
    double learning_rate = 1e-3;
    int epochs = 50;
    int batch_size = 256;
    double huber_delta = 1.0; // in capped-RUL cycle units
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::AdaptivePerParameter;

    void validate() const;
};

// One step of the gated recurrence:
//   f,i,o = sigmoid(W [h,x] + b);  g = tanh(W_c [h,x] + b_c)
//   C_t = f.*C_prev + i.*g;  h_t = o.*tanh(C_t)
std::pair<Eigen::VectorXd, Eigen::VectorXd> cell_step(const CellParams& p,
                                                      const Eigen::VectorXd& x,
                                                      const Eigen::VectorXd& h_prev,
                                                      const Eigen::VectorXd& c_prev);

// Final hidden state after iterating the cell over the window rows from zero state.
Eigen::VectorXd extract(const ExtractorModel& model, const Eigen::MatrixXd& window);

// Hidden states for every window, one row per window.
Eigen::MatrixXd extract_batch(const ExtractorModel& model, const WindowSet& ws);

double readout(const ExtractorModel& model, const Eigen::VectorXd& hidden);

// 0.5 a^2 inside |a| <= delta, delta (|a| - delta/2) outside.
double huber_loss(double a, double delta);
double huber_grad(double a, double delta);

struct ExtractorGradients {
    CellParams cell; // same shapes as the model, holding d(loss)/d(param)
    Eigen::VectorXd readout_weight;
    double readout_bias = 0.0;
};

double window_loss(const ExtractorModel& model, const Eigen::MatrixXd& window, double label,
                   double delta);
ExtractorGradients extractor_gradients(const ExtractorModel& model, const Eigen::MatrixXd& window,
                                       double label, double delta);
ExtractorGradients finite_diff_gradients(const ExtractorModel& model, const Eigen::MatrixXd& window,
                                         double label, double delta, double step = 1e-5);
double max_relative_gradient_error(const ExtractorGradients& analytic,
                                   const ExtractorGradients& numeric);

// Worst relative discrepancy between backprop and central finite differences.
double gradient_check(const ExtractorModel& model, const Eigen::MatrixXd& window, double label,
                      double delta, double step = 1e-5);

// Weights uniform in [-1/sqrt(m), 1/sqrt(m)], biases zero, from the seeded stream.
ExtractorModel init_extractor(int hidden_size, int n_features, std::uint64_t seed);

double mean_huber_loss(const ExtractorModel& model, const WindowSet& ws, double delta);

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

// Mini-batch training of readout(extract(window)) against capped RUL labels.
// Deterministic given cfg.seed: initialization and shuffle order are pinned.
ExtractorModel train_extractor(const WindowSet& ws, const TrainConfig& cfg,
                               const EpochCallback& on_epoch = {});

} // namespace hrp
