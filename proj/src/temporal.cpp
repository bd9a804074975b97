#include "hrp/temporal.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "hrp/errors.hpp"
#include "hrp/rng.hpp"

namespace hrp {

namespace {

inline double sigmoid_scalar(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Eigen::ArrayXXd sigmoid(Eigen::ArrayXXd a) { return 1.0 / (1.0 + (-a).exp()); }

} // namespace

void CellParams::check_consistent() const {
    const auto rows = w_forget.rows();
    const auto cols = w_forget.cols();
    if (rows < 1 || cols <= rows) throw ShapeError("cell weights must be m x (m + F) with F >= 1");
    for (const auto* w : {&w_input, &w_cell, &w_output})
        if (w->rows() != rows || w->cols() != cols)
            throw ShapeError("cell weight matrices must share one shape");
    for (const auto* b : {&b_forget, &b_input, &b_cell, &b_output})
        if (b->size() != rows) throw ShapeError("cell bias length must equal hidden size");
}

Optimizer optimizer_from_string(const std::string& name) {
    if (name == "plain-sgd" || name == "sgd") return Optimizer::PlainSgd;
    if (name == "adaptive-per-parameter" || name == "adaptive")
        return Optimizer::AdaptivePerParameter;
    throw ConfigError("unknown optimizer: " + name);
}

std::string optimizer_name(Optimizer opt) {
    return opt == Optimizer::PlainSgd ? "plain-sgd" : "adaptive-per-parameter";
}

void TrainConfig::validate() const {
    if (hidden_size < 1) throw ConfigError("hidden_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(huber_delta > 0.0)) throw ConfigError("huber_delta must be > 0");
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> cell_step(const CellParams& p,
                                                      const Eigen::VectorXd& x,
                                                      const Eigen::VectorXd& h_prev,
                                                      const Eigen::VectorXd& c_prev) {
    p.check_consistent();
    const int m = p.hidden_size();
    const int f = p.feature_size();
    if (x.size() != f || h_prev.size() != m || c_prev.size() != m)
        throw ShapeError("cell_step: input dimensions do not match parameters");

    Eigen::VectorXd z(m + f);
    z.head(m) = h_prev;
    z.tail(f) = x;

    const Eigen::ArrayXd gate_f = (p.w_forget * z + p.b_forget).unaryExpr(&sigmoid_scalar).array();
    const Eigen::ArrayXd gate_i = (p.w_input * z + p.b_input).unaryExpr(&sigmoid_scalar).array();
    const Eigen::ArrayXd gate_o = (p.w_output * z + p.b_output).unaryExpr(&sigmoid_scalar).array();
    const Eigen::ArrayXd cand = (p.w_cell * z + p.b_cell).array().tanh();

    Eigen::VectorXd c_t = (gate_f * c_prev.array() + gate_i * cand).matrix();
    Eigen::VectorXd h_t = (gate_o * c_t.array().tanh()).matrix();
    return {std::move(h_t), std::move(c_t)};
}

Eigen::VectorXd extract(const ExtractorModel& model, const Eigen::MatrixXd& window) {
    if (window.cols() != model.n_features)
        throw ShapeError("extract: window has " + std::to_string(window.cols()) +
                         " features, model expects " + std::to_string(model.n_features));
    Eigen::VectorXd h = Eigen::VectorXd::Zero(model.hidden_size);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(model.hidden_size);
    for (Eigen::Index t = 0; t < window.rows(); ++t) {
        auto [h_t, c_t] = cell_step(model.cell, window.row(t).transpose(), h, c);
        h = std::move(h_t);
        c = std::move(c_t);
    }
    return h;
}

double readout(const ExtractorModel& model, const Eigen::VectorXd& hidden) {
    if (hidden.size() != model.readout_weight.size())
        throw ShapeError("readout: hidden size mismatch");
    return model.readout_weight.dot(hidden) + model.readout_bias;
}

double huber_loss(double a, double delta) {
    const double abs_a = std::abs(a);
    if (abs_a <= delta) return 0.5 * a * a;
    return delta * (abs_a - 0.5 * delta);
}

double huber_grad(double a, double delta) {
    if (std::abs(a) <= delta) return a;
    return a > 0.0 ? delta : -delta;
}

// ---------------------------------------------------------------------------
// Batched forward/backward over a set of windows. The batch dimension is the
// row dimension of every intermediate, so each time step is one GEMM per gate.

namespace {

struct BatchCache {
    std::vector<Eigen::MatrixXd> z;                    // B x (m+F)
    std::vector<Eigen::ArrayXXd> f, i, o, g, c, tanh_c; // B x m
    Eigen::MatrixXd h_last;                            // B x m
    Eigen::VectorXd preds;                             // B
};

BatchCache forward_batch(const ExtractorModel& model, const WindowSet& ws,
                         const std::vector<std::size_t>& idx) {
    const int m = model.hidden_size;
    const int f = model.n_features;
    const int len = ws.window_length;
    const Eigen::Index b = static_cast<Eigen::Index>(idx.size());

    BatchCache cache;
    cache.z.reserve(static_cast<std::size_t>(len));
    cache.f.reserve(static_cast<std::size_t>(len));
    cache.i.reserve(static_cast<std::size_t>(len));
    cache.o.reserve(static_cast<std::size_t>(len));
    cache.g.reserve(static_cast<std::size_t>(len));
    cache.c.reserve(static_cast<std::size_t>(len));
    cache.tanh_c.reserve(static_cast<std::size_t>(len));

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(b, m);
    Eigen::ArrayXXd c = Eigen::ArrayXXd::Zero(b, m);
    for (int t = 0; t < len; ++t) {
        Eigen::MatrixXd z(b, m + f);
        z.leftCols(m) = h;
        for (Eigen::Index r = 0; r < b; ++r)
            z.row(r).tail(f) = ws.windows[idx[static_cast<std::size_t>(r)]].row(t);

        Eigen::ArrayXXd gate_f =
            sigmoid(((z * model.cell.w_forget.transpose()).rowwise() +
                     model.cell.b_forget.transpose())
                        .array());
        Eigen::ArrayXXd gate_i =
            sigmoid(((z * model.cell.w_input.transpose()).rowwise() +
                     model.cell.b_input.transpose())
                        .array());
        Eigen::ArrayXXd gate_o =
            sigmoid(((z * model.cell.w_output.transpose()).rowwise() +
                     model.cell.b_output.transpose())
                        .array());
        Eigen::ArrayXXd cand = ((z * model.cell.w_cell.transpose()).rowwise() +
                                model.cell.b_cell.transpose())
                                   .array()
                                   .tanh();

        c = gate_f * c + gate_i * cand;
        Eigen::ArrayXXd tanh_c = c.tanh();
        h = (gate_o * tanh_c).matrix();

        cache.z.push_back(std::move(z));
        cache.f.push_back(std::move(gate_f));
        cache.i.push_back(std::move(gate_i));
        cache.o.push_back(std::move(gate_o));
        cache.g.push_back(std::move(cand));
        cache.c.push_back(c);
        cache.tanh_c.push_back(std::move(tanh_c));
    }
    cache.h_last = h;
    cache.preds = h * model.readout_weight + Eigen::VectorXd::Constant(b, model.readout_bias);
    return cache;
}

ExtractorGradients zero_gradients(const ExtractorModel& model) {
    ExtractorGradients g;
    const auto rows = model.cell.w_forget.rows();
    const auto cols = model.cell.w_forget.cols();
    g.cell.w_forget = Eigen::MatrixXd::Zero(rows, cols);
    g.cell.w_input = Eigen::MatrixXd::Zero(rows, cols);
    g.cell.w_cell = Eigen::MatrixXd::Zero(rows, cols);
    g.cell.w_output = Eigen::MatrixXd::Zero(rows, cols);
    g.cell.b_forget = Eigen::VectorXd::Zero(rows);
    g.cell.b_input = Eigen::VectorXd::Zero(rows);
    g.cell.b_cell = Eigen::VectorXd::Zero(rows);
    g.cell.b_output = Eigen::VectorXd::Zero(rows);
    g.readout_weight = Eigen::VectorXd::Zero(rows);
    g.readout_bias = 0.0;
    return g;
}

// Mean Huber loss over the batch and its parameter gradients.
double backward_batch(const ExtractorModel& model, const WindowSet& ws,
                      const std::vector<std::size_t>& idx, double delta, const BatchCache& cache,
                      ExtractorGradients& grads) {
    const int m = model.hidden_size;
    const Eigen::Index b = static_cast<Eigen::Index>(idx.size());
    const int len = ws.window_length;

    double loss = 0.0;
    Eigen::VectorXd dpred(b);
    for (Eigen::Index r = 0; r < b; ++r) {
        const double a = cache.preds(r) - ws.labels[idx[static_cast<std::size_t>(r)]];
        loss += huber_loss(a, delta);
        dpred(r) = huber_grad(a, delta) / static_cast<double>(b);
    }
    loss /= static_cast<double>(b);

    grads.readout_weight += cache.h_last.transpose() * dpred;
    grads.readout_bias += dpred.sum();

    Eigen::ArrayXXd dh = (dpred * model.readout_weight.transpose()).array(); // B x m
    Eigen::ArrayXXd dc = Eigen::ArrayXXd::Zero(b, m);
    for (int t = len - 1; t >= 0; --t) {
        const auto& gate_f = cache.f[static_cast<std::size_t>(t)];
        const auto& gate_i = cache.i[static_cast<std::size_t>(t)];
        const auto& gate_o = cache.o[static_cast<std::size_t>(t)];
        const auto& cand = cache.g[static_cast<std::size_t>(t)];
        const auto& tanh_c = cache.tanh_c[static_cast<std::size_t>(t)];
        const auto& z = cache.z[static_cast<std::size_t>(t)];

        const Eigen::ArrayXXd d_o = dh * tanh_c;
        dc += dh * gate_o * (1.0 - tanh_c.square());

        Eigen::ArrayXXd c_prev;
        if (t > 0)
            c_prev = cache.c[static_cast<std::size_t>(t - 1)];
        else
            c_prev = Eigen::ArrayXXd::Zero(b, m);

        const Eigen::ArrayXXd d_f = dc * c_prev;
        const Eigen::ArrayXXd d_i = dc * cand;
        const Eigen::ArrayXXd d_g = dc * gate_i;

        const Eigen::MatrixXd da_f = (d_f * gate_f * (1.0 - gate_f)).matrix();
        const Eigen::MatrixXd da_i = (d_i * gate_i * (1.0 - gate_i)).matrix();
        const Eigen::MatrixXd da_o = (d_o * gate_o * (1.0 - gate_o)).matrix();
        const Eigen::MatrixXd da_g = (d_g * (1.0 - cand.square())).matrix();

        grads.cell.w_forget += da_f.transpose() * z;
        grads.cell.w_input += da_i.transpose() * z;
        grads.cell.w_output += da_o.transpose() * z;
        grads.cell.w_cell += da_g.transpose() * z;
        grads.cell.b_forget += da_f.colwise().sum().transpose();
        grads.cell.b_input += da_i.colwise().sum().transpose();
        grads.cell.b_output += da_o.colwise().sum().transpose();
        grads.cell.b_cell += da_g.colwise().sum().transpose();

        const Eigen::MatrixXd dz = da_f * model.cell.w_forget + da_i * model.cell.w_input +
                                   da_g * model.cell.w_cell + da_o * model.cell.w_output;
        dh = dz.leftCols(m).array();
        dc *= gate_f;
    }
    return loss;
}

template <class Fn>
void for_each_pair(CellParams& a, CellParams& b, Fn&& fn) {
    fn(a.w_forget, b.w_forget);
    fn(a.w_input, b.w_input);
    fn(a.w_cell, b.w_cell);
    fn(a.w_output, b.w_output);
    fn(a.b_forget, b.b_forget);
    fn(a.b_input, b.b_input);
    fn(a.b_cell, b.b_cell);
    fn(a.b_output, b.b_output);
}

bool gradients_finite(const ExtractorGradients& g) {
    const auto ok = [](const auto& x) { return x.allFinite(); };
    return ok(g.cell.w_forget) && ok(g.cell.w_input) && ok(g.cell.w_cell) && ok(g.cell.w_output) &&
           ok(g.cell.b_forget) && ok(g.cell.b_input) && ok(g.cell.b_cell) && ok(g.cell.b_output) &&
           ok(g.readout_weight) && std::isfinite(g.readout_bias);
}

} // namespace

Eigen::MatrixXd extract_batch(const ExtractorModel& model, const WindowSet& ws) {
    if (ws.n_features != model.n_features)
        throw ShapeError("extract_batch: feature count mismatch");
    std::vector<std::size_t> idx(ws.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (idx.empty()) return Eigen::MatrixXd(0, model.hidden_size);
    return forward_batch(model, ws, idx).h_last;
}

double window_loss(const ExtractorModel& model, const Eigen::MatrixXd& window, double label,
                   double delta) {
    return huber_loss(readout(model, extract(model, window)) - label, delta);
}

ExtractorGradients extractor_gradients(const ExtractorModel& model, const Eigen::MatrixXd& window,
                                       double label, double delta) {
    WindowSet ws;
    ws.window_length = static_cast<int>(window.rows());
    ws.n_features = static_cast<int>(window.cols());
    ws.windows.push_back(window);
    ws.labels.push_back(label);
    ws.provenance.push_back({0, 0, false});

    const std::vector<std::size_t> idx{0};
    const BatchCache cache = forward_batch(model, ws, idx);
    ExtractorGradients grads = zero_gradients(model);
    backward_batch(model, ws, idx, delta, cache, grads);
    return grads;
}

ExtractorGradients finite_diff_gradients(const ExtractorModel& model, const Eigen::MatrixXd& window,
                                         double label, double delta, double step) {
    ExtractorGradients grads = zero_gradients(model);
    ExtractorModel probe = model;

    const auto central = [&](double& param) {
        const double saved = param;
        param = saved + step;
        const double up = window_loss(probe, window, label, delta);
        param = saved - step;
        const double down = window_loss(probe, window, label, delta);
        param = saved;
        return (up - down) / (2.0 * step);
    };

    for_each_pair(probe.cell, grads.cell, [&](auto& p, auto& g) {
        for (Eigen::Index k = 0; k < p.size(); ++k) g.data()[k] = central(p.data()[k]);
    });
    for (Eigen::Index k = 0; k < probe.readout_weight.size(); ++k)
        grads.readout_weight(k) = central(probe.readout_weight(k));
    grads.readout_bias = central(probe.readout_bias);
    return grads;
}

double max_relative_gradient_error(const ExtractorGradients& analytic,
                                   const ExtractorGradients& numeric) {
    double worst = 0.0;
    const auto compare = [&](double a, double n) {
        const double denom = std::max({std::abs(a), std::abs(n), 1e-6});
        worst = std::max(worst, std::abs(a - n) / denom);
    };
    ExtractorGradients a = analytic; // for_each_pair wants mutable refs
    ExtractorGradients n = numeric;
    for_each_pair(a.cell, n.cell, [&](auto& pa, auto& pn) {
        for (Eigen::Index k = 0; k < pa.size(); ++k) compare(pa.data()[k], pn.data()[k]);
    });
    for (Eigen::Index k = 0; k < a.readout_weight.size(); ++k)
        compare(a.readout_weight(k), n.readout_weight(k));
    compare(a.readout_bias, n.readout_bias);
    return worst;
}

double gradient_check(const ExtractorModel& model, const Eigen::MatrixXd& window, double label,
                      double delta, double step) {
    const ExtractorGradients analytic = extractor_gradients(model, window, label, delta);
    const ExtractorGradients numeric = finite_diff_gradients(model, window, label, delta, step);
    return max_relative_gradient_error(analytic, numeric);
}

ExtractorModel init_extractor(int hidden_size, int n_features, std::uint64_t seed) {
    if (hidden_size < 1 || n_features < 1)
        throw ConfigError("init_extractor: hidden_size and n_features must be >= 1");
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
    const auto draw_matrix = [&](Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXd w(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = rng.uniform(-bound, bound);
        return w;
    };

    ExtractorModel model;
    model.hidden_size = hidden_size;
    model.n_features = n_features;
    const Eigen::Index m = hidden_size;
    const Eigen::Index cols = m + n_features;
    model.cell.w_forget = draw_matrix(m, cols);
    model.cell.w_input = draw_matrix(m, cols);
    model.cell.w_cell = draw_matrix(m, cols);
    model.cell.w_output = draw_matrix(m, cols);
    model.cell.b_forget = Eigen::VectorXd::Zero(m);
    model.cell.b_input = Eigen::VectorXd::Zero(m);
    model.cell.b_cell = Eigen::VectorXd::Zero(m);
    model.cell.b_output = Eigen::VectorXd::Zero(m);
    model.readout_weight = draw_matrix(m, 1);
    model.readout_bias = 0.0;
    return model;
}

double mean_huber_loss(const ExtractorModel& model, const WindowSet& ws, double delta) {
    if (ws.size() == 0) throw DomainError("mean_huber_loss: empty window set");
    std::vector<std::size_t> idx(ws.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const BatchCache cache = forward_batch(model, ws, idx);
    double loss = 0.0;
    for (std::size_t r = 0; r < ws.size(); ++r)
        loss += huber_loss(cache.preds(static_cast<Eigen::Index>(r)) - ws.labels[r], delta);
    return loss / static_cast<double>(ws.size());
}

ExtractorModel train_extractor(const WindowSet& ws, const TrainConfig& cfg,
                               const EpochCallback& on_epoch) {
    cfg.validate();
    if (ws.size() == 0) throw DomainError("train_extractor: empty window set");

    ExtractorModel model = init_extractor(cfg.hidden_size, ws.n_features,
                                          derive_seed(cfg.seed, "extractor/init"));
    Rng shuffle_rng(derive_seed(cfg.seed, "extractor/shuffle"));

    // Adam-style per-parameter state; unused for plain SGD.
    ExtractorGradients moment1 = zero_gradients(model);
    ExtractorGradients moment2 = zero_gradients(model);
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step_count = 0;

    const auto apply_update = [&](ExtractorGradients& grads) {
        if (cfg.optimizer == Optimizer::PlainSgd) {
            for_each_pair(model.cell, grads.cell,
                          [&](auto& p, auto& g) { p -= cfg.learning_rate * g; });
            model.readout_weight -= cfg.learning_rate * grads.readout_weight;
            model.readout_bias -= cfg.learning_rate * grads.readout_bias;
            return;
        }
        ++step_count;
        const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
        const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
        const auto adam = [&](double& p, double g, double& m1, double& m2) {
            m1 = beta1 * m1 + (1.0 - beta1) * g;
            m2 = beta2 * m2 + (1.0 - beta2) * g * g;
            p -= cfg.learning_rate * (m1 / corr1) / (std::sqrt(m2 / corr2) + eps);
        };
        const auto update_block = [&](auto& p, const auto& g, auto& m1, auto& m2) {
            for (Eigen::Index k = 0; k < p.size(); ++k)
                adam(p.data()[k], g.data()[k], m1.data()[k], m2.data()[k]);
        };
        update_block(model.cell.w_forget, grads.cell.w_forget, moment1.cell.w_forget,
                     moment2.cell.w_forget);
        update_block(model.cell.w_input, grads.cell.w_input, moment1.cell.w_input,
                     moment2.cell.w_input);
        update_block(model.cell.w_cell, grads.cell.w_cell, moment1.cell.w_cell,
                     moment2.cell.w_cell);
        update_block(model.cell.w_output, grads.cell.w_output, moment1.cell.w_output,
                     moment2.cell.w_output);
        update_block(model.cell.b_forget, grads.cell.b_forget, moment1.cell.b_forget,
                     moment2.cell.b_forget);
        update_block(model.cell.b_input, grads.cell.b_input, moment1.cell.b_input,
                     moment2.cell.b_input);
        update_block(model.cell.b_cell, grads.cell.b_cell, moment1.cell.b_cell,
                     moment2.cell.b_cell);
        update_block(model.cell.b_output, grads.cell.b_output, moment1.cell.b_output,
                     moment2.cell.b_output);
        update_block(model.readout_weight, grads.readout_weight, moment1.readout_weight,
                     moment2.readout_weight);
        adam(model.readout_bias, grads.readout_bias, moment1.readout_bias, moment2.readout_bias);
    };

    std::vector<std::size_t> order(ws.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                 order.begin() + static_cast<std::ptrdiff_t>(stop));
            const BatchCache cache = forward_batch(model, ws, batch);
            ExtractorGradients grads = zero_gradients(model);
            const double loss = backward_batch(model, ws, batch, cfg.huber_delta, cache, grads);
            if (!std::isfinite(loss) || !gradients_finite(grads))
                throw NumericError("training diverged (non-finite loss or gradient); "
                                   "try a smaller learning_rate");
            apply_update(grads);
            epoch_loss += loss * static_cast<double>(batch.size());
        }
        if (on_epoch) on_epoch(epoch, epoch_loss / static_cast<double>(ws.size()));
    }
    return model;
}

} // namespace hrp
