#include "hrp/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "hrp/errors.hpp"
#include "hrp/util.hpp"

namespace hrp {

std::vector<int> default_selected_sensors() {
    return {2, 3, 4, 7, 8, 9, 11, 12, 13, 14, 15, 17, 20, 21};
}

int default_window_length(const std::string& dataset) {
    if (dataset == "FD001") return 25;
    if (dataset == "FD002") return 20;
    if (dataset == "FD003") return 30;
    if (dataset == "FD004") return 15;
    return 25;
}

std::vector<int> PreprocessConfig::sensors() const {
    return selected_sensors.empty() ? default_selected_sensors() : selected_sensors;
}

void PreprocessConfig::validate() const {
    const auto ids = sensors();
    std::set<int> seen;
    for (const int id : ids) {
        if (id < 1 || id > kNumRawSensors)
            throw ConfigError("sensor index out of range 1..21: " + std::to_string(id));
        if (!seen.insert(id).second)
            throw ConfigError("duplicate sensor index: " + std::to_string(id));
    }
    if (rul_cap < 1) throw ConfigError("rul_cap must be >= 1");
    if (window_length < 1) throw ConfigError("window_length must be >= 1");
    if (stride < 1) throw ConfigError("stride must be >= 1");
    const double b = beta();
    if (!(b > 0.0 && b <= 1.0))
        throw ConfigError("smoothing_s must give beta = 2/(1+s) in (0,1]");
}

ReducedTrajectory select_sensors(const Trajectory& traj, const PreprocessConfig& cfg) {
    cfg.validate();
    const auto ids = cfg.sensors();
    ReducedTrajectory out;
    out.unit_id = traj.unit_id;
    out.sensor_ids = ids;
    out.values.resize(traj.length(), static_cast<Eigen::Index>(ids.size()));
    for (int t = 0; t < traj.length(); ++t) {
        const auto& sensors = traj.records[static_cast<std::size_t>(t)].sensors;
        for (std::size_t j = 0; j < ids.size(); ++j) {
            const std::size_t col = static_cast<std::size_t>(ids[j] - 1);
            if (col >= sensors.size())
                throw ConfigError("sensor " + std::to_string(ids[j]) +
                                  " not present in trajectory with " +
                                  std::to_string(sensors.size()) + " channels");
            out.values(t, static_cast<Eigen::Index>(j)) = sensors[col];
        }
    }
    return out;
}

int cap_rul(int total_life, int cycle, int cap) {
    if (cycle < 1 || cycle > total_life)
        throw DomainError("cycle " + std::to_string(cycle) + " outside 1.." +
                          std::to_string(total_life));
    return std::min(total_life - cycle, cap);
}

NormalizationStats fit_normalization(const std::vector<ReducedTrajectory>& train) {
    if (train.empty()) throw DomainError("fit_normalization: no trajectories");
    const auto& ids = train.front().sensor_ids;
    const Eigen::Index f = train.front().values.cols();

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(f);
    long n = 0;
    for (const auto& traj : train) {
        if (traj.values.cols() != f) throw ShapeError("fit_normalization: channel count mismatch");
        sum += traj.values.colwise().sum().transpose();
        n += traj.values.rows();
    }
    if (n == 0) throw DomainError("fit_normalization: no records");

    NormalizationStats stats;
    stats.sensor_ids = ids;
    stats.mean = sum / static_cast<double>(n);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(f);
    for (const auto& traj : train) {
        const Eigen::MatrixXd centered = traj.values.rowwise() - stats.mean.transpose();
        sq += centered.array().square().colwise().sum().matrix().transpose();
    }
    stats.stddev = (sq / static_cast<double>(n)).cwiseSqrt();

    for (Eigen::Index j = 0; j < f; ++j) {
        const double scale = std::max(1.0, std::abs(stats.mean(j)));
        if (stats.stddev(j) <= 1e-12 * scale)
            throw DomainError("sensor " + std::to_string(ids[static_cast<std::size_t>(j)]) +
                              " has zero variance over the training pool");
    }
    return stats;
}

namespace {

void check_stats_match(const ReducedTrajectory& traj, const NormalizationStats& stats) {
    if (traj.sensor_ids != stats.sensor_ids)
        throw ConfigError("normalization stats do not cover the trajectory's channels");
    if (traj.values.cols() != stats.mean.size())
        throw ShapeError("normalization stats dimension mismatch");
}

} // namespace

void apply_normalization(ReducedTrajectory& traj, const NormalizationStats& stats) {
    check_stats_match(traj, stats);
    traj.values = (traj.values.rowwise() - stats.mean.transpose()).array().rowwise() /
                  stats.stddev.transpose().array();
}

void invert_normalization(ReducedTrajectory& traj, const NormalizationStats& stats) {
    check_stats_match(traj, stats);
    traj.values = (traj.values.array().rowwise() * stats.stddev.transpose().array()).matrix()
                      .rowwise() +
                  stats.mean.transpose();
}

std::vector<double> exponential_smooth(const std::vector<double>& series, double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("smoothing beta must be in (0,1]");
    std::vector<double> out(series.size());
    if (series.empty()) return out;
    out[0] = series[0];
    for (std::size_t t = 1; t < series.size(); ++t)
        out[t] = beta * series[t] + (1.0 - beta) * out[t - 1];
    return out;
}

void smooth_trajectory(ReducedTrajectory& traj, double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("smoothing beta must be in (0,1]");
    for (Eigen::Index j = 0; j < traj.values.cols(); ++j) {
        for (Eigen::Index t = 1; t < traj.values.rows(); ++t)
            traj.values(t, j) = beta * traj.values(t, j) + (1.0 - beta) * traj.values(t - 1, j);
    }
}

void slide_windows(const ReducedTrajectory& traj, const PreprocessConfig& cfg, WindowSet& ws,
                   int rul_at_last, bool pad_short, std::vector<std::string>* warnings) {
    const int length = static_cast<int>(traj.values.rows());
    const int window = cfg.window_length;
    const int features = static_cast<int>(traj.values.cols());
    const int total_life = length + rul_at_last;

    if (ws.window_length == 0) {
        ws.window_length = window;
        ws.n_features = features;
        ws.sensor_ids = traj.sensor_ids;
    } else if (ws.window_length != window || ws.n_features != features) {
        throw ShapeError("slide_windows: window set shape mismatch");
    }

    if (length < window) {
        if (!pad_short) {
            if (warnings)
                warnings->push_back("unit " + std::to_string(traj.unit_id) + ": length " +
                                    std::to_string(length) + " < window " +
                                    std::to_string(window) + ", no windows produced");
            return;
        }
        Eigen::MatrixXd w(window, features);
        const int pad = window - length;
        for (int r = 0; r < pad; ++r) w.row(r) = traj.values.row(0);
        w.bottomRows(length) = traj.values;
        ws.windows.push_back(std::move(w));
        ws.labels.push_back(cap_rul(total_life, length, cfg.rul_cap));
        ws.provenance.push_back({traj.unit_id, length, true});
        return;
    }

    for (int end = window; end <= length; end += cfg.stride) {
        ws.windows.push_back(traj.values.middleRows(end - window, window));
        ws.labels.push_back(cap_rul(total_life, end, cfg.rul_cap));
        ws.provenance.push_back({traj.unit_id, end, false});
    }
}

void slide_last_window(const ReducedTrajectory& traj, const PreprocessConfig& cfg, WindowSet& ws,
                       int rul_at_last) {
    const int length = static_cast<int>(traj.values.rows());
    if (length < cfg.window_length) {
        slide_windows(traj, cfg, ws, rul_at_last, true, nullptr);
        return;
    }
    const int features = static_cast<int>(traj.values.cols());
    if (ws.window_length == 0) {
        ws.window_length = cfg.window_length;
        ws.n_features = features;
        ws.sensor_ids = traj.sensor_ids;
    } else if (ws.window_length != cfg.window_length || ws.n_features != features) {
        throw ShapeError("slide_last_window: window set shape mismatch");
    }
    ws.windows.push_back(traj.values.bottomRows(cfg.window_length));
    ws.labels.push_back(cap_rul(length + rul_at_last, length, cfg.rul_cap));
    ws.provenance.push_back({traj.unit_id, length, false});
}

PreprocessedData run_preprocess(const DatasetBundle& bundle, const PreprocessConfig& cfg) {
    cfg.validate();
    PreprocessedData out;

    std::vector<ReducedTrajectory> train;
    train.reserve(bundle.train.size());
    for (const auto& traj : bundle.train) train.push_back(select_sensors(traj, cfg));
    std::vector<ReducedTrajectory> test;
    test.reserve(bundle.test.size());
    for (const auto& traj : bundle.test) test.push_back(select_sensors(traj, cfg));

    if (cfg.pooled_normalization) {
        std::vector<ReducedTrajectory> pooled = train;
        pooled.insert(pooled.end(), test.begin(), test.end());
        out.stats = fit_normalization(pooled);
    } else {
        out.stats = fit_normalization(train);
    }

    const double beta = cfg.beta();
    for (auto& traj : train) {
        apply_normalization(traj, out.stats);
        smooth_trajectory(traj, beta);
        slide_windows(traj, cfg, out.train_windows, 0, false, &out.warnings);
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
        auto& traj = test[i];
        const int rul = i < bundle.test_rul.size() ? bundle.test_rul[i] : 0;
        apply_normalization(traj, out.stats);
        smooth_trajectory(traj, beta);
        slide_windows(traj, cfg, out.test_windows, rul, false, &out.warnings);
        slide_last_window(traj, cfg, out.test_last_windows, rul);
    }
    return out;
}

void write_windows_csv(std::ostream& out, const WindowSet& ws) {
    out << "unit_id,end_cycle,padded,label";
    for (int t = 0; t < ws.window_length; ++t)
        for (int j = 0; j < ws.n_features; ++j) out << ",t" << t << "_s" << ws.sensor_ids[static_cast<std::size_t>(j)];
    out << '\n';
    for (std::size_t i = 0; i < ws.size(); ++i) {
        const auto& p = ws.provenance[i];
        out << p.unit_id << ',' << p.end_cycle << ',' << (p.padded ? 1 : 0) << ','
            << fmt_double(ws.labels[i]);
        const auto& w = ws.windows[i];
        for (Eigen::Index t = 0; t < w.rows(); ++t)
            for (Eigen::Index j = 0; j < w.cols(); ++j) out << ',' << fmt_double(w(t, j));
        out << '\n';
    }
}

void write_stats_csv(std::ostream& out, const NormalizationStats& stats) {
    out << "sensor_id,mean,stddev\n";
    for (std::size_t j = 0; j < stats.sensor_ids.size(); ++j)
        out << stats.sensor_ids[j] << ',' << fmt_double(stats.mean(static_cast<Eigen::Index>(j)))
            << ',' << fmt_double(stats.stddev(static_cast<Eigen::Index>(j))) << '\n';
}

} // namespace hrp
