#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hrp/dataio.hpp"

namespace hrp {

// Pipeline order is fixed: select -> normalize -> smooth -> window.
struct PreprocessConfig {
    std::vector<int> selected_sensors; // 1-based sensor ids; empty means default set
    int rul_cap = 125;
    double smoothing_s = 3.0; // beta = 2 / (1 + s)
    int window_length = 25;
    int stride = 1;
    bool pooled_normalization = false; // fit stats on train+test instead of train only

    double beta() const { return 2.0 / (1.0 + smoothing_s); }
    std::vector<int> sensors() const; // resolved selection
    void validate() const;
};

// All 21 sensors minus the channels that stay flat: {1,5,6,10,16,18,19}.
std::vector<int> default_selected_sensors();

// Window lengths used per sub-dataset; falls back to 25 for unknown names.
int default_window_length(const std::string& dataset);

// Trajectory reduced to the selected sensor columns. Row t is cycle t+1.
struct ReducedTrajectory {
    int unit_id = 0;
    std::vector<int> sensor_ids;
    Eigen::MatrixXd values; // length x n_selected
};

struct NormalizationStats {
    std::vector<int> sensor_ids;
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev; // population convention (divide by n)
};

struct WindowProvenance {
    int unit_id = 0;
    int end_cycle = 0;
    bool padded = false;
};

struct WindowSet {
    std::vector<Eigen::MatrixXd> windows; // each window_length x n_features
    std::vector<double> labels;           // capped RUL at the window's final cycle
    std::vector<WindowProvenance> provenance;
    std::vector<int> sensor_ids;
    int window_length = 0;
    int n_features = 0;

    std::size_t size() const { return windows.size(); }
};

ReducedTrajectory select_sensors(const Trajectory& traj, const PreprocessConfig& cfg);

// min(T - t, cap); throws DomainError when t is outside 1..T.
int cap_rul(int total_life, int cycle, int cap);

NormalizationStats fit_normalization(const std::vector<ReducedTrajectory>& train);
void apply_normalization(ReducedTrajectory& traj, const NormalizationStats& stats);
void invert_normalization(ReducedTrajectory& traj, const NormalizationStats& stats);

// First output equals first input; x~_t = beta x_t + (1-beta) x~_{t-1}.
std::vector<double> exponential_smooth(const std::vector<double>& series, double beta);
void smooth_trajectory(ReducedTrajectory& traj, double beta);

// Appends stride-spaced windows of traj to ws. rul_at_last is the true RUL at the
// trajectory's final record (0 for run-to-failure data). Trajectories shorter than
// the window length contribute nothing unless pad_short is set, in which case one
// window left-padded with the first record is produced and flagged in provenance.
void slide_windows(const ReducedTrajectory& traj, const PreprocessConfig& cfg, WindowSet& ws,
                   int rul_at_last = 0, bool pad_short = false,
                   std::vector<std::string>* warnings = nullptr);

// Appends only the window ending at the trajectory's final record, padding when
// the trajectory is shorter than the window length.
void slide_last_window(const ReducedTrajectory& traj, const PreprocessConfig& cfg, WindowSet& ws,
                       int rul_at_last = 0);

struct PreprocessedData {
    NormalizationStats stats;
    WindowSet train_windows;
    WindowSet test_windows;      // dense, stride-spaced
    WindowSet test_last_windows; // one window per test engine, padded when short
    std::vector<std::string> warnings;
};

PreprocessedData run_preprocess(const DatasetBundle& bundle, const PreprocessConfig& cfg);

void write_windows_csv(std::ostream& out, const WindowSet& ws);
void write_stats_csv(std::ostream& out, const NormalizationStats& stats);

} // namespace hrp
