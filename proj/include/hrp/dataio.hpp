#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hrp {

inline constexpr int kNumOpSettings = 3;
inline constexpr int kNumRawSensors = 21;

// One recorded cycle: unit id, cycle counter, three operating settings, sensor readings.
struct RawRecord {
    int unit_id = 0;
    int cycle = 0;
    std::array<double, kNumOpSettings> op_settings{};
    std::vector<double> sensors; // 21 entries in canonical files
};

// One engine's time series, cycles consecutive from 1.
struct Trajectory {
    int unit_id = 0;
    std::vector<RawRecord> records;

    int length() const { return static_cast<int>(records.size()); }
};

struct DatasetBundle {
    std::vector<Trajectory> train; // run to failure
    std::vector<Trajectory> test;  // truncated before failure
    std::vector<int> test_rul;     // true RUL at the last observed cycle, one per test trajectory
};

// Parameters of the synthetic run-to-failure generator. The bundle is a pure
// function of this struct; equal specs produce bitwise-identical bundles.
struct SyntheticSpec {
    int n_engines = 8;
    int n_sensors = kNumRawSensors;
    std::pair<int, int> life_range{150, 220};
    double degradation_onset_fraction = 0.4;
    double noise_scale = 0.05;
    std::uint64_t seed = 0;
    // When set (1-based), only this sensor carries the degradation trend; all
    // other non-constant sensors become pure noise. Used to build datasets with
    // a known single driving channel.
    std::optional<int> driver_sensor;
};

// Deterministic per-sensor drift profile drawn from the spec seed.
// A sensor's noise-free value at cycle t of an engine with total life T and
// onset cycle t0 is:
//   baseline                                      for t <= t0
//   baseline + amplitude * p                      linear mode, p = (t-t0)/(T-t0)
//   baseline + amplitude * (e^(3p)-1)/(e^3-1)     exponential mode
struct SensorProfile {
    double baseline = 0.0;
    double amplitude = 0.0; // signed; 0 for flat channels
    bool exponential = false;
    bool constant = false; // exactly flat, no noise either
};

struct EngineProfile {
    int total_life = 0;
    int onset_cycle = 0;
};

struct SyntheticLayout {
    std::vector<SensorProfile> sensors;
    std::vector<EngineProfile> train_engines;
    std::vector<EngineProfile> test_engines;
    std::vector<int> test_observed; // kept cycles per test engine
};

std::vector<Trajectory> parse_cmapss(std::istream& in);
void format_cmapss(const std::vector<Trajectory>& trajectories, std::ostream& out);

std::vector<int> parse_rul_labels(std::istream& in);
void format_rul_labels(const std::vector<int>& labels, std::ostream& out);

SyntheticLayout synthetic_layout(const SyntheticSpec& spec);
DatasetBundle generate_synthetic(const SyntheticSpec& spec);

std::vector<Trajectory> load_cmapss_file(const std::string& path);
std::vector<int> load_rul_file(const std::string& path);

} // namespace hrp
