#include "hrp/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "hrp/errors.hpp"
#include "hrp/rng.hpp"
#include "hrp/util.hpp"

namespace hrp {

namespace {

constexpr int kRecordTokens = 2 + kNumOpSettings + kNumRawSensors; // 26

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    return tokens;
}

int parse_positive_int(const std::string& tok, const char* what, std::size_t line_no) {
    int value = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ParseError(std::string("expected integer ") + what + ", got '" + tok + "'", line_no);
    if (value < 1)
        throw ParseError(std::string(what) + " must be >= 1, got " + tok, line_no);
    return value;
}

double parse_double_tok(const std::string& tok, std::size_t line_no) {
    bool ok = false;
    const double v = parse_double(tok, ok);
    if (!ok) throw ParseError("expected numeric token, got '" + tok + "'", line_no);
    return v;
}

void validate_consecutive(Trajectory& traj) {
    std::sort(traj.records.begin(), traj.records.end(),
              [](const RawRecord& a, const RawRecord& b) { return a.cycle < b.cycle; });
    for (std::size_t i = 0; i < traj.records.size(); ++i) {
        if (traj.records[i].cycle != static_cast<int>(i) + 1)
            throw DomainError("unit " + std::to_string(traj.unit_id) +
                              ": cycles are not consecutive from 1 (found cycle " +
                              std::to_string(traj.records[i].cycle) + " at position " +
                              std::to_string(i + 1) + ")");
    }
}

} // namespace

std::vector<Trajectory> parse_cmapss(std::istream& in) {
    std::vector<Trajectory> trajectories;
    std::unordered_map<int, std::size_t> index_of_unit;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (tokens.size() != kRecordTokens)
            throw ParseError("expected " + std::to_string(kRecordTokens) + " columns, got " +
                                 std::to_string(tokens.size()),
                             line_no);

        RawRecord rec;
        rec.unit_id = parse_positive_int(tokens[0], "unit id", line_no);
        rec.cycle = parse_positive_int(tokens[1], "cycle", line_no);
        for (int j = 0; j < kNumOpSettings; ++j)
            rec.op_settings[static_cast<std::size_t>(j)] = parse_double_tok(tokens[2 + j], line_no);
        rec.sensors.resize(kNumRawSensors);
        for (int j = 0; j < kNumRawSensors; ++j)
            rec.sensors[static_cast<std::size_t>(j)] =
                parse_double_tok(tokens[2 + kNumOpSettings + j], line_no);

        auto it = index_of_unit.find(rec.unit_id);
        if (it == index_of_unit.end()) {
            index_of_unit.emplace(rec.unit_id, trajectories.size());
            trajectories.push_back(Trajectory{rec.unit_id, {}});
            it = index_of_unit.find(rec.unit_id);
        }
        trajectories[it->second].records.push_back(std::move(rec));
    }

    for (auto& traj : trajectories) validate_consecutive(traj);
    return trajectories;
}

void format_cmapss(const std::vector<Trajectory>& trajectories, std::ostream& out) {
    for (const auto& traj : trajectories) {
        for (const auto& rec : traj.records) {
            out << rec.unit_id << ' ' << rec.cycle;
            for (const double s : rec.op_settings) out << ' ' << fmt_double(s);
            for (const double s : rec.sensors) out << ' ' << fmt_double(s);
            out << '\n';
        }
    }
}

std::vector<int> parse_rul_labels(std::istream& in) {
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (tokens.size() != 1)
            throw ParseError("expected a single integer per line", line_no);
        int value = 0;
        const std::string& tok = tokens[0];
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
            throw ParseError("expected integer RUL, got '" + tok + "'", line_no);
        if (value < 0) throw ParseError("RUL must be non-negative, got " + tok, line_no);
        labels.push_back(value);
    }
    return labels;
}

void format_rul_labels(const std::vector<int>& labels, std::ostream& out) {
    for (const int v : labels) out << v << '\n';
}

namespace {

// Flat channels in the canonical 21-sensor layout; mirrored by the generator so
// the default sensor selection applies to synthetic data too.
bool canonical_flat_sensor(int sensor_id) {
    switch (sensor_id) {
        case 1:
        case 5:
        case 6:
        case 10:
        case 16:
        case 18:
        case 19:
            return true;
        default:
            return false;
    }
}

double drift_value(const SensorProfile& s, const EngineProfile& e, int cycle) {
    if (s.constant || cycle <= e.onset_cycle) return s.baseline;
    const double p = static_cast<double>(cycle - e.onset_cycle) /
                     static_cast<double>(e.total_life - e.onset_cycle);
    const double shape = s.exponential ? (std::exp(3.0 * p) - 1.0) / (std::exp(3.0) - 1.0) : p;
    return s.baseline + s.amplitude * shape;
}

EngineProfile draw_engine(Rng& rng, const SyntheticSpec& spec) {
    EngineProfile e;
    e.total_life = rng.uniform_int(spec.life_range.first, spec.life_range.second);
    const int onset = static_cast<int>(std::lround(spec.degradation_onset_fraction * e.total_life));
    e.onset_cycle = std::clamp(onset, 1, e.total_life - 1);
    return e;
}

Trajectory realize_trajectory(int unit_id, const EngineProfile& engine,
                              const std::vector<SensorProfile>& sensors, double noise_scale,
                              std::uint64_t seed, int keep_cycles) {
    Rng rng(seed);
    Trajectory traj;
    traj.unit_id = unit_id;
    traj.records.reserve(static_cast<std::size_t>(keep_cycles));
    for (int t = 1; t <= engine.total_life; ++t) {
        RawRecord rec;
        rec.unit_id = unit_id;
        rec.cycle = t;
        rec.op_settings = {35.0, 0.84, 100.0}; // single operating condition
        rec.sensors.resize(sensors.size());
        for (std::size_t j = 0; j < sensors.size(); ++j) {
            double v = drift_value(sensors[j], engine, t);
            if (!sensors[j].constant && noise_scale > 0.0) v += noise_scale * rng.normal();
            rec.sensors[j] = v;
        }
        if (t <= keep_cycles) traj.records.push_back(std::move(rec));
    }
    return traj;
}

void validate_spec(const SyntheticSpec& spec) {
    if (spec.n_engines < 1) throw ConfigError("synthetic: n_engines must be >= 1");
    if (spec.n_sensors < 1 || spec.n_sensors > kNumRawSensors)
        throw ConfigError("synthetic: n_sensors must be in 1..21");
    if (spec.life_range.first < 2 || spec.life_range.second < spec.life_range.first)
        throw ConfigError("synthetic: invalid life_range");
    if (!(spec.degradation_onset_fraction > 0.0 && spec.degradation_onset_fraction < 1.0))
        throw ConfigError("synthetic: degradation_onset_fraction must be in (0,1)");
    if (spec.noise_scale < 0.0) throw ConfigError("synthetic: noise_scale must be >= 0");
    if (spec.driver_sensor &&
        (*spec.driver_sensor < 1 || *spec.driver_sensor > spec.n_sensors ||
         canonical_flat_sensor(*spec.driver_sensor)))
        throw ConfigError("synthetic: driver_sensor must name a non-constant sensor");
}

} // namespace

SyntheticLayout synthetic_layout(const SyntheticSpec& spec) {
    validate_spec(spec);
    SyntheticLayout layout;

    Rng sensor_rng(derive_seed(spec.seed, "synthetic/sensors"));
    layout.sensors.resize(static_cast<std::size_t>(spec.n_sensors));
    for (int j = 1; j <= spec.n_sensors; ++j) {
        SensorProfile& s = layout.sensors[static_cast<std::size_t>(j - 1)];
        s.baseline = sensor_rng.uniform(-5.0, 5.0);
        const double amp = sensor_rng.uniform(1.0, 3.0);
        const double sign = sensor_rng.uniform() < 0.5 ? -1.0 : 1.0;
        s.exponential = sensor_rng.uniform() < 0.5;
        s.constant = canonical_flat_sensor(j);
        s.amplitude = s.constant ? 0.0 : sign * amp;
        if (spec.driver_sensor && !s.constant && j != *spec.driver_sensor) s.amplitude = 0.0;
    }

    Rng life_rng(derive_seed(spec.seed, "synthetic/lives"));
    layout.train_engines.reserve(static_cast<std::size_t>(spec.n_engines));
    for (int i = 0; i < spec.n_engines; ++i) layout.train_engines.push_back(draw_engine(life_rng, spec));
    layout.test_engines.reserve(static_cast<std::size_t>(spec.n_engines));
    for (int i = 0; i < spec.n_engines; ++i) {
        const EngineProfile e = draw_engine(life_rng, spec);
        const double keep_frac = life_rng.uniform(0.6, 0.95);
        const int keep = std::max(1, static_cast<int>(std::floor(keep_frac * e.total_life)));
        layout.test_engines.push_back(e);
        layout.test_observed.push_back(keep);
    }
    return layout;
}

DatasetBundle generate_synthetic(const SyntheticSpec& spec) {
    const SyntheticLayout layout = synthetic_layout(spec);
    DatasetBundle bundle;

    for (std::size_t i = 0; i < layout.train_engines.size(); ++i) {
        const auto& e = layout.train_engines[i];
        const std::uint64_t s = derive_seed(spec.seed, "synthetic/train/" + std::to_string(i));
        bundle.train.push_back(realize_trajectory(static_cast<int>(i) + 1, e, layout.sensors,
                                                  spec.noise_scale, s, e.total_life));
    }
    for (std::size_t i = 0; i < layout.test_engines.size(); ++i) {
        const auto& e = layout.test_engines[i];
        const int keep = layout.test_observed[i];
        const std::uint64_t s = derive_seed(spec.seed, "synthetic/test/" + std::to_string(i));
        bundle.test.push_back(realize_trajectory(static_cast<int>(i) + 1, e, layout.sensors,
                                                 spec.noise_scale, s, keep));
        bundle.test_rul.push_back(e.total_life - keep);
    }
    return bundle;
}

std::vector<Trajectory> load_cmapss_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset file: " + path);
    return parse_cmapss(in);
}

std::vector<int> load_rul_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open RUL file: " + path);
    return parse_rul_labels(in);
}

} // namespace hrp
