#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "hrp/gpr.hpp"
#include "hrp/metrics.hpp"
#include "hrp/preprocess.hpp"
#include "hrp/rng.hpp"
#include "hrp/temporal.hpp"

namespace hrp {

struct ImportanceEntry {
    int sensor_id = 0;
    double raw_lambda = 0.0;       // increase in RMSE after permutation, cycles
    double normalized_share = 0.0; // non-negative, sums to 1 when any raw score is positive
    int rank = 0;                  // 1 = most important
};

struct ImportanceReport {
    std::vector<ImportanceEntry> entries; // sorted by rank
    double baseline_rmse = 0.0;
    int repeats = 0;
    std::uint64_t seed = 0;

    std::string to_csv() const;
    std::string to_plot_csv() const; // share per sensor in rank order, bar-chart ready
};

// Exchanges the chosen sensor's whole per-window slice between windows under the
// given permutation of window indices; other channels and labels are untouched.
WindowSet apply_channel_permutation(const WindowSet& ws, int sensor_id,
                                    const std::vector<std::size_t>& permutation);

WindowSet permute_feature(const WindowSet& ws, int sensor_id, std::uint64_t seed);

std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed);

// Model-agnostic core: predict must map a WindowSet to one prediction per window.
// lambda_j = mean over repeats of (RMSE after permuting sensor j) - baseline RMSE.
template <class Predictor>
ImportanceReport feature_importance_with(Predictor&& predict, const WindowSet& eval, int repeats,
                                         std::uint64_t seed) {
    if (eval.size() == 0) throw DomainError("feature_importance: empty evaluation set");
    if (repeats < 1) throw DomainError("feature_importance: repeats must be >= 1");

    const std::vector<double> baseline = predict(eval);
    ImportanceReport report;
    report.repeats = repeats;
    report.seed = seed;
    report.baseline_rmse = rmse(baseline, eval.labels);

    for (const int sensor_id : eval.sensor_ids) {
        double lambda_sum = 0.0;
        for (int rep = 0; rep < repeats; ++rep) {
            const std::uint64_t sub = derive_seed(
                seed, "importance/" + std::to_string(sensor_id) + "/" + std::to_string(rep));
            const WindowSet permuted = permute_feature(eval, sensor_id, sub);
            lambda_sum += rmse(predict(permuted), eval.labels) - report.baseline_rmse;
        }
        ImportanceEntry entry;
        entry.sensor_id = sensor_id;
        entry.raw_lambda = lambda_sum / static_cast<double>(repeats);
        report.entries.push_back(entry);
    }

    double positive_sum = 0.0;
    for (const auto& e : report.entries) positive_sum += std::max(e.raw_lambda, 0.0);
    for (auto& e : report.entries)
        e.normalized_share = positive_sum > 0.0 ? std::max(e.raw_lambda, 0.0) / positive_sum : 0.0;

    std::sort(report.entries.begin(), report.entries.end(),
              [](const ImportanceEntry& a, const ImportanceEntry& b) {
                  if (a.raw_lambda != b.raw_lambda) return a.raw_lambda > b.raw_lambda;
                  return a.sensor_id < b.sensor_id;
              });
    for (std::size_t i = 0; i < report.entries.size(); ++i)
        report.entries[i].rank = static_cast<int>(i) + 1;
    return report;
}

// End-to-end pipeline importance: permuted windows go back through the extractor
// and the GP posterior mean.
ImportanceReport feature_importance(const ExtractorModel& extractor, const GPModel& gp,
                                    const WindowSet& eval, int repeats, std::uint64_t seed);

std::vector<double> pipeline_predictions(const ExtractorModel& extractor, const GPModel& gp,
                                         const WindowSet& ws);

} // namespace hrp
