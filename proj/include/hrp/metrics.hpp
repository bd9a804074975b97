#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hrp/gpr.hpp"

namespace hrp {

double rmse(std::span<const double> pred, std::span<const double> truth);

// Mean interval width divided by the range of the true targets.
double naw(const std::vector<Interval>& intervals, std::span<const double> truth);

// Fraction of truths inside the closed interval [lower, upper].
double coverage(const std::vector<Interval>& intervals, std::span<const double> truth);

// naw * exp((1 - coverage) / alpha); penalizes under-coverage exponentially.
double cwc(double naw_value, double coverage_value, double alpha);

struct MetricsReport {
    double rmse = 0.0;
    double naw = 0.0;
    double coverage = 0.0;
    double cwc = 0.0;
    std::size_t n = 0;
    double alpha = 0.05;
    double target_range = 0.0;
    std::string mode = "per-engine"; // scoring granularity, always recorded
    bool truth_capped = false;

    std::string to_json() const;
    static std::string csv_header();
    std::string to_csv_line() const;
};

MetricsReport evaluate_predictions(const std::vector<Interval>& intervals,
                                   std::span<const double> truth, double alpha,
                                   const std::string& mode, bool truth_capped = false);

// Gaussian-kernel density estimate over a sample set.
struct KDEstimate {
    std::vector<double> samples;
    double bandwidth = 1.0;

    double density(double x) const;
    // (grid point, density) pairs spanning samples +/- span_bandwidths * bandwidth.
    std::vector<std::pair<double, double>> grid(std::size_t points,
                                                double span_bandwidths = 4.0) const;
};

// 0.9 min(sd, IQR/1.34) n^(-1/5); sd is the sample standard deviation.
double silverman_bandwidth(std::span<const double> samples);

KDEstimate kde(std::span<const double> samples, std::optional<double> bandwidth = std::nullopt);

void write_kde_csv(std::ostream& out, const KDEstimate& estimate, std::size_t points);

} // namespace hrp
