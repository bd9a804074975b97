#include "hrp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <nlohmann/json.hpp>

#include "hrp/errors.hpp"
#include "hrp/util.hpp"

namespace hrp {

double rmse(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size()) throw DomainError("rmse: length mismatch");
    if (pred.empty()) throw DomainError("rmse: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(pred.size()));
}

double naw(const std::vector<Interval>& intervals, std::span<const double> truth) {
    if (intervals.size() != truth.size()) throw DomainError("naw: length mismatch");
    if (intervals.empty()) throw DomainError("naw: empty input");
    const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) throw DomainError("naw: target range is zero");
    double width_sum = 0.0;
    for (const auto& iv : intervals) width_sum += iv.upper - iv.lower;
    return width_sum / (range * static_cast<double>(intervals.size()));
}

double coverage(const std::vector<Interval>& intervals, std::span<const double> truth) {
    if (intervals.size() != truth.size()) throw DomainError("coverage: length mismatch");
    if (intervals.empty()) throw DomainError("coverage: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < intervals.size(); ++i)
        if (truth[i] >= intervals[i].lower && truth[i] <= intervals[i].upper) ++hits;
    return static_cast<double>(hits) / static_cast<double>(intervals.size());
}

double cwc(double naw_value, double coverage_value, double alpha) {
    if (!(alpha > 0.0)) throw DomainError("cwc: alpha must be > 0");
    return naw_value * std::exp((1.0 - coverage_value) / alpha);
}

std::string MetricsReport::to_json() const {
    nlohmann::json j;
    j["rmse"] = rmse;
    j["naw"] = naw;
    j["coverage"] = coverage;
    j["cwc"] = cwc;
    j["n"] = n;
    j["alpha"] = alpha;
    j["target_range"] = target_range;
    j["mode"] = mode;
    j["truth_capped"] = truth_capped;
    return j.dump(2);
}

std::string MetricsReport::csv_header() {
    return "rmse,naw,coverage,cwc,n,alpha,target_range,mode,truth_capped";
}

std::string MetricsReport::to_csv_line() const {
    return fmt_double(rmse) + "," + fmt_double(naw) + "," + fmt_double(coverage) + "," +
           fmt_double(cwc) + "," + std::to_string(n) + "," + fmt_double(alpha) + "," +
           fmt_double(target_range) + "," + mode + "," + (truth_capped ? "1" : "0");
}

MetricsReport evaluate_predictions(const std::vector<Interval>& intervals,
                                   std::span<const double> truth, double alpha,
                                   const std::string& mode, bool truth_capped) {
    if (intervals.size() != truth.size())
        throw DomainError("evaluate_predictions: row count mismatch");
    MetricsReport report;
    std::vector<double> points(intervals.size());
    for (std::size_t i = 0; i < intervals.size(); ++i) points[i] = intervals[i].point;
    report.rmse = rmse(points, truth);
    report.naw = naw(intervals, truth);
    report.coverage = coverage(intervals, truth);
    report.cwc = cwc(report.naw, report.coverage, alpha);
    report.n = intervals.size();
    report.alpha = alpha;
    const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
    report.target_range = *hi - *lo;
    report.mode = mode;
    report.truth_capped = truth_capped;
    return report;
}

double KDEstimate::density(double x) const {
    const double norm = 1.0 / (static_cast<double>(samples.size()) * bandwidth *
                               std::sqrt(2.0 * std::numbers::pi));
    double sum = 0.0;
    for (const double s : samples) {
        const double u = (x - s) / bandwidth;
        sum += std::exp(-0.5 * u * u);
    }
    return norm * sum;
}

std::vector<std::pair<double, double>> KDEstimate::grid(std::size_t points,
                                                        double span_bandwidths) const {
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it - span_bandwidths * bandwidth;
    const double hi = *hi_it + span_bandwidths * bandwidth;
    std::vector<std::pair<double, double>> out;
    out.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double x =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        out.emplace_back(x, density(x));
    }
    return out;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
    // linear interpolation between order statistics
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

} // namespace

double silverman_bandwidth(std::span<const double> samples) {
    if (samples.size() < 2) throw DomainError("silverman_bandwidth: need at least 2 samples");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (const double s : samples) mean += s;
    mean /= n;
    double ss = 0.0;
    for (const double s : samples) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / (n - 1.0));

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);

    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    const double bw = 0.9 * spread * std::pow(n, -0.2);
    if (!(bw > 0.0)) throw DomainError("silverman_bandwidth: samples have no spread");
    return bw;
}

KDEstimate kde(std::span<const double> samples, std::optional<double> bandwidth) {
    if (samples.empty()) throw DomainError("kde: empty sample set");
    KDEstimate est;
    est.samples.assign(samples.begin(), samples.end());
    if (bandwidth) {
        if (!(*bandwidth > 0.0)) throw DomainError("kde: bandwidth must be > 0");
        est.bandwidth = *bandwidth;
    } else {
        est.bandwidth = silverman_bandwidth(samples);
    }
    return est;
}

void write_kde_csv(std::ostream& out, const KDEstimate& estimate, std::size_t points) {
    out << "x,density\n";
    for (const auto& [x, d] : estimate.grid(points))
        out << fmt_double(x) << ',' << fmt_double(d) << '\n';
}

} // namespace hrp
