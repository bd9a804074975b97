#include "hrp/importance.hpp"

#include <numeric>

#include "hrp/errors.hpp"
#include "hrp/util.hpp"

namespace hrp {

std::string ImportanceReport::to_csv() const {
    std::string out = "sensor_id,raw_lambda,normalized_share,rank\n";
    for (const auto& e : entries)
        out += std::to_string(e.sensor_id) + "," + fmt_double(e.raw_lambda) + "," +
               fmt_double(e.normalized_share) + "," + std::to_string(e.rank) + "\n";
    return out;
}

std::string ImportanceReport::to_plot_csv() const {
    std::string out = "label,share\n";
    for (const auto& e : entries)
        out += "sensor_" + std::to_string(e.sensor_id) + "," + fmt_double(e.normalized_share) +
               "\n";
    return out;
}

namespace {

std::size_t channel_of(const WindowSet& ws, int sensor_id) {
    for (std::size_t j = 0; j < ws.sensor_ids.size(); ++j)
        if (ws.sensor_ids[j] == sensor_id) return j;
    throw DomainError("sensor " + std::to_string(sensor_id) +
                      " is not among the window set's channels");
}

} // namespace

WindowSet apply_channel_permutation(const WindowSet& ws, int sensor_id,
                                    const std::vector<std::size_t>& permutation) {
    if (permutation.size() != ws.size())
        throw DomainError("apply_channel_permutation: permutation length mismatch");
    const Eigen::Index col = static_cast<Eigen::Index>(channel_of(ws, sensor_id));

    WindowSet out = ws;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        if (permutation[i] >= ws.size())
            throw DomainError("apply_channel_permutation: index out of range");
        out.windows[i].col(col) = ws.windows[permutation[i]].col(col);
    }
    return out;
}

std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(perm);
    return perm;
}

WindowSet permute_feature(const WindowSet& ws, int sensor_id, std::uint64_t seed) {
    return apply_channel_permutation(ws, sensor_id, random_permutation(ws.size(), seed));
}

std::vector<double> pipeline_predictions(const ExtractorModel& extractor, const GPModel& gp,
                                         const WindowSet& ws) {
    const Eigen::MatrixXd hidden = extract_batch(extractor, ws);
    if (hidden.cols() != gp.input_dim())
        throw ShapeError("pipeline_predictions: hidden size does not match the GP input size");
    std::vector<double> preds(ws.size());
    for (std::size_t i = 0; i < ws.size(); ++i)
        preds[i] = predict_point(gp, hidden.row(static_cast<Eigen::Index>(i)).transpose());
    return preds;
}

ImportanceReport feature_importance(const ExtractorModel& extractor, const GPModel& gp,
                                    const WindowSet& eval, int repeats, std::uint64_t seed) {
    return feature_importance_with(
        [&](const WindowSet& ws) { return pipeline_predictions(extractor, gp, ws); }, eval,
        repeats, seed);
}

} // namespace hrp
