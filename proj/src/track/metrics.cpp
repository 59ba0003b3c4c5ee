#include "amga/track/metrics.hpp"

#include "amga/numerics/errors.hpp"

namespace amga::track {

TrackRun TrackRun::from_boxes(std::vector<Box> predicted, std::vector<Box> ground_truth)
{
    if (predicted.size() != ground_truth.size()) {
        throw DimensionError("track run: " + std::to_string(predicted.size()) + " predictions vs " +
                             std::to_string(ground_truth.size()) + " ground-truth boxes");
    }
    TrackRun r;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        r.iou.push_back(track::iou(predicted[i], ground_truth[i]));
        r.center_error.push_back(track::center_error(predicted[i], ground_truth[i]));
    }
    r.low_confidence.assign(predicted.size(), false);
    r.predicted = std::move(predicted);
    r.ground_truth = std::move(ground_truth);
    return r;
}

void to_json(nlohmann::json& j, const TrackMetrics& m)
{
    j = nlohmann::json::object();
    for (const auto& name : metric_names()) j[name] = metric_value(m, name);
}

const std::vector<std::string>& metric_names()
{
    static const std::vector<std::string> names{"precision_at_20", "norm_precision_auc", "success_auc",
                                                "ao",              "sr_050",             "sr_075"};
    return names;
}

double metric_value(const TrackMetrics& m, const std::string& name)
{
    if (name == "precision_at_20") return m.precision_at_20;
    if (name == "norm_precision_auc") return m.norm_precision_auc;
    if (name == "success_auc") return m.success_auc;
    if (name == "ao") return m.ao;
    if (name == "sr_050") return m.sr_050;
    if (name == "sr_075") return m.sr_075;
    throw ConfigError("unknown metric '" + name + "'");
}

std::vector<double> success_thresholds()
{
    std::vector<double> t;
    for (int i = 0; i <= 20; ++i) t.push_back(i / 20.0);
    return t;
}

std::vector<double> success_curve(std::span<const double> iou)
{
    std::vector<double> curve;
    for (double th : success_thresholds()) {
        std::size_t hit = 0;
        for (double v : iou) hit += v >= th;
        curve.push_back(iou.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(iou.size()));
    }
    return curve;
}

TrackMetrics compute_metrics(const TrackRun& run)
{
    const std::size_t n = run.iou.size();
    if (n == 0) throw ContractError("compute_metrics: empty run");
    if (run.center_error.size() != n || run.ground_truth.size() != n) {
        throw DimensionError("compute_metrics: inconsistent run lengths");
    }
    const double N = static_cast<double>(n);
    TrackMetrics m;
    double sum_iou = 0.0;
    std::size_t p20 = 0, s50 = 0, s75 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sum_iou += run.iou[i];
        p20 += run.center_error[i] <= 20.0;
        s50 += run.iou[i] > 0.5;
        s75 += run.iou[i] > 0.75;
    }
    m.ao = sum_iou / N;
    m.precision_at_20 = static_cast<double>(p20) / N;
    m.sr_050 = static_cast<double>(s50) / N;
    m.sr_075 = static_cast<double>(s75) / N;

    const auto curve = success_curve(run.iou);
    double total = 0.0;
    for (double v : curve) total += v;
    m.success_auc = total / static_cast<double>(curve.size());

    double np_total = 0.0;
    std::size_t thresholds = 0;
    for (int k = 0; k <= 20; ++k, ++thresholds) {
        const double th = 0.025 * k;
        std::size_t hit = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double diag = run.ground_truth[i].diagonal();
            const double e = diag > 0.0 ? run.center_error[i] / diag : run.center_error[i];
            hit += e <= th;
        }
        np_total += static_cast<double>(hit) / N;
    }
    m.norm_precision_auc = np_total / static_cast<double>(thresholds);
    return m;
}

} // namespace amga::track
