#pragma once

#include <span>
#include <vector>

#include "json.hpp"

#include "amga/track/box.hpp"

namespace amga::track {

struct TrackRun {
    std::vector<Box> predicted;
    std::vector<Box> ground_truth;
    std::vector<double> iou;
    std::vector<double> center_error;
    std::vector<bool> low_confidence;

    /// Fill iou and center_error from the two box lists.
    static TrackRun from_boxes(std::vector<Box> predicted, std::vector<Box> ground_truth);
};

struct TrackMetrics {
    double precision_at_20 = 0.0;
    double norm_precision_auc = 0.0;
    double success_auc = 0.0;
    double ao = 0.0;
    double sr_050 = 0.0;
    double sr_075 = 0.0;
};

void to_json(nlohmann::json& j, const TrackMetrics& m);

/// Metric names in report order, and lookup by name.
const std::vector<std::string>& metric_names();
double metric_value(const TrackMetrics& m, const std::string& name);

/// Success thresholds 0, 0.05, ..., 1.0 (21 values).
std::vector<double> success_thresholds();

/// Fraction of frames with IoU >= threshold, per threshold.
std::vector<double> success_curve(std::span<const double> iou);

/// Throws ContractError on an empty run.
TrackMetrics compute_metrics(const TrackRun& run);

} // namespace amga::track
