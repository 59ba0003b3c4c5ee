#pragma once

#include <vector>

#include "amga/track/box.hpp"
#include "amga/zoo/model.hpp"

namespace amga::track {

inline constexpr double kSearchFactor = 2.5;
inline constexpr std::size_t kGridStride = 4;
inline constexpr double kLowConfidence = 0.2;
inline constexpr double kScales[3] = {0.95, 1.0, 1.05};

/// Bilinear resample of an R x R patch (edge clamp) from a [3,H,W] frame.
/// Output pixel u maps to frame x = cx + (u + 0.5 - R/2) * kx, sampled at pixel centres.
Tensor sample_patch(const Tensor& frame, double cx, double cy, double kx, double ky, std::size_t size);

/// Box crop resized to 32x32, shape [1,3,32,32].
Tensor crop_box(const Tensor& frame, const Box& box);

/// Template-matching tracker on a classifier's convolutional features.
class Tracker {
public:
    /// Stores the valid-padding feature map of the box crop. Throws ConfigError
    /// for a degenerate box, a box outside the frame or a model whose feature
    /// stride does not divide the search grid stride.
    Tracker(const zoo::ModelRecord& feature_model, const Tensor& frame0, const Box& box0);

    /// Search 3 scales x stride-4 grid within 2.5x the previous box and move there.
    Box step(const Tensor& frame);

    const Box& box() const { return box_; }
    double last_score() const { return last_score_; }
    bool low_confidence() const { return last_score_ < kLowConfidence; }
    const Tensor& template_features() const { return template_; }

private:
    const zoo::ModelRecord* model_;
    Tensor template_;
    double template_norm_ = 0.0;
    Box box_;
    double last_score_ = 1.0;
};

} // namespace amga::track
