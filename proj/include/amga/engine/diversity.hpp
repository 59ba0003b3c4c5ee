#pragma once

#include <vector>

#include "amga/engine/config.hpp"
#include "amga/numerics/rng.hpp"
#include "amga/numerics/tensor.hpp"

namespace amga::engine {

/// One draw of the random downscale-and-pad transform.
struct DiversityParams {
    bool applied = false;
    double scale = 1.0;
    std::size_t new_height = 0, new_width = 0;
    std::size_t offset_y = 0, offset_x = 0;
};

/// Consumes one uniform for the coin flip and, when applied, three more
/// (scale, offset_y, offset_x).
DiversityParams draw_diversity(const AttackConfig& config, std::size_t height, std::size_t width, Rng& rng);

/// Parameters for an explicit scale factor at the given offsets.
DiversityParams diversity_with_scale(double scale, std::size_t height, std::size_t width, std::size_t offset_y,
                                     std::size_t offset_x);

/// Source index of each output element of an [N,C,H,W] tensor, -1 for zero padding.
std::vector<long long> diversity_index(const Shape& shape, const DiversityParams& p);

/// Apply precomputed parameters (nearest-neighbour downscale, zero pad).
Tensor apply_diversity(const Tensor& x, const DiversityParams& p);

/// Draw and apply in one step.
Tensor input_diversity(const Tensor& x, const AttackConfig& config, Rng& rng);

} // namespace amga::engine
