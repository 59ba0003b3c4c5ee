#include "amga/engine/diversity.hpp"

#include <algorithm>
#include <cmath>

#include "amga/numerics/errors.hpp"

namespace amga::engine {

DiversityParams diversity_with_scale(double scale, std::size_t height, std::size_t width, std::size_t offset_y,
                                     std::size_t offset_x)
{
    DiversityParams p;
    p.scale = scale;
    p.new_height = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(static_cast<double>(height) * scale)), 1, height);
    p.new_width = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(static_cast<double>(width) * scale)), 1, width);
    p.offset_y = std::min(offset_y, height - p.new_height);
    p.offset_x = std::min(offset_x, width - p.new_width);
    p.applied = p.new_height != height || p.new_width != width;
    return p;
}

DiversityParams draw_diversity(const AttackConfig& config, std::size_t height, std::size_t width, Rng& rng)
{
    if (!(rng.uniform() < config.diversity_prob)) return DiversityParams{false, 1.0, height, width, 0, 0};
    const double scale = rng.uniform(config.diversity_scale_min, 1.0);
    auto p = diversity_with_scale(scale, height, width, 0, 0);
    p.offset_y = static_cast<std::size_t>(rng.below(height - p.new_height + 1));
    p.offset_x = static_cast<std::size_t>(rng.below(width - p.new_width + 1));
    return p;
}

std::vector<long long> diversity_index(const Shape& shape, const DiversityParams& p)
{
    if (shape.size() != 4) throw DimensionError("input_diversity: expected [N,C,H,W], got " + shape_str(shape));
    const std::size_t planes = shape[0] * shape[1], H = shape[2], W = shape[3];
    std::vector<long long> idx(planes * H * W, -1);
    for (std::size_t pl = 0; pl < planes; ++pl) {
        for (std::size_t y = 0; y < H; ++y) {
            for (std::size_t x = 0; x < W; ++x) {
                const std::size_t o = (pl * H + y) * W + x;
                if (!p.applied) {
                    idx[o] = static_cast<long long>(o);
                    continue;
                }
                if (y < p.offset_y || y >= p.offset_y + p.new_height) continue;
                if (x < p.offset_x || x >= p.offset_x + p.new_width) continue;
                const std::size_t sy = (y - p.offset_y) * H / p.new_height;
                const std::size_t sx = (x - p.offset_x) * W / p.new_width;
                idx[o] = static_cast<long long>((pl * H + sy) * W + sx);
            }
        }
    }
    return idx;
}

Tensor apply_diversity(const Tensor& x, const DiversityParams& p)
{
    if (!p.applied) return x;
    const auto idx = diversity_index(x.shape(), p);
    Tensor out(x.shape());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= 0) out[i] = x[static_cast<std::size_t>(idx[i])];
    }
    return out;
}

Tensor input_diversity(const Tensor& x, const AttackConfig& config, Rng& rng)
{
    if (x.rank() != 4) throw DimensionError("input_diversity: expected [N,C,H,W], got " + shape_str(x.shape()));
    return apply_diversity(x, draw_diversity(config, x.dim(2), x.dim(3), rng));
}

} // namespace amga::engine
