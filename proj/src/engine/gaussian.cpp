#include "amga/engine/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "amga/numerics/errors.hpp"

namespace amga::engine {

double gaussian_density(double u, double v, double sigma)
{
    const double s2 = sigma * sigma;
    return std::exp(-(u * u + v * v) / (2.0 * s2)) / (2.0 * std::numbers::pi * s2);
}

GaussianKernel build_gaussian_kernel(double sigma)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("gaussian kernel: sigma must be positive");
    GaussianKernel k;
    k.sigma = sigma;
    k.radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
    const long r = static_cast<long>(k.radius);
    k.values.reserve(k.size() * k.size());
    double total = 0.0;
    for (long dy = -r; dy <= r; ++dy) {
        for (long dx = -r; dx <= r; ++dx) {
            k.values.push_back(gaussian_density(static_cast<double>(dx), static_cast<double>(dy), sigma));
            total += k.values.back();
        }
    }
    for (auto& v : k.values) v /= total;
    return k;
}

std::size_t reflect_index(long i, std::size_t n)
{
    if (n == 1) return 0;
    const long period = 2 * static_cast<long>(n - 1);
    long m = i % period;
    if (m < 0) m += period;
    if (m >= static_cast<long>(n)) m = period - m;
    return static_cast<std::size_t>(m);
}

Tensor gaussian_filter(const Tensor& delta, const GaussianKernel& kernel)
{
    if (delta.rank() != 3 && delta.rank() != 4) {
        throw DimensionError("smooth_perturbation: expected [C,H,W] or [N,C,H,W], got " + shape_str(delta.shape()));
    }
    const std::size_t H = delta.dim(delta.rank() - 2), W = delta.dim(delta.rank() - 1);
    const std::size_t planes = delta.numel() / (H * W);
    const long r = static_cast<long>(kernel.radius);
    Tensor out(delta.shape());
    for (std::size_t p = 0; p < planes; ++p) {
        const float* src = delta.data().data() + p * H * W;
        float* dst = out.data().data() + p * H * W;
        for (std::size_t y = 0; y < H; ++y) {
            for (std::size_t x = 0; x < W; ++x) {
                double acc = 0.0;
                for (long dy = -r; dy <= r; ++dy) {
                    const std::size_t sy = reflect_index(static_cast<long>(y) + dy, H);
                    for (long dx = -r; dx <= r; ++dx) {
                        const std::size_t sx = reflect_index(static_cast<long>(x) + dx, W);
                        acc += kernel.at(dy, dx) * src[sy * W + sx];
                    }
                }
                dst[y * W + x] = static_cast<float>(acc);
            }
        }
    }
    return out;
}

Tensor smooth_perturbation(const Tensor& delta, const GaussianKernel& kernel, double epsilon)
{
    Tensor out = gaussian_filter(delta, kernel);
    project_budget(out, epsilon);
    return out;
}

float budget_bound(double epsilon)
{
    float e = static_cast<float>(epsilon);
    if (static_cast<double>(e) > epsilon) e = std::nextafter(e, 0.0f);
    return e;
}

void project_budget(Tensor& delta, double epsilon)
{
    const float e = budget_bound(epsilon);
    for (auto& v : delta.data()) v = std::clamp(v, -e, e);
}

} // namespace amga::engine
