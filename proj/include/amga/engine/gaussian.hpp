#pragma once

#include <vector>

#include "amga/numerics/tensor.hpp"

namespace amga::engine {

/// Truncated, renormalized 2-D Gaussian.
struct GaussianKernel {
    double sigma = 1.0;
    std::size_t radius = 0;
    std::vector<double> values; // (2r+1)^2, row-major, centre at (r, r)

    std::size_t size() const { return 2 * radius + 1; }
    double at(long dy, long dx) const
    {
        const long r = static_cast<long>(radius);
        return values[static_cast<std::size_t>((dy + r) * static_cast<long>(size()) + dx + r)];
    }
};

/// Continuous density exp(-(u^2+v^2)/(2 sigma^2)) / (2 pi sigma^2).
double gaussian_density(double u, double v, double sigma);

/// radius = ceil(3 sigma); values sum to 1. Throws ConfigError for sigma <= 0.
GaussianKernel build_gaussian_kernel(double sigma);

/// Index into [0, n) under mirror reflection without edge repeat (-1 -> 1).
std::size_t reflect_index(long i, std::size_t n);

/// Per-plane 2-D convolution of delta ([C,H,W] or [N,C,H,W]) with reflect padding.
Tensor gaussian_filter(const Tensor& delta, const GaussianKernel& kernel);

/// gaussian_filter followed by clamping to [-epsilon, epsilon].
Tensor smooth_perturbation(const Tensor& delta, const GaussianKernel& kernel, double epsilon);

/// Largest float not above epsilon; clamping to it keeps |delta| <= epsilon exact.
float budget_bound(double epsilon);

/// Elementwise clamp to [-epsilon, epsilon].
void project_budget(Tensor& delta, double epsilon);

} // namespace amga::engine
