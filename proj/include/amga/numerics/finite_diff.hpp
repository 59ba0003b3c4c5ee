#pragma once

#include <functional>

#include "amga/numerics/tensor.hpp"

namespace amga {

/// Central-difference gradient estimate of a scalar function, one element at
/// a time. Test oracle for the tape; independent of the reverse pass.
template <typename T>
BasicTensor<T> finite_diff_gradient(const std::function<double(const BasicTensor<T>&)>& f,
                                    const BasicTensor<T>& x, double step)
{
    if (!(step > 0.0)) throw ContractError("finite_diff_gradient: step must be positive");
    BasicTensor<T> probe = x;
    BasicTensor<T> grad(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) {
        const T orig = probe[i];
        probe[i] = static_cast<T>(orig + step);
        const double hi_x = static_cast<double>(probe[i]);
        const double fp = f(probe);
        probe[i] = static_cast<T>(orig - step);
        const double lo_x = static_cast<double>(probe[i]);
        const double fm = f(probe);
        probe[i] = orig;
        // Divide by the realized spacing so storage rounding does not bias the estimate.
        grad[i] = static_cast<T>((fp - fm) / (hi_x - lo_x));
    }
    return grad;
}

struct GradientMismatch {
    double max_relative = 0.0;      // over elements with magnitude >= floor
    double max_absolute_small = 0.0; // over elements below the floor

    bool within(double rel_tol, double abs_tol) const
    {
        return max_relative < rel_tol && max_absolute_small < abs_tol;
    }
};

/// Element-wise comparison used by the gradient checks: relative error where
/// the larger magnitude is at least `abs_floor`, absolute error below it.
template <typename T>
GradientMismatch gradient_mismatch(const BasicTensor<T>& analytic, const BasicTensor<T>& reference,
                                   double abs_floor)
{
    require_same_shape(analytic, reference, "gradient_mismatch");
    GradientMismatch m;
    for (std::size_t i = 0; i < analytic.numel(); ++i) {
        const double a = analytic[i], r = reference[i];
        const double mag = std::max(std::abs(a), std::abs(r));
        if (mag >= abs_floor) {
            m.max_relative = std::max(m.max_relative, std::abs(a - r) / mag);
        } else {
            m.max_absolute_small = std::max(m.max_absolute_small, std::abs(a - r));
        }
    }
    return m;
}

} // namespace amga
