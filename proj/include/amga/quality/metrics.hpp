#pragma once

#include <string>

#include "amga/numerics/tensor.hpp"

namespace amga::quality {

enum class PsnrMode {
    unit, // peak 1.0 on [0,1] tensors
    byte, // both images quantized to 8 bits, peak 255
};

/// 10 log10(peak^2 / MSE) after clamping both images to [0, 1]. Identical
/// images give +infinity. Throws DimensionError on shape mismatch.
double psnr(const Tensor& reference, const Tensor& candidate, PsnrMode mode = PsnrMode::unit);

/// "inf" for infinite values, otherwise fixed 6-decimal text.
std::string format_db(double value);

inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
/// C2 = 0.03^2, averaged over every valid window position and every plane
/// of a [C,H,W] or [N,C,H,W] tensor. Throws ConfigError below 11 pixels.
double ssim(const Tensor& reference, const Tensor& candidate);

} // namespace amga::quality
