#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "amga/numerics/rng.hpp"

namespace amga::zoo {

inline constexpr std::size_t kMaxShapeClasses = 8;

// Foreground brightness above the background base colour.
inline constexpr double kContrastLo = 0.12;
inline constexpr double kContrastHi = 0.25;

/// Planar 3-channel float image living in someone else's buffer.
struct ImageView {
    std::span<float> data; // 3 * height * width, channel-major
    std::size_t height = 0;
    std::size_t width = 0;

    float& at(std::size_t c, std::size_t y, std::size_t x) { return data[(c * height + y) * width + x]; }
};

using Color = std::array<float, 3>;

/// True when normalized offset (u, v) from the shape centre (units of the
/// shape radius) falls inside shape family `cls`.
bool shape_contains(std::size_t cls, double u, double v);

/// Paint shape `cls` centred at (cx, cy) with half-extent `radius` pixels.
/// Pixels are tested at their centres; no anti-aliasing.
void draw_shape(ImageView img, std::size_t cls, double cx, double cy, double radius, const Color& color);

/// Low-frequency textured background: base colour plus a product of sinusoids.
/// Returns the base colour.
Color draw_background(ImageView img, Rng& rng, double amplitude = 0.08);

/// Add uniform noise in [-level, level] then clip every pixel to [0, 1].
void add_noise_and_clip(ImageView img, Rng& rng, double level);

/// Foreground a random contrast in [lo, hi] above the background base.
Color random_foreground(Rng& rng, const Color& base, double lo, double hi);

} // namespace amga::zoo
