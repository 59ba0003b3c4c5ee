#include "amga/zoo/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace amga::zoo {

bool shape_contains(std::size_t cls, double u, double v)
{
    const double au = std::abs(u), av = std::abs(v);
    const bool in_square = au <= 1.0 && av <= 1.0;
    switch (cls) {
    case 0: // horizontal bars
        return in_square && static_cast<int>(std::floor((v + 1.0) * 2.5)) % 2 == 0;
    case 1: // disk
        return u * u + v * v <= 1.0;
    case 2: // cross
        return (au <= 0.3 && av <= 1.0) || (av <= 0.3 && au <= 1.0);
    case 3: { // ring
        const double r2 = u * u + v * v;
        return r2 <= 1.0 && r2 >= 0.55 * 0.55;
    }
    case 4: // 4x4 checker
        return in_square &&
               (static_cast<int>(std::floor((u + 1.0) * 2.0)) + static_cast<int>(std::floor((v + 1.0) * 2.0))) % 2 == 0;
    case 5: // triangle, apex up
        return av <= 1.0 && au <= (v + 1.0) / 2.0;
    case 6: // vertical bars
        return in_square && static_cast<int>(std::floor((u + 1.0) * 2.5)) % 2 == 0;
    case 7: // hollow square
        return in_square && (au >= 0.6 || av >= 0.6);
    default:
        return false;
    }
}

void draw_shape(ImageView img, std::size_t cls, double cx, double cy, double radius, const Color& color)
{
    const long y0 = std::max(0L, static_cast<long>(std::floor(cy - radius - 1)));
    const long y1 = std::min(static_cast<long>(img.height) - 1, static_cast<long>(std::ceil(cy + radius + 1)));
    const long x0 = std::max(0L, static_cast<long>(std::floor(cx - radius - 1)));
    const long x1 = std::min(static_cast<long>(img.width) - 1, static_cast<long>(std::ceil(cx + radius + 1)));
    for (long y = y0; y <= y1; ++y) {
        const double v = (y + 0.5 - cy) / radius;
        for (long x = x0; x <= x1; ++x) {
            const double u = (x + 0.5 - cx) / radius;
            if (!shape_contains(cls, u, v)) continue;
            for (std::size_t c = 0; c < 3; ++c) img.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = color[c];
        }
    }
}

Color draw_background(ImageView img, Rng& rng, double amplitude)
{
    Color out{};
    for (std::size_t c = 0; c < 3; ++c) {
        const double base = rng.uniform(0.0, 0.15);
        out[c] = static_cast<float>(base);
        const double fx = rng.uniform(0.5, 2.0) * 2.0 * std::numbers::pi / static_cast<double>(img.width);
        const double fy = rng.uniform(0.5, 2.0) * 2.0 * std::numbers::pi / static_cast<double>(img.height);
        const double px = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double py = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (std::size_t y = 0; y < img.height; ++y) {
            const double sy = std::sin(fy * static_cast<double>(y) + py);
            for (std::size_t x = 0; x < img.width; ++x) {
                img.at(c, y, x) = static_cast<float>(base + amplitude * std::sin(fx * static_cast<double>(x) + px) * sy);
            }
        }
    }
    return out;
}

void add_noise_and_clip(ImageView img, Rng& rng, double level)
{
    for (auto& v : img.data) {
        double x = v;
        if (level > 0.0) x += rng.uniform(-level, level);
        v = static_cast<float>(std::clamp(x, 0.0, 1.0));
    }
}

Color random_foreground(Rng& rng, const Color& base, double lo, double hi)
{
    const double contrast = rng.uniform(lo, hi);
    Color c{};
    for (std::size_t i = 0; i < 3; ++i) c[i] = static_cast<float>(std::min(1.0, base[i] + contrast));
    return c;
}

} // namespace amga::zoo
