#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace amga::util {

/// Binary P6 with maxval 255; values in [0,1] are clamped and rounded to 8 bits.
void write_ppm(const std::filesystem::path& path, std::span<const float> planar_rgb, std::size_t height,
               std::size_t width);

struct PpmImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> planar; // 3 * height * width, values k / 255
};

PpmImage read_ppm(const std::filesystem::path& path);

/// Round a [0,1] value to the nearest 8-bit level.
unsigned char quantize8(float v);

} // namespace amga::util
