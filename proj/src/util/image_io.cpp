#include "amga/util/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "amga/numerics/errors.hpp"

namespace amga::util {

unsigned char quantize8(float v)
{
    const double x = std::clamp(static_cast<double>(v), 0.0, 1.0) * 255.0;
    return static_cast<unsigned char>(std::lround(x));
}

void write_ppm(const std::filesystem::path& path, std::span<const float> planar_rgb, std::size_t height,
               std::size_t width)
{
    if (planar_rgb.size() != 3 * height * width) throw DimensionError("write_ppm: buffer does not match 3x" +
                                                                      std::to_string(height) + "x" + std::to_string(width));
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P6\n" << width << ' ' << height << "\n255\n";
    const std::size_t plane = height * width;
    std::string row(3 * width, '\0');
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                row[3 * x + c] = static_cast<char>(quantize8(planar_rgb[c * plane + y * width + x]));
            }
        }
        out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError("failed writing " + path.string());
}

PpmImage read_ppm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::string magic;
    std::size_t maxval = 0;
    PpmImage img;
    in >> magic >> img.width >> img.height >> maxval;
    if (magic != "P6" || maxval != 255 || !in) throw ParseError(path.string() + ": not an 8-bit binary PPM");
    in.get();
    const std::size_t plane = img.width * img.height;
    std::vector<unsigned char> raw(3 * plane);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw ParseError(path.string() + ": truncated payload");
    img.planar.resize(3 * plane);
    for (std::size_t i = 0; i < plane; ++i) {
        for (std::size_t c = 0; c < 3; ++c) img.planar[c * plane + i] = static_cast<float>(raw[3 * i + c]) / 255.0f;
    }
    return img;
}

} // namespace amga::util
