#include "amga/quality/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <iomanip>

#include "amga/util/image_io.hpp"

namespace amga::quality {

namespace {

double clamp01(float v) { return std::clamp(static_cast<double>(v), 0.0, 1.0); }

std::vector<double> ssim_window()
{
    const long r = static_cast<long>(kSsimWindow / 2);
    std::vector<double> w;
    double total = 0.0;
    for (long dy = -r; dy <= r; ++dy) {
        for (long dx = -r; dx <= r; ++dx) {
            w.push_back(std::exp(-static_cast<double>(dx * dx + dy * dy) / (2.0 * kSsimSigma * kSsimSigma)));
            total += w.back();
        }
    }
    for (auto& v : w) v /= total;
    return w;
}

} // namespace

double psnr(const Tensor& reference, const Tensor& candidate, PsnrMode mode)
{
    require_same_shape(reference, candidate, "psnr");
    if (reference.empty()) throw DimensionError("psnr: empty images");
    double sse = 0.0;
    for (std::size_t i = 0; i < reference.numel(); ++i) {
        double a = clamp01(reference[i]), b = clamp01(candidate[i]);
        if (mode == PsnrMode::byte) {
            a = util::quantize8(static_cast<float>(a));
            b = util::quantize8(static_cast<float>(b));
        }
        sse += (a - b) * (a - b);
    }
    if (sse == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = sse / static_cast<double>(reference.numel());
    const double peak = mode == PsnrMode::byte ? 255.0 : 1.0;
    return 10.0 * std::log10(peak * peak / mse);
}

std::string format_db(double value)
{
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << value;
    return os.str();
}

double ssim(const Tensor& reference, const Tensor& candidate)
{
    require_same_shape(reference, candidate, "ssim");
    if (reference.rank() != 3 && reference.rank() != 4) {
        throw DimensionError("ssim: expected [C,H,W] or [N,C,H,W], got " + shape_str(reference.shape()));
    }
    const std::size_t H = reference.dim(reference.rank() - 2), W = reference.dim(reference.rank() - 1);
    if (H < kSsimWindow || W < kSsimWindow) {
        throw ConfigError("ssim: images must be at least 11x11, got " + std::to_string(H) + "x" + std::to_string(W));
    }
    constexpr double C1 = 0.01 * 0.01, C2 = 0.03 * 0.03;
    const auto win = ssim_window();
    const std::size_t planes = reference.numel() / (H * W);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t p = 0; p < planes; ++p) {
        const float* a = reference.data().data() + p * H * W;
        const float* b = candidate.data().data() + p * H * W;
        for (std::size_t y = 0; y + kSsimWindow <= H; ++y) {
            for (std::size_t x = 0; x + kSsimWindow <= W; ++x) {
                double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
                for (std::size_t dy = 0; dy < kSsimWindow; ++dy) {
                    for (std::size_t dx = 0; dx < kSsimWindow; ++dx) {
                        const double w = win[dy * kSsimWindow + dx];
                        const double va = clamp01(a[(y + dy) * W + x + dx]);
                        const double vb = clamp01(b[(y + dy) * W + x + dx]);
                        ma += w * va;
                        mb += w * vb;
                        saa += w * va * va;
                        sbb += w * vb * vb;
                        sab += w * va * vb;
                    }
                }
                const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
                total += ((2.0 * ma * mb + C1) * (2.0 * cov + C2)) / ((ma * ma + mb * mb + C1) * (va + vb + C2));
                ++count;
            }
        }
    }
    return total / static_cast<double>(count);
}

} // namespace amga::quality
