#include "amga/track/tracker.hpp"

#include <algorithm>
#include <cmath>

namespace amga::track {

Tensor sample_patch(const Tensor& frame, double cx, double cy, double kx, double ky, std::size_t size)
{
    if (frame.rank() != 3) throw DimensionError("sample_patch: expected [C,H,W], got " + shape_str(frame.shape()));
    const std::size_t C = frame.dim(0), H = frame.dim(1), W = frame.dim(2);
    const double half = static_cast<double>(size) / 2.0;
    Tensor out({1, C, size, size});
    std::vector<std::size_t> x0(size), x1(size), y0(size), y1(size);
    std::vector<double> tx(size), ty(size);
    auto axis = [](double f, std::size_t n, std::size_t& a, std::size_t& b, double& t) {
        const double fl = std::floor(f);
        t = f - fl;
        const long i = static_cast<long>(fl);
        a = static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(n) - 1));
        b = static_cast<std::size_t>(std::clamp(i + 1, 0L, static_cast<long>(n) - 1));
    };
    for (std::size_t u = 0; u < size; ++u) {
        const double off = static_cast<double>(u) + 0.5 - half;
        axis(cx + off * kx - 0.5, W, x0[u], x1[u], tx[u]);
        axis(cy + off * ky - 0.5, H, y0[u], y1[u], ty[u]);
    }
    for (std::size_t c = 0; c < C; ++c) {
        const float* src = frame.data().data() + c * H * W;
        for (std::size_t v = 0; v < size; ++v) {
            for (std::size_t u = 0; u < size; ++u) {
                const double top = (1 - tx[u]) * src[y0[v] * W + x0[u]] + tx[u] * src[y0[v] * W + x1[u]];
                const double bottom = (1 - tx[u]) * src[y1[v] * W + x0[u]] + tx[u] * src[y1[v] * W + x1[u]];
                out.at4(0, c, v, u) = static_cast<float>((1 - ty[v]) * top + ty[v] * bottom);
            }
        }
    }
    return out;
}

Tensor crop_box(const Tensor& frame, const Box& box)
{
    return sample_patch(frame, box.cx(), box.cy(), box.w / 32.0, box.h / 32.0, 32);
}

namespace {

double norm_of(std::span<const float> v)
{
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

} // namespace

Tracker::Tracker(const zoo::ModelRecord& feature_model, const Tensor& frame0, const Box& box0)
    : model_(&feature_model), box_(box0)
{
    if (!(box0.w >= 4.0 && box0.h >= 4.0)) throw ConfigError("tracker: degenerate initial box");
    if (frame0.rank() != 3) throw DimensionError("tracker: frame must be [C,H,W], got " + shape_str(frame0.shape()));
    if (box0.x < 0 || box0.y < 0 || box0.x + box0.w > static_cast<double>(frame0.dim(2)) ||
        box0.y + box0.h > static_cast<double>(frame0.dim(1))) {
        throw ConfigError("tracker: initial box outside the frame");
    }
    const std::size_t stride = zoo::conv_feature_stride(feature_model.arch);
    if (kGridStride % stride != 0) {
        throw ConfigError("tracker: feature stride " + std::to_string(stride) + " of model '" + feature_model.name() +
                          "' does not divide the grid stride");
    }
    template_ = zoo::conv_features(feature_model, crop_box(frame0, box0), true);
    template_norm_ = norm_of(template_.data());
}

Box Tracker::step(const Tensor& frame)
{
    const std::size_t C = template_.dim(1), th = template_.dim(2), tw = template_.dim(3);
    const std::size_t stride = zoo::conv_feature_stride(model_->arch);
    const double T = 32.0;

    struct Candidate {
        double score = -2.0, displacement = 0.0, scale_gap = 0.0;
        Box box;
    } best;
    auto better = [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.displacement != b.displacement) return a.displacement < b.displacement;
        return a.scale_gap < b.scale_gap;
    };

    for (double s : kScales) {
        const double w = box_.w * s, h = box_.h * s;
        const long J = static_cast<long>(std::floor((kSearchFactor * T / s - T) / (2.0 * kGridStride)));
        const std::size_t R = static_cast<std::size_t>(T) + 2 * kGridStride * static_cast<std::size_t>(std::max(J, 0L));
        const double kx = w / T, ky = h / T;
        const Tensor region = sample_patch(frame, box_.cx(), box_.cy(), kx, ky, R);
        const Tensor feats = zoo::conv_features(*model_, region, true);
        const std::size_t FH = feats.dim(2), FW = feats.dim(3);
        for (long jy = -J; jy <= J; ++jy) {
            for (long jx = -J; jx <= J; ++jx) {
                const std::size_t oy = static_cast<std::size_t>(jy + J) * kGridStride / stride;
                const std::size_t ox = static_cast<std::size_t>(jx + J) * kGridStride / stride;
                if (oy + th > FH || ox + tw > FW) continue;
                double dot = 0.0, nn = 0.0;
                for (std::size_t c = 0; c < C; ++c) {
                    for (std::size_t y = 0; y < th; ++y) {
                        for (std::size_t x = 0; x < tw; ++x) {
                            const double f = feats.at4(0, c, oy + y, ox + x);
                            dot += f * template_.at4(0, c, y, x);
                            nn += f * f;
                        }
                    }
                }
                const double denom = std::sqrt(nn) * template_norm_;
                Candidate cand;
                cand.score = denom > 0.0 ? dot / denom : 0.0;
                const double dx = static_cast<double>(jx * static_cast<long>(kGridStride)) * kx;
                const double dy = static_cast<double>(jy * static_cast<long>(kGridStride)) * ky;
                cand.displacement = std::hypot(dx, dy);
                cand.scale_gap = std::abs(s - 1.0);
                cand.box = Box::centered(box_.cx() + dx, box_.cy() + dy, w, h);
                if (better(cand, best)) best = cand;
            }
        }
    }
    // Keep the box size sane and its centre on the frame.
    const double FWd = static_cast<double>(frame.dim(2)), FHd = static_cast<double>(frame.dim(1));
    Box b = best.box;
    b.w = std::clamp(b.w, 8.0, FWd);
    b.h = std::clamp(b.h, 8.0, FHd);
    b = Box::centered(std::clamp(best.box.cx(), 0.0, FWd), std::clamp(best.box.cy(), 0.0, FHd), b.w, b.h);
    box_ = b;
    last_score_ = best.score;
    return box_;
}

} // namespace amga::track
