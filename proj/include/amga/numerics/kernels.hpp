#pragma once

// Tape-free forward and backward kernels. The autograd layer wraps these;
// inference paths (evaluation, tracking) call them directly.
//
// Storage is T (float in production); every dot product and reduction is
// accumulated in double and rounded once on store.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "amga/numerics/tensor.hpp"

namespace amga::kernels {

inline constexpr double kLogFloor = 1e-12;

struct Conv2dParams {
    std::size_t stride = 1;
    std::size_t padding = 0;
};

inline std::size_t conv_out_size(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad)
{
    return (in + 2 * pad - k) / stride + 1;
}

// ---------------------------------------------------------------- dense

template <typename T>
void check_dense(const BasicTensor<T>& input, const BasicTensor<T>& weights, const BasicTensor<T>& bias)
{
    if (input.rank() != 2 || weights.rank() != 2 || bias.rank() != 1 ||
        input.dim(1) != weights.dim(0) || bias.dim(0) != weights.dim(1)) {
        throw DimensionError("dense: incompatible shapes input " + shape_str(input.shape()) +
                             ", weights " + shape_str(weights.shape()) + ", bias " +
                             shape_str(bias.shape()));
    }
}

template <typename T>
BasicTensor<T> dense_forward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                             const BasicTensor<T>& bias)
{
    check_dense(input, weights, bias);
    const std::size_t batch = input.dim(0), in = input.dim(1), out = weights.dim(1);
    BasicTensor<T> result({batch, out});
    std::vector<double> acc(out);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t j = 0; j < out; ++j) acc[j] = bias[j];
        const T* x = input.data().data() + b * in;
        for (std::size_t i = 0; i < in; ++i) {
            const double xi = x[i];
            if (xi == 0.0) continue;
            const T* w = weights.data().data() + i * out;
            for (std::size_t j = 0; j < out; ++j) acc[j] += xi * static_cast<double>(w[j]);
        }
        for (std::size_t j = 0; j < out; ++j) result[b * out + j] = static_cast<T>(acc[j]);
    }
    return result;
}

template <typename T>
struct DenseGrads {
    BasicTensor<T> input, weights, bias;
};

template <typename T>
DenseGrads<T> dense_backward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                             const BasicTensor<T>& grad_out, bool need_input = true,
                             bool need_params = true)
{
    const std::size_t batch = input.dim(0), in = input.dim(1), out = weights.dim(1);
    DenseGrads<T> g;
    if (need_input) {
        g.input = BasicTensor<T>({batch, in});
        for (std::size_t b = 0; b < batch; ++b) {
            const T* go = grad_out.data().data() + b * out;
            for (std::size_t i = 0; i < in; ++i) {
                const T* w = weights.data().data() + i * out;
                double s = 0.0;
                for (std::size_t j = 0; j < out; ++j) s += static_cast<double>(go[j]) * w[j];
                g.input[b * in + i] = static_cast<T>(s);
            }
        }
    }
    if (need_params) {
        std::vector<double> gw(in * out, 0.0), gb(out, 0.0);
        for (std::size_t b = 0; b < batch; ++b) {
            const T* x = input.data().data() + b * in;
            const T* go = grad_out.data().data() + b * out;
            for (std::size_t j = 0; j < out; ++j) gb[j] += go[j];
            for (std::size_t i = 0; i < in; ++i) {
                const double xi = x[i];
                if (xi == 0.0) continue;
                double* row = gw.data() + i * out;
                for (std::size_t j = 0; j < out; ++j) row[j] += xi * static_cast<double>(go[j]);
            }
        }
        g.weights = BasicTensor<T>({in, out}, std::vector<T>(gw.begin(), gw.end()));
        g.bias = BasicTensor<T>({out}, std::vector<T>(gb.begin(), gb.end()));
    }
    return g;
}

// ---------------------------------------------------------------- conv2d

template <typename T>
void check_conv(const BasicTensor<T>& input, const BasicTensor<T>& kernel, const BasicTensor<T>* bias,
                const Conv2dParams& p)
{
    if (input.rank() != 4 || kernel.rank() != 4) {
        throw DimensionError("conv2d: expected rank-4 input and kernel, got " +
                             shape_str(input.shape()) + " and " + shape_str(kernel.shape()));
    }
    if (p.stride == 0) throw DimensionError("conv2d: stride must be positive");
    if (input.dim(1) != kernel.dim(1)) {
        throw DimensionError("conv2d: channel mismatch input " + shape_str(input.shape()) +
                             " vs kernel " + shape_str(kernel.shape()));
    }
    if (kernel.dim(2) % 2 == 0 || kernel.dim(3) % 2 == 0) {
        throw DimensionError("conv2d: kernel spatial size must be odd, got " + shape_str(kernel.shape()));
    }
    if (input.dim(2) + 2 * p.padding < kernel.dim(2) || input.dim(3) + 2 * p.padding < kernel.dim(3)) {
        throw DimensionError("conv2d: kernel " + shape_str(kernel.shape()) +
                             " larger than padded input " + shape_str(input.shape()));
    }
    if (bias && (bias->rank() != 1 || bias->dim(0) != kernel.dim(0))) {
        throw DimensionError("conv2d: bias " + shape_str(bias->shape()) + " does not match kernel " +
                             shape_str(kernel.shape()));
    }
}

namespace detail {

// Range of output columns ox for which ox*stride + k - pad lies in [0, extent).
inline void valid_range(std::size_t extent, std::size_t out, std::size_t k, std::size_t stride,
                        std::size_t pad, std::size_t& lo, std::size_t& hi)
{
    const long long e = static_cast<long long>(extent);
    const long long s = static_cast<long long>(stride);
    const long long off = static_cast<long long>(k) - static_cast<long long>(pad);
    long long first = off >= 0 ? 0 : (-off + s - 1) / s;
    long long last = (e - 1 - off) >= 0 ? (e - 1 - off) / s : -1;
    if (last > static_cast<long long>(out) - 1) last = static_cast<long long>(out) - 1;
    if (last < first) {
        lo = hi = 0;
        return;
    }
    lo = static_cast<std::size_t>(first);
    hi = static_cast<std::size_t>(last + 1);
}

} // namespace detail

/// Cross-correlation; `bias` may be null.
template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& input, const BasicTensor<T>& kernel,
                              const BasicTensor<T>* bias, Conv2dParams p)
{
    check_conv(input, kernel, bias, p);
    const std::size_t N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    const std::size_t O = kernel.dim(0), KH = kernel.dim(2), KW = kernel.dim(3);
    const std::size_t OH = conv_out_size(H, KH, p.stride, p.padding);
    const std::size_t OW = conv_out_size(W, KW, p.stride, p.padding);
    BasicTensor<T> out({N, O, OH, OW});
    std::vector<double> acc(OH * OW);
    const T* in = input.data().data();
    const T* ker = kernel.data().data();
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t o = 0; o < O; ++o) {
            std::fill(acc.begin(), acc.end(), bias ? static_cast<double>((*bias)[o]) : 0.0);
            for (std::size_t c = 0; c < C; ++c) {
                const T* plane = in + (n * C + c) * H * W;
                for (std::size_t ky = 0; ky < KH; ++ky) {
                    std::size_t oy0, oy1;
                    detail::valid_range(H, OH, ky, p.stride, p.padding, oy0, oy1);
                    for (std::size_t kx = 0; kx < KW; ++kx) {
                        const double w = ker[((o * C + c) * KH + ky) * KW + kx];
                        if (w == 0.0) continue;
                        std::size_t ox0, ox1;
                        detail::valid_range(W, OW, kx, p.stride, p.padding, ox0, ox1);
                        // Unsigned wrap is intended: shift + ox * stride is non-negative
                        // for every ox in [ox0, ox1).
                        const std::size_t shift = kx - p.padding;
                        for (std::size_t oy = oy0; oy < oy1; ++oy) {
                            const T* row = plane + (oy * p.stride + ky - p.padding) * W;
                            double* arow = acc.data() + oy * OW;
                            if (p.stride == 1) {
                                for (std::size_t ox = ox0; ox < ox1; ++ox) arow[ox] += w * row[ox + shift];
                            } else {
                                for (std::size_t ox = ox0; ox < ox1; ++ox) arow[ox] += w * row[ox * p.stride + shift];
                            }
                        }
                    }
                }
            }
            T* dst = out.data().data() + (n * O + o) * OH * OW;
            for (std::size_t i = 0; i < OH * OW; ++i) dst[i] = static_cast<T>(acc[i]);
        }
    }
    return out;
}

template <typename T>
struct ConvGrads {
    BasicTensor<T> input, kernel, bias;
};

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& kernel,
                             const BasicTensor<T>& grad_out, Conv2dParams p, bool need_input = true,
                             bool need_params = true)
{
    const std::size_t N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    const std::size_t O = kernel.dim(0), KH = kernel.dim(2), KW = kernel.dim(3);
    const std::size_t OH = grad_out.dim(2), OW = grad_out.dim(3);
    const T* in = input.data().data();
    const T* ker = kernel.data().data();
    const T* go = grad_out.data().data();
    ConvGrads<T> g;

    if (need_input) {
        std::vector<double> gi(input.numel(), 0.0);
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t o = 0; o < O; ++o) {
                const T* gplane = go + (n * O + o) * OH * OW;
                for (std::size_t c = 0; c < C; ++c) {
                    double* dplane = gi.data() + (n * C + c) * H * W;
                    for (std::size_t ky = 0; ky < KH; ++ky) {
                        std::size_t oy0, oy1;
                        detail::valid_range(H, OH, ky, p.stride, p.padding, oy0, oy1);
                        for (std::size_t kx = 0; kx < KW; ++kx) {
                            const double w = ker[((o * C + c) * KH + ky) * KW + kx];
                            if (w == 0.0) continue;
                            std::size_t ox0, ox1;
                            detail::valid_range(W, OW, kx, p.stride, p.padding, ox0, ox1);
                            const std::size_t shift = kx - p.padding;
                            for (std::size_t oy = oy0; oy < oy1; ++oy) {
                                double* drow = dplane + (oy * p.stride + ky - p.padding) * W;
                                const T* grow = gplane + oy * OW;
                                for (std::size_t ox = ox0; ox < ox1; ++ox) drow[ox * p.stride + shift] += w * grow[ox];
                            }
                        }
                    }
                }
            }
        }
        g.input = BasicTensor<T>(input.shape(), std::vector<T>(gi.begin(), gi.end()));
    }

    if (need_params) {
        std::vector<double> gk(kernel.numel(), 0.0), gb(O, 0.0);
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t o = 0; o < O; ++o) {
                const T* gplane = go + (n * O + o) * OH * OW;
                for (std::size_t i = 0; i < OH * OW; ++i) gb[o] += gplane[i];
                for (std::size_t c = 0; c < C; ++c) {
                    const T* plane = in + (n * C + c) * H * W;
                    for (std::size_t ky = 0; ky < KH; ++ky) {
                        std::size_t oy0, oy1;
                        detail::valid_range(H, OH, ky, p.stride, p.padding, oy0, oy1);
                        for (std::size_t kx = 0; kx < KW; ++kx) {
                            std::size_t ox0, ox1;
                            detail::valid_range(W, OW, kx, p.stride, p.padding, ox0, ox1);
                            const std::size_t shift = kx - p.padding;
                            double s = 0.0;
                            for (std::size_t oy = oy0; oy < oy1; ++oy) {
                                const T* row = plane + (oy * p.stride + ky - p.padding) * W;
                                const T* grow = gplane + oy * OW;
                                for (std::size_t ox = ox0; ox < ox1; ++ox) {
                                    s += static_cast<double>(grow[ox]) * row[ox * p.stride + shift];
                                }
                            }
                            gk[((o * C + c) * KH + ky) * KW + kx] += s;
                        }
                    }
                }
            }
        }
        g.kernel = BasicTensor<T>(kernel.shape(), std::vector<T>(gk.begin(), gk.end()));
        g.bias = BasicTensor<T>({O}, std::vector<T>(gb.begin(), gb.end()));
    }
    return g;
}

// ---------------------------------------------------------------- relu

template <typename T>
BasicTensor<T> relu_forward(const BasicTensor<T>& input)
{
    BasicTensor<T> out = input;
    for (auto& v : out.data()) v = v > T(0) ? v : T(0);
    return out;
}

/// Subgradient at exactly 0 is 0.
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& input, const BasicTensor<T>& grad_out)
{
    BasicTensor<T> g(input.shape());
    for (std::size_t i = 0; i < input.numel(); ++i) g[i] = input[i] > T(0) ? grad_out[i] : T(0);
    return g;
}

// ---------------------------------------------------------------- pooling

template <typename T>
void check_pool(const BasicTensor<T>& input, std::size_t size, const char* name)
{
    if (input.rank() != 4 || size == 0 || input.dim(2) < size || input.dim(3) < size) {
        throw DimensionError(std::string(name) + ": window " + std::to_string(size) +
                             " incompatible with input " + shape_str(input.shape()));
    }
}

/// Non-overlapping max pooling (stride == window). `argmax` receives the
/// flat input index chosen for each output; ties keep the first maximum.
template <typename T>
BasicTensor<T> maxpool_forward(const BasicTensor<T>& input, std::size_t size,
                               std::vector<std::size_t>* argmax = nullptr)
{
    check_pool(input, size, "maxpool");
    const std::size_t N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    const std::size_t OH = H / size, OW = W / size;
    BasicTensor<T> out({N, C, OH, OW});
    if (argmax) argmax->assign(out.numel(), 0);
    std::size_t k = 0;
    for (std::size_t nc = 0; nc < N * C; ++nc) {
        const std::size_t base = nc * H * W;
        for (std::size_t oy = 0; oy < OH; ++oy) {
            for (std::size_t ox = 0; ox < OW; ++ox, ++k) {
                std::size_t best = base + oy * size * W + ox * size;
                T bv = input[best];
                for (std::size_t dy = 0; dy < size; ++dy) {
                    for (std::size_t dx = 0; dx < size; ++dx) {
                        const std::size_t idx = base + (oy * size + dy) * W + ox * size + dx;
                        if (input[idx] > bv) {
                            bv = input[idx];
                            best = idx;
                        }
                    }
                }
                out[k] = bv;
                if (argmax) (*argmax)[k] = best;
            }
        }
    }
    return out;
}

template <typename T>
BasicTensor<T> maxpool_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax,
                                const BasicTensor<T>& grad_out)
{
    BasicTensor<T> g(input_shape);
    for (std::size_t k = 0; k < argmax.size(); ++k) g[argmax[k]] += grad_out[k];
    return g;
}

template <typename T>
BasicTensor<T> avgpool_forward(const BasicTensor<T>& input, std::size_t size)
{
    check_pool(input, size, "avgpool");
    const std::size_t N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    const std::size_t OH = H / size, OW = W / size;
    const double inv = 1.0 / static_cast<double>(size * size);
    BasicTensor<T> out({N, C, OH, OW});
    std::size_t k = 0;
    for (std::size_t nc = 0; nc < N * C; ++nc) {
        const std::size_t base = nc * H * W;
        for (std::size_t oy = 0; oy < OH; ++oy) {
            for (std::size_t ox = 0; ox < OW; ++ox, ++k) {
                double s = 0.0;
                for (std::size_t dy = 0; dy < size; ++dy) {
                    for (std::size_t dx = 0; dx < size; ++dx) {
                        s += input[base + (oy * size + dy) * W + ox * size + dx];
                    }
                }
                out[k] = static_cast<T>(s * inv);
            }
        }
    }
    return out;
}

template <typename T>
BasicTensor<T> avgpool_backward(const Shape& input_shape, std::size_t size, const BasicTensor<T>& grad_out)
{
    const std::size_t H = input_shape[2], W = input_shape[3];
    const std::size_t OH = grad_out.dim(2), OW = grad_out.dim(3);
    const double inv = 1.0 / static_cast<double>(size * size);
    BasicTensor<T> g(input_shape);
    std::size_t k = 0;
    for (std::size_t nc = 0; nc < input_shape[0] * input_shape[1]; ++nc) {
        const std::size_t base = nc * H * W;
        for (std::size_t oy = 0; oy < OH; ++oy) {
            for (std::size_t ox = 0; ox < OW; ++ox, ++k) {
                const T v = static_cast<T>(grad_out[k] * inv);
                for (std::size_t dy = 0; dy < size; ++dy) {
                    for (std::size_t dx = 0; dx < size; ++dx) g[base + (oy * size + dy) * W + ox * size + dx] = v;
                }
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------- softmax / cross-entropy

template <typename T>
BasicTensor<T> softmax_forward(const BasicTensor<T>& logits)
{
    if (logits.rank() != 2 || logits.dim(1) < 2) {
        throw DimensionError("softmax: expected [batch x classes>=2], got " + shape_str(logits.shape()));
    }
    const std::size_t B = logits.dim(0), C = logits.dim(1);
    BasicTensor<T> out(logits.shape());
    std::vector<double> e(C);
    for (std::size_t b = 0; b < B; ++b) {
        const T* z = logits.data().data() + b * C;
        double m = z[0];
        for (std::size_t j = 1; j < C; ++j) m = std::max(m, static_cast<double>(z[j]));
        double s = 0.0;
        for (std::size_t j = 0; j < C; ++j) {
            e[j] = std::exp(static_cast<double>(z[j]) - m);
            s += e[j];
        }
        for (std::size_t j = 0; j < C; ++j) out[b * C + j] = static_cast<T>(e[j] / s);
    }
    return out;
}

template <typename T>
BasicTensor<T> softmax_backward(const BasicTensor<T>& probs, const BasicTensor<T>& grad_out)
{
    const std::size_t B = probs.dim(0), C = probs.dim(1);
    BasicTensor<T> g(probs.shape());
    for (std::size_t b = 0; b < B; ++b) {
        double dot = 0.0;
        for (std::size_t j = 0; j < C; ++j) dot += static_cast<double>(grad_out[b * C + j]) * probs[b * C + j];
        for (std::size_t j = 0; j < C; ++j) {
            g[b * C + j] = static_cast<T>(static_cast<double>(probs[b * C + j]) * (grad_out[b * C + j] - dot));
        }
    }
    return g;
}

template <typename T>
void check_labels(const BasicTensor<T>& probs, std::span<const std::size_t> labels)
{
    if (probs.rank() != 2 || probs.dim(0) != labels.size()) {
        throw DimensionError("cross_entropy: probabilities " + shape_str(probs.shape()) + " vs " +
                             std::to_string(labels.size()) + " labels");
    }
    for (auto y : labels) {
        if (y >= probs.dim(1)) {
            throw IndexError("cross_entropy: label " + std::to_string(y) + " out of range for " +
                             std::to_string(probs.dim(1)) + " classes");
        }
    }
}

/// Mean over the batch of -log(p[label] + 1e-12).
template <typename T>
double cross_entropy_value(const BasicTensor<T>& probs, std::span<const std::size_t> labels)
{
    check_labels(probs, labels);
    const std::size_t C = probs.dim(1);
    double s = 0.0;
    for (std::size_t b = 0; b < labels.size(); ++b) {
        s -= std::log(static_cast<double>(probs[b * C + labels[b]]) + kLogFloor);
    }
    return labels.empty() ? 0.0 : s / static_cast<double>(labels.size());
}

template <typename T>
BasicTensor<T> cross_entropy_backward(const BasicTensor<T>& probs, std::span<const std::size_t> labels, double grad_out)
{
    const std::size_t C = probs.dim(1);
    BasicTensor<T> g(probs.shape());
    const double scale = grad_out / static_cast<double>(labels.size());
    for (std::size_t b = 0; b < labels.size(); ++b) {
        const std::size_t i = b * C + labels[b];
        g[i] = static_cast<T>(-scale / (static_cast<double>(probs[i]) + kLogFloor));
    }
    return g;
}

// ---------------------------------------------------------------- misc

/// Row-wise argmax, ties broken by the lowest index.
template <typename T>
std::vector<std::size_t> argmax_rows(const BasicTensor<T>& scores)
{
    const std::size_t B = scores.dim(0), C = scores.dim(1);
    std::vector<std::size_t> out(B, 0);
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t j = 1; j < C; ++j) {
            if (scores[b * C + j] > scores[b * C + out[b]]) out[b] = j;
        }
    }
    return out;
}

} // namespace amga::kernels
