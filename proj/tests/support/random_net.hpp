#pragma once

// Randomly shaped small networks on the double-precision tape, used by the
// gradient checks.

#include <optional>
#include <vector>

#include "amga/numerics/autograd.hpp"
#include "amga/numerics/finite_diff.hpp"
#include "amga/numerics/rng.hpp"

namespace amga::testing {

struct RandomNet {
    std::size_t batch = 2, channels = 1, side = 6;
    std::size_t conv_out = 2, kernel = 3, stride = 1, padding = 0;
    bool conv_bias = true;
    bool use_relu = true;
    int pool = 0; // 0 none, 1 max, 2 avg
    std::size_t classes = 3;
    bool mix = false; // second dense head mixed with learned weights
    bool gate = false; // elementwise product with a second input before the head
    std::vector<std::size_t> labels;

    std::vector<TensorD> params; // x, kernel, [bias], w, b, [w2, b2, mix logits], [gate]

    static RandomNet draw(Rng& rng)
    {
        RandomNet n;
        n.batch = 1 + rng.below(2);
        n.channels = 1 + rng.below(2);
        n.side = 4 + rng.below(4);
        n.conv_out = 1 + rng.below(3);
        n.kernel = 1 + 2 * rng.below(2);
        n.stride = 1 + rng.below(2);
        n.padding = rng.below(2);
        n.conv_bias = rng.below(2) == 0;
        n.use_relu = rng.below(3) != 0;
        n.classes = 2 + rng.below(3);
        n.mix = rng.below(2) == 0;
        n.gate = rng.below(3) == 0;
        const std::size_t spatial = n.conv_side();
        n.pool = spatial >= 2 && spatial % 2 == 0 ? static_cast<int>(rng.below(3)) : 0;
        for (std::size_t b = 0; b < n.batch; ++b) n.labels.push_back(rng.below(n.classes));

        auto rand = [&](Shape s, double scale) {
            TensorD t(std::move(s));
            for (auto& v : t.data()) v = scale * rng.normal();
            return t;
        };
        n.params.push_back(rand({n.batch, n.channels, n.side, n.side}, 1.0));
        n.params.push_back(rand({n.conv_out, n.channels, n.kernel, n.kernel}, 0.5));
        if (n.conv_bias) n.params.push_back(rand({n.conv_out}, 0.1));
        const std::size_t feat = n.features();
        n.params.push_back(rand({feat, n.classes}, 0.5));
        n.params.push_back(rand({n.classes}, 0.1));
        if (n.mix) {
            n.params.push_back(rand({feat, n.classes}, 0.5));
            n.params.push_back(rand({n.classes}, 0.1));
            n.params.push_back(rand({2}, 1.0));
        }
        if (n.gate) n.params.push_back(rand({n.batch, feat}, 1.0));
        return n;
    }

    std::size_t conv_side() const { return (side + 2 * padding - kernel) / stride + 1; }
    std::size_t features() const
    {
        const std::size_t s = pool ? conv_side() / 2 : conv_side();
        return conv_out * s * s;
    }

    /// Record the scalar loss with every parameter as a variable.
    Var record(TapeD& tape, const std::vector<TensorD>& values, std::vector<Var>& vars) const
    {
        vars.clear();
        for (const auto& v : values) vars.push_back(tape.variable(v));
        std::size_t k = 0;
        const Var x = vars[k++];
        const Var kern = vars[k++];
        std::optional<Var> cb;
        if (conv_bias) cb = vars[k++];
        Var h = ag::conv2d(tape, x, kern, cb, kernels::Conv2dParams{stride, padding});
        if (use_relu) h = ag::relu(tape, h);
        if (pool == 1) h = ag::maxpool(tape, h, 2);
        if (pool == 2) h = ag::avgpool(tape, h, 2);
        h = ag::flatten(tape, h);
        const Var w = vars[k++], b = vars[k++];
        std::optional<Var> w2, b2, mixl;
        if (mix) {
            w2 = vars[k++];
            b2 = vars[k++];
            mixl = vars[k++];
        }
        if (gate) h = ag::scale(tape, ag::mul(tape, h, vars[k++]), 0.5);
        Var p = ag::softmax(tape, ag::dense(tape, h, w, b));
        if (mix) {
            const Var p2 = ag::softmax(tape, ag::dense(tape, h, *w2, *b2));
            p = ag::softmax_mix(tape, {p, p2}, *mixl);
        }
        return ag::cross_entropy(tape, p, labels);
    }

    double loss(const std::vector<TensorD>& values) const
    {
        TapeD tape;
        std::vector<Var> vars;
        return tape.value(record(tape, values, vars))[0];
    }

    /// Worst mismatch between reverse-mode and central differences over every parameter.
    GradientMismatch check(double step, double abs_floor) const
    {
        TapeD tape;
        std::vector<Var> vars;
        const auto grads = tape.backward(record(tape, params, vars));
        GradientMismatch worst;
        for (std::size_t p = 0; p < params.size(); ++p) {
            auto f = [&](const TensorD& probe) {
                auto values = params;
                values[p] = probe;
                return loss(values);
            };
            const auto fd = finite_diff_gradient<double>(f, params[p], step);
            const auto m = gradient_mismatch(grads.of(vars[p]), fd, abs_floor);
            worst.max_relative = std::max(worst.max_relative, m.max_relative);
            worst.max_absolute_small = std::max(worst.max_absolute_small, m.max_absolute_small);
        }
        return worst;
    }
};

} // namespace amga::testing
