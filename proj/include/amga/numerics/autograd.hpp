#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "amga/numerics/kernels.hpp"
#include "amga/numerics/tensor.hpp"

namespace amga {

/// Handle to a value recorded on a tape. Only meaningful with the tape
/// that created it.
struct Var {
    std::size_t id = static_cast<std::size_t>(-1);
};

template <typename T>
class BasicTape;

/// Result of a reverse pass: gradients keyed by Var id.
template <typename T>
class BasicGradients {
public:
    BasicGradients() = default;
    BasicGradients(std::vector<std::optional<BasicTensor<T>>> grads, std::vector<Shape> shapes)
        : grads_(std::move(grads)), shapes_(std::move(shapes))
    { }

    /// Gradient of the loss w.r.t. `v`; zero when `v` did not contribute
    /// or does not belong to the recorded graph.
    BasicTensor<T> of(Var v) const
    {
        if (v.id < grads_.size() && grads_[v.id]) return *grads_[v.id];
        if (v.id < shapes_.size()) return BasicTensor<T>(shapes_[v.id]);
        return {};
    }

    BasicTensor<T> of(Var v, const Shape& shape) const
    {
        if (v.id < grads_.size() && grads_[v.id]) return *grads_[v.id];
        return BasicTensor<T>(shape);
    }

private:
    std::vector<std::optional<BasicTensor<T>>> grads_;
    std::vector<Shape> shapes_;
};

/// Linear record of operations for reverse-mode differentiation.
///
/// Nodes are appended in execution order; backward() walks them strictly
/// in reverse. A tape is not thread-safe, but distinct tapes share nothing.
template <typename T>
class BasicTape {
public:
    using TensorT = BasicTensor<T>;
    using Grads = std::vector<std::optional<TensorT>>;
    using BackwardFn = std::function<void(const TensorT& grad_out, Grads& grads)>;

    BasicTape() = default;
    // Recorded closures refer back to the tape, so it must stay in place.
    BasicTape(const BasicTape&) = delete;
    BasicTape& operator=(const BasicTape&) = delete;

    Var leaf(TensorT value, bool requires_grad = false)
    {
        nodes_.push_back(Node{std::move(value), requires_grad, {}});
        return Var{nodes_.size() - 1};
    }

    Var constant(TensorT value) { return leaf(std::move(value), false); }

    Var variable(TensorT value) { return leaf(std::move(value), true); }

    /// Record an op result. `backward` is dropped when no input needs grad.
    Var record(TensorT value, bool requires_grad, BackwardFn backward)
    {
        nodes_.push_back(Node{std::move(value), requires_grad, requires_grad ? std::move(backward) : BackwardFn{}});
        return Var{nodes_.size() - 1};
    }

    const TensorT& value(Var v) const { return nodes_.at(v.id).value; }
    bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
    std::size_t size() const { return nodes_.size(); }

    BasicGradients<T> backward(Var loss) const
    {
        if (loss.id >= nodes_.size()) throw ContractError("backward: loss is not on this tape");
        const TensorT& lv = nodes_[loss.id].value;
        if (lv.numel() != 1) {
            throw ContractError("backward: loss must be scalar, got shape " + shape_str(lv.shape()));
        }
        Grads grads(nodes_.size());
        grads[loss.id] = TensorT(lv.shape(), T(1));
        for (std::size_t i = loss.id + 1; i-- > 0;) {
            const Node& n = nodes_[i];
            if (!n.backward || !grads[i]) continue;
            n.backward(*grads[i], grads);
        }
        std::vector<Shape> shapes;
        shapes.reserve(nodes_.size());
        for (const auto& n : nodes_) shapes.push_back(n.value.shape());
        // Only expose gradients of differentiable nodes.
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (!nodes_[i].requires_grad) grads[i].reset();
        }
        return BasicGradients<T>(std::move(grads), std::move(shapes));
    }

    /// Accumulate `g` into slot `v` (used by op backward closures).
    static void accumulate(Grads& grads, Var v, TensorT g)
    {
        auto& slot = grads[v.id];
        if (!slot) {
            slot = std::move(g);
            return;
        }
        for (std::size_t i = 0; i < g.numel(); ++i) (*slot)[i] += g[i];
    }

private:
    struct Node {
        TensorT value;
        bool requires_grad = false;
        BackwardFn backward;
    };

    std::vector<Node> nodes_;
};

using Tape = BasicTape<float>;
using TapeD = BasicTape<double>;
using Gradients = BasicGradients<float>;

// ------------------------------------------------------------------ ops

namespace ag {

template <typename T>
Var add(BasicTape<T>& tape, Var a, Var b)
{
    const auto& av = tape.value(a);
    const auto& bv = tape.value(b);
    require_same_shape(av, bv, "add");
    BasicTensor<T> out = av;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += bv[i];
    const bool rg = tape.requires_grad(a) || tape.requires_grad(b);
    return tape.record(std::move(out), rg, [&tape, a, b](const BasicTensor<T>& g, auto& grads) {
        if (tape.requires_grad(a)) BasicTape<T>::accumulate(grads, a, g);
        if (tape.requires_grad(b)) BasicTape<T>::accumulate(grads, b, g);
    });
}

template <typename T>
Var mul(BasicTape<T>& tape, Var a, Var b)
{
    const auto& av = tape.value(a);
    const auto& bv = tape.value(b);
    require_same_shape(av, bv, "mul");
    BasicTensor<T> out = av;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= bv[i];
    const bool rg = tape.requires_grad(a) || tape.requires_grad(b);
    return tape.record(std::move(out), rg, [&tape, a, b](const BasicTensor<T>& g, auto& grads) {
        const auto& av = tape.value(a);
        const auto& bv = tape.value(b);
        if (tape.requires_grad(a)) {
            BasicTensor<T> ga = g;
            for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] *= bv[i];
            BasicTape<T>::accumulate(grads, a, std::move(ga));
        }
        if (tape.requires_grad(b)) {
            BasicTensor<T> gb = g;
            for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] *= av[i];
            BasicTape<T>::accumulate(grads, b, std::move(gb));
        }
    });
}

template <typename T>
Var scale(BasicTape<T>& tape, Var a, double factor)
{
    BasicTensor<T> out = tape.value(a);
    for (auto& v : out.data()) v = static_cast<T>(v * factor);
    return tape.record(std::move(out), tape.requires_grad(a), [a, factor](const BasicTensor<T>& g, auto& grads) {
        BasicTensor<T> ga = g;
        for (auto& v : ga.data()) v = static_cast<T>(v * factor);
        BasicTape<T>::accumulate(grads, a, std::move(ga));
    });
}

template <typename T>
Var sum(BasicTape<T>& tape, Var a)
{
    double s = 0.0;
    for (T v : tape.value(a).data()) s += v;
    return tape.record(BasicTensor<T>::scalar(static_cast<T>(s)), tape.requires_grad(a),
                       [&tape, a](const BasicTensor<T>& g, auto& grads) {
                           BasicTape<T>::accumulate(grads, a, BasicTensor<T>(tape.value(a).shape(), g[0]));
                       });
}

template <typename T>
Var reshape(BasicTape<T>& tape, Var a, Shape shape)
{
    BasicTensor<T> out = tape.value(a).reshaped(std::move(shape));
    return tape.record(std::move(out), tape.requires_grad(a), [&tape, a](const BasicTensor<T>& g, auto& grads) {
        BasicTape<T>::accumulate(grads, a, g.reshaped(tape.value(a).shape()));
    });
}

/// Flatten [N, ...] to [N, rest].
template <typename T>
Var flatten(BasicTape<T>& tape, Var a)
{
    const auto& s = tape.value(a).shape();
    const std::size_t n = s.at(0);
    return reshape(tape, a, Shape{n, tape.value(a).numel() / n});
}

template <typename T>
Var dense(BasicTape<T>& tape, Var input, Var weights, Var bias)
{
    BasicTensor<T> out = kernels::dense_forward(tape.value(input), tape.value(weights), tape.value(bias));
    const bool rg = tape.requires_grad(input) || tape.requires_grad(weights) || tape.requires_grad(bias);
    return tape.record(std::move(out), rg, [&tape, input, weights, bias](const BasicTensor<T>& g, auto& grads) {
        const bool gp = tape.requires_grad(weights) || tape.requires_grad(bias);
        auto r = kernels::dense_backward(tape.value(input), tape.value(weights), g, tape.requires_grad(input), gp);
        if (tape.requires_grad(input)) BasicTape<T>::accumulate(grads, input, std::move(r.input));
        if (tape.requires_grad(weights)) BasicTape<T>::accumulate(grads, weights, std::move(r.weights));
        if (tape.requires_grad(bias)) BasicTape<T>::accumulate(grads, bias, std::move(r.bias));
    });
}

template <typename T>
Var conv2d(BasicTape<T>& tape, Var input, Var kernel, std::optional<Var> bias, kernels::Conv2dParams p)
{
    const BasicTensor<T>* bv = bias ? &tape.value(*bias) : nullptr;
    BasicTensor<T> out = kernels::conv2d_forward(tape.value(input), tape.value(kernel), bv, p);
    const bool rg = tape.requires_grad(input) || tape.requires_grad(kernel) || (bias && tape.requires_grad(*bias));
    return tape.record(std::move(out), rg, [&tape, input, kernel, bias, p](const BasicTensor<T>& g, auto& grads) {
        const bool gp = tape.requires_grad(kernel) || (bias && tape.requires_grad(*bias));
        auto r = kernels::conv2d_backward(tape.value(input), tape.value(kernel), g, p, tape.requires_grad(input), gp);
        if (tape.requires_grad(input)) BasicTape<T>::accumulate(grads, input, std::move(r.input));
        if (tape.requires_grad(kernel)) BasicTape<T>::accumulate(grads, kernel, std::move(r.kernel));
        if (bias && tape.requires_grad(*bias)) BasicTape<T>::accumulate(grads, *bias, std::move(r.bias));
    });
}

template <typename T>
Var relu(BasicTape<T>& tape, Var a)
{
    BasicTensor<T> out = kernels::relu_forward(tape.value(a));
    return tape.record(std::move(out), tape.requires_grad(a), [&tape, a](const BasicTensor<T>& g, auto& grads) {
        BasicTape<T>::accumulate(grads, a, kernels::relu_backward(tape.value(a), g));
    });
}

template <typename T>
Var maxpool(BasicTape<T>& tape, Var a, std::size_t size)
{
    std::vector<std::size_t> argmax;
    BasicTensor<T> out = kernels::maxpool_forward(tape.value(a), size, &argmax);
    return tape.record(std::move(out), tape.requires_grad(a),
                       [&tape, a, argmax = std::move(argmax)](const BasicTensor<T>& g, auto& grads) {
                           BasicTape<T>::accumulate(grads, a, kernels::maxpool_backward(tape.value(a).shape(), argmax, g));
                       });
}

template <typename T>
Var avgpool(BasicTape<T>& tape, Var a, std::size_t size)
{
    BasicTensor<T> out = kernels::avgpool_forward(tape.value(a), size);
    return tape.record(std::move(out), tape.requires_grad(a), [&tape, a, size](const BasicTensor<T>& g, auto& grads) {
        BasicTape<T>::accumulate(grads, a, kernels::avgpool_backward(tape.value(a).shape(), size, g));
    });
}

template <typename T>
Var softmax(BasicTape<T>& tape, Var logits)
{
    BasicTensor<T> out = kernels::softmax_forward(tape.value(logits));
    const Var self{tape.size()};
    return tape.record(std::move(out), tape.requires_grad(logits), [&tape, logits, self](const BasicTensor<T>& g, auto& grads) {
        BasicTape<T>::accumulate(grads, logits, kernels::softmax_backward(tape.value(self), g));
    });
}

template <typename T>
Var cross_entropy(BasicTape<T>& tape, Var probs, std::vector<std::size_t> labels)
{
    const double v = kernels::cross_entropy_value(tape.value(probs), labels);
    return tape.record(BasicTensor<T>::scalar(static_cast<T>(v)), tape.requires_grad(probs),
                       [&tape, probs, labels = std::move(labels)](const BasicTensor<T>& g, auto& grads) {
                           BasicTape<T>::accumulate(grads, probs, kernels::cross_entropy_backward(tape.value(probs), labels, g[0]));
                       });
}

/// out[i] = input[index[i]], or 0 where index[i] < 0.
template <typename T>
Var gather(BasicTape<T>& tape, Var input, std::vector<long long> index, Shape out_shape)
{
    if (shape_numel(out_shape) != index.size()) {
        throw DimensionError("gather: index length " + std::to_string(index.size()) +
                             " does not match output shape " + shape_str(out_shape));
    }
    const auto& iv = tape.value(input);
    BasicTensor<T> out(out_shape);
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] >= 0) out[i] = iv[static_cast<std::size_t>(index[i])];
    }
    return tape.record(std::move(out), tape.requires_grad(input),
                       [&tape, input, index = std::move(index)](const BasicTensor<T>& g, auto& grads) {
                           BasicTensor<T> gi(tape.value(input).shape());
                           for (std::size_t i = 0; i < index.size(); ++i) {
                               if (index[i] >= 0) gi[static_cast<std::size_t>(index[i])] += g[i];
                           }
                           BasicTape<T>::accumulate(grads, input, std::move(gi));
                       });
}

/// Weighted mixture sum_i softmax(logits)_i * parts[i]. All parts share a shape.
template <typename T>
Var softmax_mix(BasicTape<T>& tape, std::vector<Var> parts, Var logits)
{
    const auto& lv = tape.value(logits);
    if (parts.empty() || lv.numel() != parts.size()) {
        throw DimensionError("softmax_mix: " + std::to_string(parts.size()) + " parts vs " +
                             std::to_string(lv.numel()) + " weight logits");
    }
    // Computed here rather than via softmax_forward so a single part (weight 1) is allowed.
    std::vector<double> weights(lv.numel());
    {
        double m = lv[0], total = 0.0;
        for (std::size_t i = 1; i < lv.numel(); ++i) m = std::max(m, static_cast<double>(lv[i]));
        for (std::size_t i = 0; i < lv.numel(); ++i) total += weights[i] = std::exp(static_cast<double>(lv[i]) - m);
        for (auto& w : weights) w /= total;
    }
    const auto& shape0 = tape.value(parts[0]).shape();
    std::vector<double> acc(shape_numel(shape0), 0.0);
    bool rg = tape.requires_grad(logits);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& pv = tape.value(parts[i]);
        if (pv.shape() != shape0) {
            throw DimensionError("softmax_mix: part shape " + shape_str(pv.shape()) + " vs " + shape_str(shape0));
        }
        const double w = weights[i];
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w * pv[k];
        rg = rg || tape.requires_grad(parts[i]);
    }
    BasicTensor<T> out(shape0, std::vector<T>(acc.begin(), acc.end()));
    return tape.record(std::move(out), rg, [&tape, parts = std::move(parts), logits, weights](const BasicTensor<T>& g, auto& grads) {
        std::vector<double> dots(parts.size(), 0.0);
        for (std::size_t i = 0; i < parts.size(); ++i) {
            const auto& pv = tape.value(parts[i]);
            for (std::size_t k = 0; k < g.numel(); ++k) dots[i] += static_cast<double>(g[k]) * pv[k];
            if (tape.requires_grad(parts[i])) {
                BasicTensor<T> gp = g;
                for (auto& v : gp.data()) v = static_cast<T>(v * weights[i]);
                BasicTape<T>::accumulate(grads, parts[i], std::move(gp));
            }
        }
        if (tape.requires_grad(logits)) {
            double mean = 0.0;
            for (std::size_t i = 0; i < parts.size(); ++i) mean += weights[i] * dots[i];
            BasicTensor<T> gl(tape.value(logits).shape());
            for (std::size_t i = 0; i < parts.size(); ++i) gl[i] = static_cast<T>(weights[i] * (dots[i] - mean));
            BasicTape<T>::accumulate(grads, logits, std::move(gl));
        }
    });
}

} // namespace ag
} // namespace amga
