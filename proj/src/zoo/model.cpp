#include "amga/zoo/model.hpp"

#include <cmath>
#include <cstring>

namespace amga::zoo {

std::vector<Tensor> init_weights(const ArchDescriptor& arch, Rng& rng)
{
    arch.validate();
    std::vector<Tensor> weights;
    for (const auto& l : arch.layers) {
        if (l.kind != LayerKind::dense && l.kind != LayerKind::conv) continue;
        const bool conv = l.kind == LayerKind::conv;
        Shape ws = conv ? Shape{l.out, l.in, l.kernel, l.kernel} : Shape{l.in, l.out};
        const double fan_in = conv ? static_cast<double>(l.in * l.kernel * l.kernel) : static_cast<double>(l.in);
        const double std = std::sqrt(2.0 / fan_in);
        Tensor w(ws);
        for (auto& v : w.data()) v = static_cast<float>(std * rng.normal());
        weights.push_back(std::move(w));
        weights.emplace_back(Shape{l.out});
    }
    return weights;
}

void check_weights(const ArchDescriptor& arch, std::span<const Tensor> weights)
{
    const auto shapes = arch.parameter_shapes();
    if (shapes.size() != weights.size()) {
        throw DimensionError("architecture '" + arch.name + "' expects " + std::to_string(shapes.size()) +
                             " parameter tensors, got " + std::to_string(weights.size()));
    }
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        if (weights[i].shape() != shapes[i]) {
            throw DimensionError("architecture '" + arch.name + "' parameter " + std::to_string(i) + ": expected " +
                                 shape_str(shapes[i]) + ", got " + shape_str(weights[i].shape()));
        }
    }
}

namespace {

void check_input(const ArchDescriptor& arch, const Shape& s)
{
    if (s.size() != 4 || s[1] != arch.in_channels || s[2] != arch.in_height || s[3] != arch.in_width) {
        throw DimensionError("model '" + arch.name + "' expects input " + shape_str(arch.input_shape()) +
                             " (any batch), got " + shape_str(s));
    }
}

// Runs layers [0, stop) without a tape.
Tensor run_plain(const ModelRecord& model, const Tensor& images, std::size_t stop, bool valid_padding)
{
    Tensor cur = images;
    std::size_t p = 0;
    for (std::size_t i = 0; i < stop; ++i) {
        const auto& l = model.arch.layers[i];
        switch (l.kind) {
        case LayerKind::conv: {
            kernels::Conv2dParams cp{l.stride, valid_padding ? 0 : l.padding};
            cur = kernels::conv2d_forward(cur, model.weights[p], &model.weights[p + 1], cp);
            p += 2;
            break;
        }
        case LayerKind::dense:
            cur = kernels::dense_forward(cur, model.weights[p], model.weights[p + 1]);
            p += 2;
            break;
        case LayerKind::relu:
            cur = kernels::relu_forward(cur);
            break;
        case LayerKind::maxpool:
            cur = kernels::maxpool_forward(cur, l.window);
            break;
        case LayerKind::avgpool:
            cur = kernels::avgpool_forward(cur, l.window);
            break;
        case LayerKind::flatten: {
            const std::size_t n = cur.dim(0);
            cur = cur.reshaped({n, cur.numel() / n});
            break;
        }
        }
    }
    return cur;
}

std::size_t first_flatten(const ArchDescriptor& arch)
{
    for (std::size_t i = 0; i < arch.layers.size(); ++i) {
        if (arch.layers[i].kind == LayerKind::flatten || arch.layers[i].kind == LayerKind::dense) return i;
    }
    return arch.layers.size();
}

} // namespace

Tensor forward_logits(const ModelRecord& model, const Tensor& images)
{
    check_input(model.arch, images.shape());
    return run_plain(model, images, model.arch.layers.size(), false);
}

Tensor predict_proba(const ModelRecord& model, const Tensor& images)
{
    return kernels::softmax_forward(forward_logits(model, images));
}

std::vector<std::size_t> predict(const ModelRecord& model, const Tensor& images)
{
    return kernels::argmax_rows(forward_logits(model, images));
}

Var forward(Tape& tape, const ArchDescriptor& arch, std::span<const Var> params, Var images)
{
    check_input(arch, tape.value(images).shape());
    Var cur = images;
    std::size_t p = 0;
    for (const auto& l : arch.layers) {
        switch (l.kind) {
        case LayerKind::conv:
            cur = ag::conv2d(tape, cur, params[p], params[p + 1], {l.stride, l.padding});
            p += 2;
            break;
        case LayerKind::dense:
            cur = ag::dense(tape, cur, params[p], params[p + 1]);
            p += 2;
            break;
        case LayerKind::relu:
            cur = ag::relu(tape, cur);
            break;
        case LayerKind::maxpool:
            cur = ag::maxpool(tape, cur, l.window);
            break;
        case LayerKind::avgpool:
            cur = ag::avgpool(tape, cur, l.window);
            break;
        case LayerKind::flatten:
            cur = ag::flatten(tape, cur);
            break;
        }
    }
    return cur;
}

Var forward_constant(Tape& tape, const ModelRecord& model, Var images)
{
    std::vector<Var> params;
    params.reserve(model.weights.size());
    for (const auto& w : model.weights) params.push_back(tape.constant(w));
    return forward(tape, model.arch, params, images);
}

bool has_conv_features(const ArchDescriptor& arch)
{
    const std::size_t stop = first_flatten(arch);
    for (std::size_t i = 0; i < stop; ++i) {
        if (arch.layers[i].kind == LayerKind::conv) return true;
    }
    return false;
}

Tensor conv_features(const ModelRecord& model, const Tensor& images, bool valid_padding)
{
    if (!has_conv_features(model.arch)) {
        throw ConfigError("model '" + model.arch.name + "' has no convolutional feature stack");
    }
    if (images.rank() != 4 || images.dim(1) != model.arch.in_channels) {
        throw DimensionError("conv_features: bad input " + shape_str(images.shape()));
    }
    return run_plain(model, images, first_flatten(model.arch), valid_padding);
}

std::size_t conv_feature_stride(const ArchDescriptor& arch)
{
    std::size_t s = 1;
    const std::size_t stop = first_flatten(arch);
    for (std::size_t i = 0; i < stop; ++i) {
        const auto& l = arch.layers[i];
        if (l.kind == LayerKind::conv) s *= l.stride;
        if (l.kind == LayerKind::maxpool || l.kind == LayerKind::avgpool) s *= l.window;
    }
    return s;
}

AccuracyResult evaluate_accuracy(const ModelRecord& model, const Tensor& images, std::span<const std::size_t> labels,
                                 std::size_t batch)
{
    AccuracyResult r;
    if (labels.empty()) {
        r.empty = true;
        return r;
    }
    if (images.rank() != 4 || images.dim(0) != labels.size()) {
        throw DimensionError("evaluate_accuracy: " + std::to_string(labels.size()) + " labels for images " +
                             shape_str(images.shape()));
    }
    std::size_t correct = 0;
    for (std::size_t start = 0; start < labels.size(); start += batch) {
        const std::size_t end = std::min(labels.size(), start + batch);
        std::vector<std::size_t> idx(end - start);
        for (std::size_t i = start; i < end; ++i) idx[i - start] = i;
        const auto pred = predict(model, gather_images(images, idx));
        for (std::size_t i = start; i < end; ++i) correct += pred[i - start] == labels[i];
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
    return r;
}

Tensor gather_images(const Tensor& images, std::span<const std::size_t> idx)
{
    Shape s = images.shape();
    const std::size_t per = images.numel() / s[0];
    s[0] = idx.size();
    Tensor out(s);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= images.dim(0)) throw IndexError("gather_images: index out of range");
        std::memcpy(out.data().data() + i * per, images.data().data() + idx[i] * per, per * sizeof(float));
    }
    return out;
}

} // namespace amga::zoo
