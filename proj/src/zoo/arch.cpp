#include "amga/zoo/arch.hpp"

#include "amga/numerics/kernels.hpp"

namespace amga::zoo {

std::string to_string(LayerKind kind)
{
    switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv: return "conv";
    case LayerKind::relu: return "relu";
    case LayerKind::avgpool: return "avgpool";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::flatten: return "flatten";
    }
    return "?";
}

LayerKind layer_kind_from_string(const std::string& name)
{
    for (auto k : {LayerKind::dense, LayerKind::conv, LayerKind::relu, LayerKind::avgpool, LayerKind::maxpool,
                   LayerKind::flatten}) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("unknown layer kind '" + name + "'");
}

std::vector<Shape> ArchDescriptor::parameter_shapes() const
{
    std::vector<Shape> shapes;
    for (const auto& l : layers) {
        if (l.kind == LayerKind::dense) {
            shapes.push_back({l.in, l.out});
            shapes.push_back({l.out});
        } else if (l.kind == LayerKind::conv) {
            shapes.push_back({l.out, l.in, l.kernel, l.kernel});
            shapes.push_back({l.out});
        }
    }
    return shapes;
}

std::size_t ArchDescriptor::parameter_count() const
{
    std::size_t n = 0;
    for (const auto& s : parameter_shapes()) n += shape_numel(s);
    return n;
}

void ArchDescriptor::validate() const
{
    auto fail = [this](const std::string& msg) { throw ConfigError("architecture '" + name + "': " + msg); };
    if (layers.empty()) fail("no layers");
    if (n_classes < 1) fail("n_classes must be positive");
    Shape cur{in_channels, in_height, in_width};
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        const std::string at = "layer " + std::to_string(i) + " (" + to_string(l.kind) + ")";
        switch (l.kind) {
        case LayerKind::conv:
            if (cur.size() != 3) fail(at + " expects a spatial input");
            if (l.in != cur[0]) fail(at + " expects " + std::to_string(l.in) + " channels, got " + std::to_string(cur[0]));
            if (l.kernel % 2 == 0 || l.kernel == 0) fail(at + " kernel must be odd");
            if (l.stride == 0) fail(at + " stride must be positive");
            if (cur[1] + 2 * l.padding < l.kernel || cur[2] + 2 * l.padding < l.kernel) fail(at + " kernel larger than input");
            cur = {l.out, kernels::conv_out_size(cur[1], l.kernel, l.stride, l.padding),
                   kernels::conv_out_size(cur[2], l.kernel, l.stride, l.padding)};
            break;
        case LayerKind::maxpool:
        case LayerKind::avgpool:
            if (cur.size() != 3 || l.window == 0 || cur[1] < l.window || cur[2] < l.window) fail(at + " bad pooling window");
            cur = {cur[0], cur[1] / l.window, cur[2] / l.window};
            break;
        case LayerKind::flatten:
            cur = {shape_numel(cur)};
            break;
        case LayerKind::dense:
            if (cur.size() != 1) fail(at + " requires a flattened input");
            if (l.in != cur[0]) fail(at + " expects " + std::to_string(l.in) + " inputs, got " + std::to_string(cur[0]));
            cur = {l.out};
            break;
        case LayerKind::relu:
            break;
        }
    }
    if (cur.size() != 1 || cur[0] != n_classes) {
        fail("final output " + shape_str(cur) + " is not " + std::to_string(n_classes) + " logits");
    }
}

void to_json(nlohmann::json& j, const ArchDescriptor& a)
{
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : a.layers) {
        nlohmann::json lj{{"kind", to_string(l.kind)}};
        switch (l.kind) {
        case LayerKind::dense:
            lj["in"] = l.in;
            lj["out"] = l.out;
            break;
        case LayerKind::conv:
            lj["in"] = l.in;
            lj["out"] = l.out;
            lj["kernel"] = l.kernel;
            lj["stride"] = l.stride;
            lj["padding"] = l.padding;
            break;
        case LayerKind::maxpool:
        case LayerKind::avgpool:
            lj["window"] = l.window;
            break;
        default:
            break;
        }
        layers.push_back(std::move(lj));
    }
    j = nlohmann::json{{"name", a.name},
                       {"family", a.family},
                       {"input", {a.in_channels, a.in_height, a.in_width}},
                       {"n_classes", a.n_classes},
                       {"layers", std::move(layers)}};
}

void from_json(const nlohmann::json& j, ArchDescriptor& a)
{
    try {
        a.name = j.at("name").get<std::string>();
        a.family = j.at("family").get<std::string>();
        const auto& in = j.at("input");
        a.in_channels = in.at(0).get<std::size_t>();
        a.in_height = in.at(1).get<std::size_t>();
        a.in_width = in.at(2).get<std::size_t>();
        a.n_classes = j.at("n_classes").get<std::size_t>();
        a.layers.clear();
        for (const auto& lj : j.at("layers")) {
            LayerSpec l;
            l.kind = layer_kind_from_string(lj.at("kind").get<std::string>());
            l.in = lj.value("in", std::size_t{0});
            l.out = lj.value("out", std::size_t{0});
            l.kernel = lj.value("kernel", std::size_t{0});
            l.stride = lj.value("stride", std::size_t{1});
            l.padding = lj.value("padding", std::size_t{0});
            l.window = lj.value("window", std::size_t{0});
            a.layers.push_back(l);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed architecture descriptor: ") + e.what());
    }
}

std::vector<ArchDescriptor> default_architectures(std::size_t n_classes, std::size_t image_size)
{
    if (image_size % 4 != 0) throw ConfigError("default zoo requires image_size divisible by 4");
    const std::size_t q = image_size / 4;
    const std::size_t flat_in = 3 * image_size * image_size;
    using L = LayerSpec;
    auto make = [&](std::string name, std::string family, std::vector<LayerSpec> layers) {
        ArchDescriptor a{std::move(name), std::move(family), 3, image_size, image_size, n_classes, std::move(layers)};
        a.validate();
        return a;
    };
    return {
        make("conv3x3", "conv",
             {L::conv(3, 8, 3, 1, 1), L::relu(), L::maxpool(2), L::conv(8, 16, 3, 1, 1), L::relu(), L::maxpool(2),
              L::flatten(), L::dense(16 * q * q, n_classes)}),
        make("conv5x5", "conv",
             {L::conv(3, 8, 5, 1, 2), L::relu(), L::maxpool(2), L::conv(8, 12, 5, 1, 2), L::relu(), L::maxpool(2),
              L::flatten(), L::dense(12 * q * q, n_classes)}),
        make("strided", "strided_conv",
             {L::conv(3, 12, 3, 2, 1), L::relu(), L::conv(12, 16, 3, 2, 1), L::relu(), L::flatten(),
              L::dense(16 * q * q, n_classes)}),
        make("avgpool", "avgpool_conv",
             {L::conv(3, 6, 3, 1, 1), L::relu(), L::avgpool(2), L::conv(6, 12, 3, 1, 1), L::relu(), L::avgpool(2),
              L::flatten(), L::dense(12 * q * q, 32), L::relu(), L::dense(32, n_classes)}),
        make("mlp_deep", "mlp",
             {L::flatten(), L::dense(flat_in, 48), L::relu(), L::dense(48, 48), L::relu(), L::dense(48, 48), L::relu(),
              L::dense(48, n_classes)}),
        make("mlp_wide", "mlp", {L::flatten(), L::dense(flat_in, 256), L::relu(), L::dense(256, n_classes)}),
    };
}

ArchDescriptor default_architecture(const std::string& name, std::size_t n_classes, std::size_t image_size)
{
    for (auto& a : default_architectures(n_classes, image_size)) {
        if (a.name == name) return a;
    }
    throw ConfigError("unknown architecture '" + name + "'");
}

} // namespace amga::zoo
