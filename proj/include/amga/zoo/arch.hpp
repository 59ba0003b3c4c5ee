#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "amga/numerics/tensor.hpp"

namespace amga::zoo {

enum class LayerKind { dense, conv, relu, avgpool, maxpool, flatten };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    std::size_t in = 0;      // dense inputs / conv input channels
    std::size_t out = 0;     // dense outputs / conv output channels
    std::size_t kernel = 0;  // conv kernel side
    std::size_t stride = 1;  // conv stride
    std::size_t padding = 0; // conv zero padding
    std::size_t window = 0;  // pooling window (stride == window)

    static LayerSpec dense(std::size_t in, std::size_t out) { return {LayerKind::dense, in, out}; }
    static LayerSpec conv(std::size_t in, std::size_t out, std::size_t k, std::size_t stride, std::size_t pad)
    {
        return {LayerKind::conv, in, out, k, stride, pad};
    }
    static LayerSpec relu() { return {LayerKind::relu}; }
    static LayerSpec flatten() { return {LayerKind::flatten}; }
    static LayerSpec maxpool(std::size_t w) { return {LayerKind::maxpool, 0, 0, 0, 1, 0, w}; }
    static LayerSpec avgpool(std::size_t w) { return {LayerKind::avgpool, 0, 0, 0, 1, 0, w}; }

    bool operator==(const LayerSpec&) const = default;
};

/// Architecture of one classifier in the repository.
struct ArchDescriptor {
    std::string name;
    std::string family;
    std::size_t in_channels = 3;
    std::size_t in_height = 32;
    std::size_t in_width = 32;
    std::size_t n_classes = 5;
    std::vector<LayerSpec> layers;

    Shape input_shape(std::size_t batch = 1) const { return {batch, in_channels, in_height, in_width}; }

    /// Shapes of the trainable tensors in storage order (kernel/weights then bias per layer).
    std::vector<Shape> parameter_shapes() const;

    std::size_t parameter_count() const;

    /// Shape inference over the layer list; throws ConfigError on any
    /// inconsistency or when the final output is not n_classes logits.
    void validate() const;

    bool operator==(const ArchDescriptor&) const = default;
};

void to_json(nlohmann::json& j, const ArchDescriptor& a);
void from_json(const nlohmann::json& j, ArchDescriptor& a);

/// The default repository: six architectures over four families with
/// pairwise distinct parameter counts.
std::vector<ArchDescriptor> default_architectures(std::size_t n_classes = 5, std::size_t image_size = 32);

/// Look up a default architecture by name; throws ConfigError when unknown.
ArchDescriptor default_architecture(const std::string& name, std::size_t n_classes = 5, std::size_t image_size = 32);

} // namespace amga::zoo
