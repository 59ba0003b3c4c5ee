#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "amga/numerics/autograd.hpp"
#include "amga/numerics/rng.hpp"
#include "amga/zoo/arch.hpp"

namespace amga::zoo {

/// One trained member of the repository. Immutable once trained.
struct ModelRecord {
    ArchDescriptor arch;
    std::vector<Tensor> weights;
    std::uint64_t train_seed = 0;
    double clean_accuracy = 0.0;

    const std::string& name() const { return arch.name; }
};

/// He-normal kernels and weights, zero biases.
std::vector<Tensor> init_weights(const ArchDescriptor& arch, Rng& rng);

/// Throws DimensionError unless `weights` matches the architecture's parameter shapes.
void check_weights(const ArchDescriptor& arch, std::span<const Tensor> weights);

/// Logits for a batch [N, C, H, W] without recording a tape.
Tensor forward_logits(const ModelRecord& model, const Tensor& images);

/// Class probabilities (softmax of logits).
Tensor predict_proba(const ModelRecord& model, const Tensor& images);

std::vector<std::size_t> predict(const ModelRecord& model, const Tensor& images);

/// Record the forward pass on `tape`. `params` holds one Var per parameter
/// tensor in ArchDescriptor::parameter_shapes() order.
Var forward(Tape& tape, const ArchDescriptor& arch, std::span<const Var> params, Var images);

/// Push the weights as constants and record logits for `images`.
Var forward_constant(Tape& tape, const ModelRecord& model, Var images);

/// Convolutional feature map: every layer up to (excluding) the first
/// flatten. With `valid_padding` every conv runs with zero padding, which
/// makes the map of a large region sliceable into the maps of its sub-crops.
Tensor conv_features(const ModelRecord& model, const Tensor& images, bool valid_padding);

/// Total spatial stride of the conv_features() stack.
std::size_t conv_feature_stride(const ArchDescriptor& arch);

bool has_conv_features(const ArchDescriptor& arch);

struct AccuracyResult {
    double accuracy = 0.0;
    bool empty = false; // set when evaluated on zero images (accuracy defined as 0)
};

/// Fraction of argmax-correct predictions; argmax ties go to the lowest class.
AccuracyResult evaluate_accuracy(const ModelRecord& model, const Tensor& images,
                                 std::span<const std::size_t> labels, std::size_t batch = 100);

/// Extract images [idx...] from a batch tensor.
Tensor gather_images(const Tensor& images, std::span<const std::size_t> idx);

} // namespace amga::zoo
