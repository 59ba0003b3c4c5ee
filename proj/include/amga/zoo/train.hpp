#pragma once

#include <cstdint>

#include "amga/zoo/dataset.hpp"
#include "amga/zoo/model.hpp"

namespace amga::zoo {

/// Fixed schedule: plain minibatch SGD, no momentum, no augmentation.
struct TrainOptions {
    std::size_t epochs = 15;
    std::size_t batch_size = 32;
    double learning_rate = 0.05;
};

/// Train on the dataset's training split and record validation accuracy.
/// Deterministic per (arch, dataset, train_seed, options). Throws
/// TrainingError naming the epoch when the loss becomes non-finite.
ModelRecord train_model(const ArchDescriptor& arch, const Dataset& dataset, std::uint64_t train_seed,
                        const TrainOptions& options = {});

} // namespace amga::zoo
