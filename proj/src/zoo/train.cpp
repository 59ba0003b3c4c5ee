#include "amga/zoo/train.hpp"

#include <cmath>
#include <numeric>

namespace amga::zoo {

ModelRecord train_model(const ArchDescriptor& arch, const Dataset& dataset, std::uint64_t train_seed,
                        const TrainOptions& options)
{
    arch.validate();
    if (dataset.train_indices.empty()) throw ConfigError("train_model: dataset has no training samples");
    if (options.batch_size == 0) throw ConfigError("train_model: batch_size must be positive");

    Rng rng(train_seed);
    ModelRecord record{arch, init_weights(arch, rng), train_seed, 0.0};

    std::vector<std::size_t> order = dataset.train_indices;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        shuffle(order, rng);
        for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
            const std::size_t end = std::min(order.size(), start + options.batch_size);
            std::span<const std::size_t> idx(order.data() + start, end - start);
            std::vector<std::size_t> labels;
            labels.reserve(idx.size());
            for (auto i : idx) labels.push_back(dataset.labels[i]);

            Tape tape;
            std::vector<Var> params;
            for (const auto& w : record.weights) params.push_back(tape.variable(w));
            const Var x = tape.constant(gather_images(dataset.images, idx));
            const Var probs = ag::softmax(tape, forward(tape, arch, params, x));
            const Var loss = ag::cross_entropy(tape, probs, labels);
            const double lv = tape.value(loss)[0];
            if (!std::isfinite(lv)) {
                throw TrainingError("training '" + arch.name + "' diverged (non-finite loss) in epoch " +
                                    std::to_string(epoch + 1));
            }
            const auto grads = tape.backward(loss);
            for (std::size_t p = 0; p < params.size(); ++p) {
                const Tensor g = grads.of(params[p]);
                auto& w = record.weights[p];
                for (std::size_t i = 0; i < w.numel(); ++i) {
                    w[i] = static_cast<float>(w[i] - options.learning_rate * g[i]);
                }
            }
        }
        for (const auto& w : record.weights) {
            if (!w.all_finite()) {
                throw TrainingError("training '" + arch.name + "' diverged (non-finite weights) in epoch " +
                                    std::to_string(epoch + 1));
            }
        }
    }
    record.clean_accuracy =
        evaluate_accuracy(record, dataset.validation_images(), dataset.validation_labels()).accuracy;
    return record;
}

} // namespace amga::zoo
