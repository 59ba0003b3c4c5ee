#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"

#include "amga/numerics/tensor.hpp"

namespace amga::zoo {

struct DatasetSpec {
    std::uint64_t seed = 0;
    std::size_t n_classes = 5;
    std::size_t samples_per_class = 200;
    std::size_t image_size = 32;
    double noise_level = 0.05;

    void validate() const;
    bool operator==(const DatasetSpec&) const = default;
};

void to_json(nlohmann::json& j, const DatasetSpec& s);

/// Procedural labelled images, class-major order (index = class * samples_per_class + k).
/// Index i is a validation sample iff i % 5 == 0.
struct Dataset {
    DatasetSpec spec;
    Tensor images; // [N, 3, S, S] in [0, 1]
    std::vector<std::size_t> labels;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> validation_indices;

    std::size_t size() const { return labels.size(); }

    Tensor train_images() const;
    Tensor validation_images() const;
    std::vector<std::size_t> train_labels() const;
    std::vector<std::size_t> validation_labels() const;
};

Dataset generate_dataset(const DatasetSpec& spec);

/// FNV-1a over images and labels.
std::uint64_t dataset_checksum(const Dataset& d);

/// Write every image as binary PPM plus labels.csv (filename,label).
void export_dataset(const Dataset& d, const std::filesystem::path& dir);

} // namespace amga::zoo
