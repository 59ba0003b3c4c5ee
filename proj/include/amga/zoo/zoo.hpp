#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "amga/zoo/dataset.hpp"
#include "amga/zoo/model.hpp"
#include "amga/zoo/train.hpp"

namespace amga::zoo {

struct ZooConfig {
    DatasetSpec dataset;
    TrainOptions train;
    std::uint64_t base_seed = 1;
    std::vector<std::string> architectures; // empty: every default architecture
};

/// Training seed of the i-th zoo member.
std::uint64_t member_seed(std::uint64_t base_seed, std::size_t index);

/// Train every configured architecture; members train in parallel.
std::vector<ModelRecord> train_zoo(const Dataset& dataset, const ZooConfig& config);

/// Weight files `<name>.amz` plus manifest.json. Returns the manifest.
nlohmann::json write_zoo(const std::filesystem::path& dir, const std::vector<ModelRecord>& models,
                         const DatasetSpec& dataset);

/// Load every model listed in dir/manifest.json, in manifest order.
std::vector<ModelRecord> load_zoo(const std::filesystem::path& dir);

/// Reuse a zoo in `dir` when its manifest matches `config`, otherwise train
/// and write one. Used by the test suites to share a single training run.
std::vector<ModelRecord> load_or_train_zoo(const std::filesystem::path& dir, const ZooConfig& config);

nlohmann::json zoo_config_json(const ZooConfig& config);

} // namespace amga::zoo
