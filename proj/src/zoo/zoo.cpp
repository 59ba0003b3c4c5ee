#include "amga/zoo/zoo.hpp"

#include <fstream>
#include <iostream>

#include "amga/numerics/rng.hpp"
#include "amga/util/parallel.hpp"
#include "amga/util/tensor_file.hpp"
#include "amga/zoo/model_io.hpp"

namespace amga::zoo {

std::uint64_t member_seed(std::uint64_t base_seed, std::size_t index)
{
    return Rng::derive(base_seed, index + 1);
}

std::vector<ModelRecord> train_zoo(const Dataset& dataset, const ZooConfig& config)
{
    std::vector<ArchDescriptor> archs;
    if (config.architectures.empty()) {
        archs = default_architectures(dataset.spec.n_classes, dataset.spec.image_size);
    } else {
        for (const auto& name : config.architectures) {
            archs.push_back(default_architecture(name, dataset.spec.n_classes, dataset.spec.image_size));
        }
    }
    std::vector<ModelRecord> models(archs.size());
    util::parallel_for(archs.size(), [&](std::size_t i) {
        models[i] = train_model(archs[i], dataset, member_seed(config.base_seed, i), config.train);
    });
    return models;
}

nlohmann::json zoo_config_json(const ZooConfig& config)
{
    std::vector<std::string> archs = config.architectures;
    if (archs.empty()) {
        for (const auto& a : default_architectures(config.dataset.n_classes, config.dataset.image_size)) archs.push_back(a.name);
    }
    return {{"dataset", config.dataset},
            {"train", {{"epochs", config.train.epochs},
                       {"batch_size", config.train.batch_size},
                       {"learning_rate", config.train.learning_rate}}},
            {"base_seed", config.base_seed},
            {"architectures", archs}};
}

nlohmann::json write_zoo(const std::filesystem::path& dir, const std::vector<ModelRecord>& models,
                         const DatasetSpec& dataset)
{
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& m : models) {
        const std::string file = m.name() + ".amz";
        const std::string bytes = encode_model(m);
        util::write_file(dir / file, bytes);
        entries.push_back({{"name", m.name()},
                           {"family", m.arch.family},
                           {"file", file},
                           {"train_seed", m.train_seed},
                           {"clean_accuracy", m.clean_accuracy},
                           {"parameter_count", m.arch.parameter_count()},
                           {"file_crc32", util::crc32_hex(std::string_view(bytes).substr(0, bytes.size() - 4))}});
    }
    nlohmann::json manifest{{"dataset", dataset}, {"models", entries}};
    util::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    return manifest;
}

std::vector<ModelRecord> load_zoo(const std::filesystem::path& dir)
{
    const auto path = dir / "manifest.json";
    if (!std::filesystem::exists(path)) throw ConfigError("zoo manifest not found: " + path.string());
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(util::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed zoo manifest " + path.string() + ": " + e.what());
    }
    std::vector<ModelRecord> models;
    for (const auto& e : manifest.at("models")) models.push_back(load_model(dir / e.at("file").get<std::string>()));
    if (models.empty()) throw ConfigError("zoo manifest lists no models: " + path.string());
    return models;
}

std::vector<ModelRecord> load_or_train_zoo(const std::filesystem::path& dir, const ZooConfig& config)
{
    const auto stamp_path = dir / "zoo_config.json";
    const std::string stamp = zoo_config_json(config).dump();
    if (std::filesystem::exists(stamp_path) && std::filesystem::exists(dir / "manifest.json")) {
        try {
            if (util::read_file(stamp_path) == stamp) return load_zoo(dir);
        } catch (const std::exception& e) {
            std::cerr << "zoo cache unusable (" << e.what() << "), retraining\n";
        }
    }
    const Dataset dataset = generate_dataset(config.dataset);
    auto models = train_zoo(dataset, config);
    write_zoo(dir, models, config.dataset);
    util::write_file(stamp_path, stamp);
    return models;
}

} // namespace amga::zoo
