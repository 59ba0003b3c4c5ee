#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "amga/engine/config.hpp"
#include "amga/track/benchmark.hpp"
#include "amga/zoo/zoo.hpp"

namespace amga::cli {

struct ZooSection {
    std::string dir = "zoo";
    zoo::ZooConfig config;
};

struct AttackEvalSection {
    std::size_t images = 100;           // validation images attacked
    std::size_t export_examples = 8;    // adversarial PPMs and perturbation files written
    std::string output_dir = "attack";
};

struct TrackSection {
    std::string tracker_model = "conv3x3";
    std::uint64_t suite_seed = 1;
    std::vector<track::SequenceSpec> sequences;     // empty: the default 20-sequence suite
    std::vector<track::Condition> conditions = track::all_conditions();
    std::string output_dir = "track";
    bool export_sequences = false;

    std::vector<track::SequenceSpec> resolved_sequences() const;
};

struct AblateSection {
    std::string output_dir = "ablate";
    std::vector<double> sigmas = {0.5, 1.0, 2.0};
};

/// One JSON document configuring every command. Each command reads its sections.
struct RunConfig {
    ZooSection zoo;
    engine::AttackConfig attack;
    AttackEvalSection attack_eval;
    TrackSection track;
    AblateSection ablate;

    void validate() const;
};

/// Parse over the defaults. Unknown keys at any level throw ConfigError naming the key path.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Every field, defaults included.
nlohmann::json to_json(const RunConfig& c);

} // namespace amga::cli
