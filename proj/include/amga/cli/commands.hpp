#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "amga/cli/config.hpp"

namespace amga::cli {

/// Resolve `p` against `workdir` unless it is absolute.
std::filesystem::path resolve(const std::filesystem::path& workdir, const std::filesystem::path& p);

/// Process exit code for an exception: 2 config, 3 I/O, 4 numeric, 1 otherwise.
int exit_code_for(const std::exception& e);

// ---------------------------------------------------------------- attack

struct ModelAccuracy {
    std::string name;
    double clean = 0.0;
    double attacked = 0.0;
    double drop = 0.0; // clean - attacked
    std::size_t held_in = 0;  // episodes where the model was a training model
    std::size_t held_out = 0; // episodes where it was the unseen test model
};

struct AccuracyDrop {
    double clean = 0.0;
    double attacked = 0.0;
    double drop = 0.0;
};

struct AttackEpisode {
    std::size_t image = 0; // dataset index
    std::size_t label = 0;
    std::uint64_t seed = 0;
    zoo::TaskSplit split;
    bool held_in_clean = false, held_in_attacked = false;
    bool held_out_clean = false, held_out_attacked = false, held_out_noise = false;
    double psnr = 0.0, ssim = 1.0;
    engine::AttackResult result;
};

struct AttackEvaluation {
    std::vector<AttackEpisode> episodes;
    std::vector<ModelAccuracy> per_model;
    AccuracyDrop held_in;          // uniform ensemble of each episode's training models
    AccuracyDrop held_out;         // each episode's unseen test model
    AccuracyDrop held_out_noise;   // same models under equal-budget random noise
    double mean_psnr = 0.0, mean_ssim = 1.0;
};

/// Attack the first `images` validation images one at a time (seed derived
/// from config.seed and the position in the batch) and score every model.
AttackEvaluation evaluate_attack(const std::vector<zoo::ModelRecord>& repo, const zoo::Dataset& dataset,
                                 const engine::AttackConfig& config, std::size_t images);

nlohmann::json to_json(const AttackEvaluation& e);

// ---------------------------------------------------------------- ablation

struct AblationRow {
    std::string name;
    double success_rate = 0.0, success_drop = 0.0;
    double precision = 0.0, precision_drop = 0.0;
    double psnr = 0.0, ssim = 1.0;
};

struct AblationTable {
    std::vector<AblationRow> components; // no-attack ... -smoothing
    std::vector<AblationRow> sigmas;     // one per sigma
    std::vector<double> sigma_values;
};

/// Attack configuration of a named component row, derived from `base`.
engine::AttackConfig ablation_variant(const std::string& row, const engine::AttackConfig& base);
const std::vector<std::string>& ablation_rows();

AblationTable run_ablation(const std::vector<track::SequenceSpec>& specs, const track::BenchmarkSetup& setup,
                           const engine::AttackConfig& base, const std::vector<double>& sigmas);

std::string ablation_csv(const AblationTable& t);
std::string sigma_csv(const AblationTable& t);

// ---------------------------------------------------------------- report

struct Curves {
    std::vector<std::string> conditions;
    std::vector<double> thresholds;
    std::vector<std::vector<double>> values; // [condition][threshold]
};

/// Mean over sequences of each sequence's success curve, from per_frame.csv text.
Curves success_curves_from_csv(const std::string& per_frame_csv);
/// Same for precision against centre-error thresholds 0..50 px.
Curves precision_curves_from_csv(const std::string& per_frame_csv);
std::string curves_csv(const Curves& c);

// ---------------------------------------------------------------- commands

void cmd_zoo_train(const RunConfig& config, const std::filesystem::path& workdir);
void cmd_attack(const RunConfig& config, const std::filesystem::path& workdir);
void cmd_track_eval(const RunConfig& config, const std::filesystem::path& workdir);
void cmd_ablate(const RunConfig& config, const std::filesystem::path& workdir);
void cmd_report(const std::filesystem::path& in, const std::filesystem::path& out);

} // namespace amga::cli
