#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "amga/engine/attack.hpp"
#include "amga/track/metrics.hpp"
#include "amga/track/sequence.hpp"
#include "amga/track/tracker.hpp"

namespace amga::track {

enum class Condition { clean, random_noise, amga };

std::string to_string(Condition c);
Condition condition_from_string(const std::string& s);
std::vector<Condition> all_conditions();

struct AttackedSequence {
    Sequence sequence;
    std::size_t pseudo_label = 0;
    double psnr = 0.0;   // on the template crop; +inf when untouched
    double ssim = 1.0;
    zoo::TaskSplit split; // meaningful for the amga condition only
};

/// Label the clean template crop with the uniform ensemble of `attack_repo`.
std::size_t pseudo_label(const Tensor& crop, const std::vector<zoo::ModelRecord>& attack_repo);

/// Perturb the 32x32 box crop of frame 0 and paste it back; later frames are
/// shared untouched. `config.seed` seeds the episode as given.
AttackedSequence attack_initial_frame(const Sequence& seq, const std::vector<zoo::ModelRecord>& attack_repo,
                                      const engine::AttackConfig& config, Condition condition);

/// Initialise on frame 0's ground truth and step through every later frame.
TrackRun track_sequence(const Sequence& seq, const zoo::ModelRecord& feature_model);

/// Frame 0 of the (possibly attacked) sequence initialises the tracker.
TrackRun track_sequence(const Sequence& seq, const zoo::ModelRecord& feature_model, const Tensor& init_frame);

struct EpisodeRow {
    std::string sequence;
    Condition condition = Condition::clean;
    TrackMetrics metrics;
    double psnr = 0.0;
    double ssim = 1.0;
    std::size_t pseudo_label = 0;
    TrackRun run;
};

struct ConditionSummary {
    Condition condition = Condition::clean;
    TrackMetrics mean;
    double mean_psnr = 0.0; // over finite values; +inf when all are infinite
    double mean_ssim = 1.0;
};

struct BenchmarkReport {
    std::vector<EpisodeRow> rows;              // sequence-major, conditions in request order
    std::vector<ConditionSummary> summaries;   // one per requested condition
    std::string tracker_model;
    std::vector<std::string> attack_models;

    const ConditionSummary& summary(Condition c) const;
};

struct BenchmarkSetup {
    const zoo::ModelRecord* feature_model = nullptr;
    std::vector<zoo::ModelRecord> attack_repo;
};

/// Tracker model by name; the attack repository is every other model.
BenchmarkSetup split_repository(const std::vector<zoo::ModelRecord>& repo, const std::string& tracker_model);

/// Attack seed of one sequence.
std::uint64_t sequence_attack_seed(std::uint64_t base_seed, const SequenceSpec& spec);

/// Track every sequence under every condition. Sequences run in parallel;
/// output order is fixed.
BenchmarkReport run_benchmark(const std::vector<SequenceSpec>& specs, const BenchmarkSetup& setup,
                              const engine::AttackConfig& config, const std::vector<Condition>& conditions);

/// sequence,condition,metric,value rows.
std::string benchmark_csv(const BenchmarkReport& report);
/// sequence,condition,frame,iou,center_error,low_confidence rows.
std::string per_frame_csv(const BenchmarkReport& report);
/// Per-condition means and drops relative to clean.
nlohmann::json benchmark_summary(const BenchmarkReport& report);

} // namespace amga::track
