#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "amga/numerics/tensor.hpp"
#include "amga/track/box.hpp"

namespace amga::track {

enum class Motion { linear, sinusoidal, random_walk };

std::string to_string(Motion m);
Motion motion_from_string(const std::string& s);

inline constexpr std::size_t kTemplateSize = 32;

struct SequenceSpec {
    std::string name = "seq";
    std::uint64_t seed = 0;
    std::size_t length = 60;
    std::size_t frame_size = 96;   // square frames, 3 channels
    std::size_t target_class = 0;
    std::size_t n_classes = 5;     // classes available for distractors
    Motion motion = Motion::linear;
    double speed = 0.6;            // px/frame (linear), step std-dev (random walk)
    double amplitude = 10.0;       // px (sinusoidal)
    double occlusion_prob = 0.0;
    double scale_drift = 0.0;      // relative size change per frame
    std::size_t distractors = 2;
    double noise_level = 0.05;

    void validate() const;
    bool operator==(const SequenceSpec&) const = default;
};

void to_json(nlohmann::json& j, const SequenceSpec& s);
/// Overlay keys onto `s`; unknown keys throw ConfigError.
void merge_json(const nlohmann::json& j, SequenceSpec& s);

struct Sequence {
    SequenceSpec spec;
    std::vector<Tensor> frames;   // [3, S, S] each, values in [0, 1]
    std::vector<Box> boxes;       // ground truth per frame
    std::vector<bool> occluded;   // occluder drawn on this frame
};

/// Deterministic render. Frame 0's box is exactly 32x32 at integer
/// coordinates; frames >= 1 may carry an occluder over at most 60% of the target.
Sequence generate_sequence(const SequenceSpec& spec);

/// Same spec with occlusion disabled but otherwise identical random streams.
Sequence generate_sequence_without_occlusion(const SequenceSpec& spec);

std::uint64_t frame_checksum(const Tensor& frame);

/// Single static, unoccluded sequence without distractors.
SequenceSpec easy_sequence(std::uint64_t seed = 1);

/// Twenty sequences cycling target class, motion model, occlusion and drift.
std::vector<SequenceSpec> default_suite(std::uint64_t base_seed = 1);

/// frames/frame_0000.ppm ... plus groundtruth.csv (frame,x,y,w,h).
void export_sequence(const Sequence& seq, const std::filesystem::path& dir);

} // namespace amga::track
