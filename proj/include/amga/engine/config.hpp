#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace amga::engine {

enum class SmoothingMode { none, final_only, every_iteration };
enum class StepSchedule { cosine, constant };

std::string to_string(SmoothingMode m);
std::string to_string(StepSchedule s);
SmoothingMode smoothing_mode_from_string(const std::string& s);
StepSchedule step_schedule_from_string(const std::string& s);

/// Every hyperparameter of one attack episode.
struct AttackConfig {
    double alpha = 0.01;            // sign-step size
    double mu = 0.9;                // momentum decay
    double sigma = 1.0;             // Gaussian smoothing std-dev, pixels
    double epsilon = 8.0 / 255.0;   // L-inf budget
    std::size_t K = 10;             // meta-training iterations
    std::size_t n = 3;              // models per meta-training ensemble
    double diversity_prob = 0.5;
    double diversity_scale_min = 0.875;
    SmoothingMode smoothing_mode = SmoothingMode::final_only;
    StepSchedule step_schedule = StepSchedule::cosine;
    bool meta_test = true;
    bool learn_beta = true;
    double beta_rate = 0.1;
    bool shared_perturbation = false; // one delta for the whole batch
    std::uint64_t seed = 0;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    /// Step size for iteration k in [0, K). Cosine decay runs from alpha
    /// towards alpha/4; the constant schedule always returns alpha.
    double step_size(std::size_t k) const;

    bool operator==(const AttackConfig&) const = default;
};

void to_json(nlohmann::json& j, const AttackConfig& c);

/// Overlay the keys present in `j` onto `c`; unknown keys throw ConfigError.
void merge_json(const nlohmann::json& j, AttackConfig& c);

} // namespace amga::engine
