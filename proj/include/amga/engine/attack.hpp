#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "amga/engine/config.hpp"
#include "amga/engine/ensemble.hpp"
#include "amga/engine/gaussian.hpp"
#include "amga/zoo/task.hpp"

namespace amga::engine {

/// Mutable state of one meta-training episode.
struct PerturbationState {
    Tensor delta;
    Tensor momentum;
    std::size_t iteration = 0;
    std::vector<double> beta_logits;

    /// Zero delta and momentum of `shape`, uniform weights over `n_models`.
    static PerturbationState zeros(const Shape& shape, std::size_t n_models);
};

/// m <- mu * m + g / ||g||_1 (global L1 norm; zero when the norm is below 1e-12).
PerturbationState momentum_update(PerturbationState state, const Tensor& gradient, double mu);

/// delta <- clamp(delta + step * sign(m), -epsilon, epsilon), sign(0) = 0.
PerturbationState perturbation_step(PerturbationState state, double step, double epsilon);

struct MetaTrainResult {
    Tensor delta_train;
    std::vector<double> loss_trace;
    std::vector<double> beta_logits;
    std::vector<std::vector<double>> beta_weights;   // simplex weights after each iteration
    std::vector<double> direction_changes;           // cosine distance of consecutive sign(m) maps
};

/// K iterations of diversity -> ensemble loss at x + delta -> momentum -> sign step.
/// With config.shared_perturbation the returned delta has batch size 1.
/// Throws AttackError naming the iteration when the loss stops being finite.
MetaTrainResult meta_train(const Tensor& x, std::span<const std::size_t> labels, ModelList train_models,
                           const AttackConfig& config, Rng& rng);

/// delta_train + alpha * sign(grad of the held-out loss at x + delta_train), projected.
Tensor meta_test_refine(const Tensor& x, std::span<const std::size_t> labels, const Tensor& delta_train,
                        const zoo::ModelRecord& test_model, const AttackConfig& config);

struct AttackResult {
    Tensor delta_train;
    Tensor delta_test;
    Tensor delta_smoothed;
    Tensor adversarial_example;
    std::vector<double> loss_trace;
    std::vector<double> beta_weights;
    std::vector<double> direction_changes;
    zoo::TaskSplit split;
    AttackConfig config_echo;
};

/// x + delta, broadcasting a batch-1 delta over the batch, clipped to [0, 1].
Tensor apply_perturbation(const Tensor& x, const Tensor& delta);

/// Smooth (unless disabled), re-project and compose the adversarial example.
AttackResult compose_adversarial(const Tensor& x, const Tensor& delta_test, const AttackConfig& config);

/// Full episode on a repository: sample task, meta-train, meta-test, compose.
/// Deterministic per config.seed.
AttackResult run_amga(const Tensor& x, std::span<const std::size_t> labels, const std::vector<zoo::ModelRecord>& repo,
                      const AttackConfig& config);

enum class BaselineKind { random_noise, fgsm, ifgsm, mim };

std::string to_string(BaselineKind k);
BaselineKind baseline_from_string(const std::string& s);

/// Single-model reference attacks; returns the clipped adversarial example.
/// random_noise draws Gaussian noise from Rng(config.seed) rescaled to max |.| = epsilon.
Tensor baseline_attack(BaselineKind kind, const Tensor& x, std::span<const std::size_t> labels,
                       const zoo::ModelRecord& model, const AttackConfig& config);

inline constexpr const char* kPerturbationMagic = "AMGADLT1";

void save_perturbation(const std::filesystem::path& path, const Tensor& delta, const nlohmann::json& header);
Tensor load_perturbation(const std::filesystem::path& path);

} // namespace amga::engine
