#pragma once

#include <vector>

#include "amga/numerics/rng.hpp"
#include "amga/zoo/model.hpp"

namespace amga::zoo {

/// Meta-learning task: n models for meta-training plus one unseen model for
/// meta-testing. Models are referenced by index into the repository.
struct TaskSplit {
    std::vector<std::size_t> train_models;
    std::size_t test_model = 0;

    std::size_t n() const { return train_models.size(); }
};

/// Uniform sample of n + 1 distinct repository indices without replacement;
/// the first n train, the last tests. Throws ConfigError when repo_size < n + 1.
TaskSplit sample_task(std::size_t repo_size, std::size_t n, Rng& rng);

std::vector<const ModelRecord*> resolve(const std::vector<ModelRecord>& repo, const std::vector<std::size_t>& idx);

} // namespace amga::zoo
