#include "amga/zoo/task.hpp"

#include <numeric>

namespace amga::zoo {

TaskSplit sample_task(std::size_t repo_size, std::size_t n, Rng& rng)
{
    if (n < 1) throw ConfigError("sample_task: n must be at least 1");
    if (repo_size < n + 1) {
        throw ConfigError("sample_task: repository of " + std::to_string(repo_size) + " models cannot supply n+1 = " +
                          std::to_string(n + 1));
    }
    std::vector<std::size_t> idx(repo_size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates: positions [0, n] end up uniformly sampled.
    for (std::size_t i = 0; i <= n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(repo_size - i));
        std::swap(idx[i], idx[j]);
    }
    TaskSplit split;
    split.train_models.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n));
    split.test_model = idx[n];
    return split;
}

std::vector<const ModelRecord*> resolve(const std::vector<ModelRecord>& repo, const std::vector<std::size_t>& idx)
{
    std::vector<const ModelRecord*> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(&repo.at(i));
    return out;
}

} // namespace amga::zoo
