#include "support/fixtures.hpp"

#include <algorithm>
#include <cstdlib>

#include "amga/util/tensor_file.hpp"
#include "amga/zoo/zoo.hpp"

namespace amga::testing {

namespace fs = std::filesystem;

const std::vector<zoo::ModelRecord>& shared_zoo()
{
    static const auto zoo = zoo::load_or_train_zoo(AMGA_ZOO_CACHE, zoo::ZooConfig{});
    return zoo;
}

const zoo::Dataset& shared_dataset()
{
    static const auto d = zoo::generate_dataset(zoo::ZooConfig{}.dataset);
    return d;
}

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("amga_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Tensor random_tensor(const Shape& shape, Rng& rng, double lo, double hi)
{
    Tensor t(shape);
    for (auto& v : t.data()) v = static_cast<float>(rng.uniform(lo, hi));
    return t;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string("\"") + AMGA_CLI + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir)
{
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) files.emplace_back(fs::relative(e.path(), dir).string(), util::read_file(e.path()));
    }
    std::sort(files.begin(), files.end());
    return files;
}

} // namespace amga::testing
