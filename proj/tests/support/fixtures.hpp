#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "amga/numerics/rng.hpp"
#include "amga/numerics/tensor.hpp"
#include "amga/zoo/dataset.hpp"
#include "amga/zoo/model.hpp"

namespace amga::testing {

/// Default zoo, trained once into the build tree and shared by every test binary.
const std::vector<zoo::ModelRecord>& shared_zoo();
const zoo::Dataset& shared_dataset();

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

Tensor random_tensor(const Shape& shape, Rng& rng, double lo = 0.0, double hi = 1.0);

/// Run the amga executable with `args`; returns its exit code.
int run_cli(const std::string& args);

/// Every regular file under `dir`, relative path -> bytes.
std::vector<std::pair<std::string, std::string>> snapshot(const std::filesystem::path& dir);

} // namespace amga::testing
