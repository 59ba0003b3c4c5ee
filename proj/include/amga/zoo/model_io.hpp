#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "amga/zoo/model.hpp"

namespace amga::zoo {

inline constexpr std::string_view kWeightMagic = "AMGAZOO1";

std::string encode_model(const ModelRecord& record);
ModelRecord decode_model(std::string_view bytes);

void save_model(const ModelRecord& record, const std::filesystem::path& path);
ModelRecord load_model(const std::filesystem::path& path);

} // namespace amga::zoo
