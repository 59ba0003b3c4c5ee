#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "amga/numerics/tensor.hpp"

namespace amga::util {

inline constexpr std::uint32_t kTensorFileVersion = 1;

/// Layout (all integers little-endian):
///   magic (8 bytes) | version u32 | header length u32 | header JSON (UTF-8)
///   | tensor count u32 | per tensor: rank u32, dims u32 x rank, f32 payload
///   | CRC32 (u32) of every preceding byte.
std::string encode_tensor_file(std::string_view magic, const nlohmann::json& header, const std::vector<Tensor>& tensors);

struct TensorFile {
    nlohmann::json header;
    std::vector<Tensor> tensors;
};

/// Throws ParseError with "bad magic", "unsupported version",
/// "truncated payload" or "crc mismatch".
TensorFile decode_tensor_file(std::string_view magic, std::string_view bytes);

void write_tensor_file(const std::filesystem::path& path, std::string_view magic, const nlohmann::json& header,
                       const std::vector<Tensor>& tensors);

TensorFile read_tensor_file(const std::filesystem::path& path, std::string_view magic);

/// CRC32 (zlib polynomial) as 8 lowercase hex digits.
std::string crc32_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

} // namespace amga::util
