#pragma once

// Model file layout:
//   "FMAP" | u32 version | u64 header length | JSON header | zero pad to 8
//   | little-endian f64 tensors at the offsets listed in the header.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "flowmap/mlp.hpp"

namespace flowmap {

inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string encode_model(const MlpModel& model);
/// Throws ParseError on bad magic, unknown version, truncation or shape
/// mismatch; never returns a partial model.
MlpModel decode_model(std::string_view bytes);

void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

/// Bytes before the tensor payload for this model (magic, version, header, padding).
std::size_t model_header_bytes(const MlpModel& model);

}  // namespace flowmap
