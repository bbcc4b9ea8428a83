#pragma once

// Minimal NPY (v1.0 write, v1.0-3.0 read) support for the array types this
// project stores: little-endian float64/float32 and bool.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace flowmap::npy {

enum class Dtype { Float64, Float32, Bool };

struct Array {
  Dtype dtype = Dtype::Float64;
  std::vector<std::size_t> shape;
  std::vector<std::uint8_t> raw;  // payload bytes, C order

  std::size_t size() const;
  std::vector<double> to_doubles() const;
  std::vector<std::uint8_t> to_bools() const;
};

/// Full v1.0 preamble: magic, version, header length and the padded dict.
std::string encode_header(Dtype dtype, std::span<const std::size_t> shape);

std::string encode(std::span<const std::size_t> shape, std::span<const double> values);
std::string encode(std::span<const std::size_t> shape, std::span<const std::uint8_t> flags);
Array decode(std::string_view bytes);

void write(const std::filesystem::path& path, std::span<const std::size_t> shape,
           std::span<const double> values);
void write(const std::filesystem::path& path, std::span<const std::size_t> shape,
           std::span<const std::uint8_t> flags);
Array read(const std::filesystem::path& path);

/// Whole-file helpers shared with the model format.
std::string slurp(const std::filesystem::path& path);
void dump(const std::filesystem::path& path, std::string_view bytes);

}  // namespace flowmap::npy
