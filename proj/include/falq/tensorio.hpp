#pragma once

// FATF tensor files and the FALQ compressed container. Byte layouts are
// documented in docs/formats.md; everything is little-endian.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "falq/types.hpp"

namespace falq {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

enum class DType : std::uint8_t {
  float64 = 0,
  float32 = 1,
  complex64 = 2,
  complex128 = 3,
};

std::size_t dtype_size(DType dtype);
bool is_complex(DType dtype);

/// A decoded FATF tensor. One-dimensional tensors of length n are held as a
/// 1 x n matrix; `dims` keeps the recorded shape.
struct Tensor {
  DType dtype = DType::float64;
  std::vector<std::uint64_t> dims;
  std::variant<RealMatrix, ComplexMatrix> values;

  bool holds_real() const { return std::holds_alternative<RealMatrix>(values); }
  const RealMatrix& real() const;
  const ComplexMatrix& complex() const;
};

Bytes encode_tensor(const RealMatrix& m, DType dtype = DType::float64);
Bytes encode_tensor(const ComplexMatrix& m, DType dtype = DType::complex128);
Bytes encode_vector(const RealVector& v, DType dtype = DType::float64);
Tensor decode_tensor(ByteView bytes);

void write_tensor(const std::filesystem::path& path, const RealMatrix& m,
                  DType dtype = DType::float64);
void write_tensor(const std::filesystem::path& path, const ComplexMatrix& m,
                  DType dtype = DType::complex128);
Tensor read_tensor(const std::filesystem::path& path);

/// Reads a 2D real tensor, widening float32 payloads to double.
RealMatrix read_real_matrix(const std::filesystem::path& path);

/// LSB-first bit packing of `bitwidth`-bit codes (bitwidth in 1..16).
Bytes pack_bits(std::span<const std::uint32_t> indices, int bitwidth);
std::vector<std::uint32_t> unpack_bits(ByteView bytes, int bitwidth, std::size_t count);
std::size_t packed_size(std::size_t count, int bitwidth);

namespace container_flags {
inline constexpr std::uint16_t has_metadata = 1u << 0;
inline constexpr std::uint16_t calibrated = 1u << 1;
inline constexpr std::uint16_t padded_width = 1u << 2;
}  // namespace container_flags

struct CompressedContainer {
  static constexpr std::uint16_t kVersion = 1;
  static constexpr std::size_t kHeaderBytes = 64;

  std::uint16_t version = kVersion;
  std::uint16_t flags = 0;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;           // transform width (even)
  std::uint64_t original_cols = 0;  // width before padding
  std::uint64_t half_cols = 0;
  std::uint64_t rank = 0;
  std::uint8_t amp_bits = 0;
  std::uint8_t phase_bits = 0;
  double r_max = 0.0;
  std::vector<std::complex<float>> left;   // rows x rank, row-major
  std::vector<std::complex<float>> right;  // rank x half_cols, row-major
  Bytes amp_stream;
  Bytes phase_stream;
  std::optional<std::string> metadata;

  bool operator==(const CompressedContainer&) const = default;
};

Bytes serialize_container(const CompressedContainer& c);
CompressedContainer parse_container(ByteView bytes);

void write_container(const std::filesystem::path& path, const CompressedContainer& c);
CompressedContainer read_container(const std::filesystem::path& path);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, ByteView bytes);

}  // namespace falq
