#pragma once

// TNSR: little-endian binary tensor file.
//
//   offset 0  "TNSR"
//          4  u8 version (= 1)
//          5  u8 dtype   (1 = float32 LE)
//          6  u8 ndim
//          7  u8 reserved (= 0)
//          8  ndim x u32 LE dims
//          .. row-major float32 LE payload, 4 * prod(dims) bytes

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tiam/error.hpp"
#include "tiam/tensor.hpp"

namespace tiam::tnsr {

inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 1;

struct FloatTensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  bool operator==(const FloatTensor&) const = default;
};

inline std::string encode(const FloatTensor& t, const std::string& where = {}) {
  if (t.dims.size() > 255) throw Error(Errc::ShapeError, "more than 255 dimensions", where);
  std::size_t count = 1;
  for (auto d : t.dims) count *= d;
  if (count != t.values.size())
    throw Error(Errc::ShapeError, "dims describe " + std::to_string(count) +
                                      " values, got " + std::to_string(t.values.size()),
                where);
  for (float v : t.values)
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteValue, "tensor holds NaN or Inf", where);

  std::string out;
  out.reserve(8 + 4 * t.dims.size() + 4 * t.values.size());
  out += "TNSR";
  out.push_back(static_cast<char>(kVersion));
  out.push_back(static_cast<char>(kDtypeF32));
  out.push_back(static_cast<char>(t.dims.size()));
  out.push_back(0);
  auto put32 = [&out](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  for (auto d : t.dims) put32(d);
  for (float v : t.values) put32(std::bit_cast<std::uint32_t>(v));
  return out;
}

inline FloatTensor decode(const std::string& bytes, const std::string& where = {}) {
  auto u8 = [&](std::size_t i) { return static_cast<std::uint8_t>(bytes[i]); };
  auto get32 = [&](std::size_t i) {
    return static_cast<std::uint32_t>(u8(i)) | (static_cast<std::uint32_t>(u8(i + 1)) << 8) |
           (static_cast<std::uint32_t>(u8(i + 2)) << 16) |
           (static_cast<std::uint32_t>(u8(i + 3)) << 24);
  };
  if (bytes.size() < 4 || bytes.compare(0, 4, "TNSR") != 0)
    throw Error(Errc::BadMagic, "missing TNSR magic", where);
  if (bytes.size() < 8) throw Error(Errc::TruncatedPayload, "header truncated", where);
  if (u8(4) != kVersion)
    throw Error(Errc::UnsupportedVersion, "version " + std::to_string(u8(4)), where);
  if (u8(5) != kDtypeF32)
    throw Error(Errc::UnsupportedDtype, "dtype " + std::to_string(u8(5)), where);
  const std::size_t ndim = u8(6);
  if (bytes.size() < 8 + 4 * ndim) throw Error(Errc::TruncatedPayload, "dims truncated", where);

  FloatTensor t;
  t.dims.resize(ndim);
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    t.dims[i] = get32(8 + 4 * i);
    count *= t.dims[i];
  }
  const std::size_t offset = 8 + 4 * ndim;
  const std::size_t expected = offset + 4 * count;
  if (bytes.size() < expected)
    throw Error(Errc::TruncatedPayload, "payload has " + std::to_string(bytes.size() - offset) +
                                            " bytes, dims need " + std::to_string(4 * count),
                where);
  if (bytes.size() > expected)
    throw Error(Errc::ShapeError, "trailing bytes after payload", where);
  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    t.values[i] = std::bit_cast<float>(get32(offset + 4 * i));
  return t;
}

inline void write(const std::filesystem::path& path, const FloatTensor& t) {
  const auto bytes = encode(t, path.string());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open for writing", path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "write failed", path.string());
}

inline FloatTensor read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open file", path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(bytes, path.string());
}

/// Narrow a float64 tensor for storage. Values that overflow float32 count as
/// non-finite.
inline FloatTensor to_float(const Tensor& t, const std::string& where = {}) {
  FloatTensor f;
  for (auto d : t.shape()) {
    if (d > UINT32_MAX) throw Error(Errc::ShapeError, "dimension exceeds u32", where);
    f.dims.push_back(static_cast<std::uint32_t>(d));
  }
  f.values.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i])) throw Error(Errc::NonFiniteValue, "tensor holds NaN or Inf", where);
    f.values[i] = static_cast<float>(t[i]);
    if (!std::isfinite(f.values[i]))
      throw Error(Errc::NonFiniteValue, "value overflows float32", where);
  }
  return f;
}

inline Tensor to_double(const FloatTensor& f) {
  std::vector<std::size_t> shape(f.dims.begin(), f.dims.end());
  std::vector<double> data(f.values.begin(), f.values.end());
  return Tensor(std::move(shape), std::move(data));
}

inline void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  write(path, to_float(t, path.string()));
}

inline Tensor read_tensor(const std::filesystem::path& path) { return to_double(read(path)); }

}  // namespace tiam::tnsr
