#pragma once

#include "stochdef/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace stochdef {

// Raw tensor container:
//   bytes 0..3   magic "STDB"
//   byte  4      version (1)
//   byte  5      dtype (1 = little-endian float32)
//   bytes 6..7   reserved, zero
//   bytes 8..15  u16 height, width, channels, count (little-endian)
// followed by count * H * W * C float32 values, records back to back.
// Label files are count little-endian u16 values with no header.

inline constexpr std::uint8_t kTensorFileVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 1;

void write_tensors(std::ostream& out, const std::vector<ImageTensor>& records);
std::vector<ImageTensor> read_tensors(std::istream& in);

void save_tensors(const std::filesystem::path& path, const std::vector<ImageTensor>& records);
std::vector<ImageTensor> load_tensors(const std::filesystem::path& path);

void save_labels(const std::filesystem::path& path, const std::vector<int>& labels);
std::vector<int> load_labels(const std::filesystem::path& path);

} // namespace stochdef
