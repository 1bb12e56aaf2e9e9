#pragma once

#include <filesystem>
#include <string>

#include "smx/ndarray.hpp"

namespace smx {

/// Binary array container: magic "SMMA", u32 format version (= 1), u32 ndim,
/// ndim u64 extents, then float64 payload, everything little-endian and the
/// payload column-major. A dataset file carries the group axis as its last
/// dimension.
inline constexpr char kArrayMagic[4] = {'S', 'M', 'M', 'A'};
inline constexpr std::uint32_t kArrayVersion = 1;

void write_array(const std::filesystem::path& path, const NdArray& array);

NdArray read_array(const std::filesystem::path& path);

}  // namespace smx
