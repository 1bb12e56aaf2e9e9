#include "smx/array_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace smx {

static_assert(std::endian::native == std::endian::little,
              "array files are little-endian; big-endian hosts are unsupported");

void write_array(const std::filesystem::path& path, const NdArray& array) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(kArrayMagic, 4);
  const std::uint32_t version = kArrayVersion;
  const std::uint32_t ndim = std::uint32_t(array.rank());
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&ndim), sizeof ndim);
  for (std::size_t d : array.dims()) {
    const std::uint64_t e = d;
    out.write(reinterpret_cast<const char*>(&e), sizeof e);
  }
  out.write(reinterpret_cast<const char*>(array.data().data()),
            std::streamsize(array.size() * sizeof(double)));
  if (!out) throw FormatError("short write to " + path.string());
}

NdArray read_array(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kArrayMagic, 4) != 0)
    throw FormatError(path.string() + ": bad magic, not an SMMA array file");
  std::uint32_t version = 0, ndim = 0;
  if (!in.read(reinterpret_cast<char*>(&version), sizeof version))
    throw FormatError(path.string() + ": truncated header");
  if (version != kArrayVersion)
    throw FormatError(path.string() + ": unsupported format version " +
                      std::to_string(version));
  if (!in.read(reinterpret_cast<char*>(&ndim), sizeof ndim) || ndim == 0)
    throw FormatError(path.string() + ": bad dimension count");
  std::vector<std::size_t> dims(ndim);
  for (auto& d : dims) {
    std::uint64_t e = 0;
    if (!in.read(reinterpret_cast<char*>(&e), sizeof e))
      throw FormatError(path.string() + ": truncated extents");
    if (e == 0) throw FormatError(path.string() + ": zero extent");
    d = std::size_t(e);
  }
  const std::size_t count = checked_product(dims);
  std::vector<double> payload(count);
  if (!in.read(reinterpret_cast<char*>(payload.data()),
               std::streamsize(count * sizeof(double))))
    throw FormatError(path.string() + ": truncated payload, expected " +
                      std::to_string(count) + " doubles");
  char extra;
  if (in.read(&extra, 1))
    throw FormatError(path.string() + ": trailing bytes after payload");
  return NdArray(std::move(dims), std::move(payload));
}

}  // namespace smx
