#include "lipnet/tensor.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

namespace lipnet {
namespace {

constexpr char kMagic[4] = {'L', 'R', 'T', '1'};

static_assert(std::endian::native == std::endian::little,
              "LRT1 I/O assumes a little-endian host");

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::istream& is, const std::string& what) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 4))
    throw TensorFormatError("truncated LRT1 file while reading " + what);
  return v;
}

}  // namespace

void save_tensors(const std::string& path, const TensorSet& set) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw TensorFormatError("cannot open for writing: " + path);
  os.write(kMagic, 4);
  write_u32(os, static_cast<std::uint32_t>(set.size()));
  for (const auto& [name, t] : set) {
    write_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(os, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) write_u32(os, d);
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  }
  if (!os) throw TensorFormatError("write failed: " + path);
}

TensorSet load_tensors(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw TensorFormatError("cannot open: " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw TensorFormatError("bad magic bytes in " + path);
  const std::uint32_t count = read_u32(is, "entry count");
  TensorSet set;
  set.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor nt;
    const std::uint32_t nameLen = read_u32(is, "name length");
    nt.name.resize(nameLen);
    if (nameLen > 0 && !is.read(nt.name.data(), nameLen))
      throw TensorFormatError("truncated name in " + path);
    const std::uint32_t rank = read_u32(is, "rank");
    if (rank > 8) throw TensorFormatError("implausible rank in " + path);
    std::uint64_t n = 1;
    nt.tensor.dims.resize(rank);
    for (auto& d : nt.tensor.dims) {
      d = read_u32(is, "dim");
      n *= d;
      if (n > (1ULL << 32))
        throw TensorFormatError("dim overflow in " + path);
    }
    if (rank == 0) n = 0;
    nt.tensor.data.resize(static_cast<std::size_t>(n));
    if (n > 0 &&
        !is.read(reinterpret_cast<char*>(nt.tensor.data.data()),
                 static_cast<std::streamsize>(n * sizeof(float))))
      throw TensorFormatError("truncated payload in " + path);
    set.push_back(std::move(nt));
  }
  return set;
}

const Tensor& find_tensor(const TensorSet& set, const std::string& name) {
  for (const auto& nt : set)
    if (nt.name == name) return nt.tensor;
  throw TensorFormatError("missing tensor section: " + name);
}

}  // namespace lipnet
