#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "repack/tensor.hpp"

namespace repack {

// RPK1 binary tensor format, all integers little-endian:
//   magic   "RPK1"
//   version u16 = 1
//   dtype   u8  = 0 (float32)
//   ndim    u8
//   dims    ndim x u32
//   payload numel x float32, row-major
inline constexpr char kMagic[4] = {'R', 'P', 'K', '1'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 0;

void write_tensor(const FeatureTensor& t, std::ostream& os);
void write_tensor(const FeatureTensor& t, const std::string& path);

FeatureTensor read_tensor(std::istream& is);
FeatureTensor read_tensor(const std::string& path);

// Named-tensor container for model files (magic "RPKM"): u16 version,
// u32 count, then per entry u16 name length, name bytes, RPK1 blob.
// Entries are written in name order so files are byte-reproducible.
void write_tensor_map(const std::map<std::string, FeatureTensor>& tensors,
                      const std::string& path);
std::map<std::string, FeatureTensor> read_tensor_map(const std::string& path);

// CSV interop for small tensors: first line "dims,<d0>,<d1>,...", then the
// payload with the last dimension as columns and leading dims flattened
// into rows.
void write_tensor_csv(const FeatureTensor& t, const std::string& path);
FeatureTensor read_tensor_csv(const std::string& path);

}  // namespace repack
