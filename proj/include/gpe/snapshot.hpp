#ifndef GPE_SNAPSHOT_HPP
#define GPE_SNAPSHOT_HPP

#include <filesystem>
#include <string>

#include "gpe/grid.hpp"

namespace gpe {

/// Binary field snapshot, little-endian:
///   magic "GPEF" | u32 version | u32 dimension | u32 points per axis |
///   f64 half-extent per axis | u32 bytes per value (8 or 16) |
///   payload: interleaved (re, im) pairs, row-major with x fastest.
/// Writes are atomic (temp file + rename).
void write_snapshot(const ComplexField& field, const std::filesystem::path& path,
                    int bytes_per_value = 16);

ComplexField read_snapshot(const std::filesystem::path& path);

/// FNV-1a 64-bit content hash, hex-encoded (manifest checksums).
std::string file_checksum(const std::filesystem::path& path);

} // namespace gpe

#endif
