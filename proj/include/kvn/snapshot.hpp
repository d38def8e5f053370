#pragma once

#include <string>

#include "kvn/field.hpp"

namespace kvn {

/// Binary state snapshot. Layout (little-endian throughout):
///   magic "KVNF" | u32 format version (1) | u8 representation tag (0=velocity,
///   1=momentum) | u32 config_dim | u32 point count per axis (2d entries) |
///   f64 min, f64 max per axis | amplitudes as interleaved f64 (re, im) pairs
///   in row-major axis order, positions before velocities.
void write_snapshot(const std::string& path, const WaveField& f);
WaveField read_snapshot(const std::string& path);

inline constexpr std::uint32_t kSnapshotVersion = 1;

}  // namespace kvn
