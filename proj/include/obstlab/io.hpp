#pragma once

#include "obstlab/curve.hpp"
#include "obstlab/grid.hpp"

#include <filesystem>

namespace obstlab {

/// Binary field file, little-endian:
///   "PRFD" | u32 version | u32 n | u32 dims[n+1] (n spatial axes, then time)
///   | f64 h | f64 dt | f64 t_final | f64 payload[...] (space-major, then time)
inline constexpr std::uint32_t kFieldFormatVersion = 1;

void write_field(const std::filesystem::path& path, const ScalarField& field);
ScalarField read_field(const std::filesystem::path& path);

/// CSV with header `r,value`, rows in increasing r, values printed with 17 digits.
void write_curve_csv(const std::filesystem::path& path, const ModulusCurve& curve);
ModulusCurve read_curve_csv(const std::filesystem::path& path, CurveKind kind = CurveKind::other);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace obstlab
