#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>

#include <Eigen/Core>

#include "skimap/errors.hpp"

namespace skimap {

using Point3 = Eigen::Vector3d;

/// Index type for all three axes. 16 bits gives 65536 cells per axis.
using KeyIndex = std::int16_t;

inline constexpr std::int64_t kKeyMin = std::numeric_limits<KeyIndex>::min();
inline constexpr std::int64_t kKeyMax = std::numeric_limits<KeyIndex>::max();

struct VoxelKey {
  KeyIndex ix = 0;
  KeyIndex iy = 0;
  KeyIndex iz = 0;

  friend constexpr auto operator<=>(const VoxelKey&, const VoxelKey&) = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    const auto ux = static_cast<std::uint16_t>(k.ix);
    const auto uy = static_cast<std::uint16_t>(k.iy);
    const auto uz = static_cast<std::uint16_t>(k.iz);
    return std::hash<std::uint64_t>{}((std::uint64_t{ux} << 32) | (std::uint64_t{uy} << 16) | uz);
  }
};

/// Quotients within this many cells below an integer snap up to it, so
/// decimal inputs such as 0.30 / 0.05 land on 6 rather than 5.999...
inline constexpr double kQuantizationSnap = 1e-9;

/// floor(coordinate / resolution + snap), unchecked.
inline double scaledFloor(double coordinate, double resolution) {
  return std::floor(coordinate / resolution + kQuantizationSnap);
}

inline std::int64_t floorIndex(double coordinate, double resolution) {
  return static_cast<std::int64_t>(scaledFloor(coordinate, resolution));
}

/// Maps a metric point to its voxel key with per-axis floor division.
/// Throws BoundsError naming the first axis that leaves the key range.
inline VoxelKey quantize(const Point3& p, double resolution) {
  std::array<KeyIndex, 3> out{};
  static constexpr char kAxes[3] = {'x', 'y', 'z'};
  for (int axis = 0; axis < 3; ++axis) {
    const double scaled = scaledFloor(p[axis], resolution);
    if (!(scaled >= static_cast<double>(kKeyMin) && scaled <= static_cast<double>(kKeyMax))) {
      throw BoundsError(kAxes[axis], p[axis]);
    }
    out[axis] = static_cast<KeyIndex>(scaled);
  }
  return {out[0], out[1], out[2]};
}

/// Non-throwing variant for skip-and-count policies.
inline bool tryQuantize(const Point3& p, double resolution, VoxelKey& out) noexcept {
  std::array<KeyIndex, 3> idx{};
  for (int axis = 0; axis < 3; ++axis) {
    const double scaled = scaledFloor(p[axis], resolution);
    if (!(scaled >= static_cast<double>(kKeyMin) && scaled <= static_cast<double>(kKeyMax))) {
      return false;
    }
    idx[axis] = static_cast<KeyIndex>(scaled);
  }
  out = {idx[0], idx[1], idx[2]};
  return true;
}

/// Center of a voxel: (k + 0.5) * r per axis.
inline Point3 voxelCenter(const VoxelKey& k, double resolution) {
  return {(k.ix + 0.5) * resolution, (k.iy + 0.5) * resolution, (k.iz + 0.5) * resolution};
}

inline double cellCenter(std::int64_t index, double resolution) {
  return (static_cast<double>(index) + 0.5) * resolution;
}

}  // namespace skimap
