#include "skimap/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace skimap {

namespace {

void requirePositive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ArgumentError(std::string(name) + " must be positive");
  }
}

void requireNonNegative(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw ArgumentError(std::string(name) + " must be non-negative");
  }
}

}  // namespace

double denseGridMemory(double x, double y, double z, double resolution) {
  requirePositive(x, "x");
  requirePositive(y, "y");
  requirePositive(z, "z");
  requirePositive(resolution, "resolution");
  return x * y * z / (resolution * resolution * resolution) * 4.0;
}

double octreeMemory(std::uint64_t leaves, double leafBytes, std::uint64_t inners, double innerBytes) {
  requireNonNegative(leafBytes, "leaf bytes");
  requireNonNegative(innerBytes, "inner bytes");
  return static_cast<double>(leaves) * leafBytes + static_cast<double>(inners) * innerBytes;
}

double mlsMemory(double x, double y, double resolution, double tileBytes, std::uint64_t voxels,
                 double voxelBytes) {
  requirePositive(x, "x");
  requirePositive(y, "y");
  requirePositive(resolution, "resolution");
  requireNonNegative(tileBytes, "tile bytes");
  requireNonNegative(voxelBytes, "voxel bytes");
  return x * y / (resolution * resolution) * tileBytes + static_cast<double>(voxels) * voxelBytes;
}

double memorySavings(std::size_t bytes, double x, double y, double z, double resolution) {
  return 1.0 - static_cast<double>(bytes) / denseGridMemory(x, y, z, resolution);
}

std::vector<VoxelKey> bruteRadius(std::span<const VoxelKey> occupied, const Point3& center, double radius,
                                  double resolution) {
  if (!(radius >= 0.0)) throw ArgumentError("radius must be non-negative");
  std::vector<VoxelKey> out;
  const double r2 = radius * radius;
  for (const auto& k : occupied) {
    const double dx = cellCenter(k.ix, resolution) - center.x();
    const double dy = cellCenter(k.iy, resolution) - center.y();
    const double dz = cellCenter(k.iz, resolution) - center.z();
    if (dx * dx + dy * dy + dz * dz <= r2) out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace skimap
