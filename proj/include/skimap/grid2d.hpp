#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "skimap/skimap.hpp"

namespace skimap {

inline constexpr std::uint8_t kCellOccupied = 0;
inline constexpr std::uint8_t kCellUnknown = 127;
inline constexpr std::uint8_t kCellFree = 255;

struct Grid2DOptions {
  /// Only navigable tiles count as free; other tiles stay unknown.
  bool navigableOnly = false;
};

/// Row-major cells over the (ix, iy) bounding box, row 0 at minIy.
struct Grid2D {
  std::int32_t minIx = 0;
  std::int32_t minIy = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  double resolution = 0.0;
  std::vector<std::uint8_t> cells;

  std::uint8_t at(std::int32_t ix, std::int32_t iy) const;
  std::size_t count(std::uint8_t value) const;

  friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

/// Cell value for one column: any voxel makes it occupied, a tile makes it
/// free, otherwise unknown.
std::uint8_t classifyColumn(bool hasVoxels, const TileData* tile, const Grid2DOptions& options);

/// Builds the grid from visit2D only; z-lists are never touched.
Grid2D buildGrid2D(const OccupancyMap& map, const Grid2DOptions& options = {});

/// Same grid derived from the full 3D voxel listing projected onto (ix, iy)
/// plus tile-only columns. Used as an oracle.
Grid2D projectGrid2D(const OccupancyMap& map, const Grid2DOptions& options = {});

/// Plain "P2" graymap, top row is the largest iy.
void writePgm(const Grid2D& grid, std::ostream& os);

/// Key: value sidecar with resolution, origin (world coordinates of the
/// lower-left cell corner), size and per-class cell counts.
void writeGridMeta(const Grid2D& grid, std::ostream& os, const std::string& imageName);

}  // namespace skimap
