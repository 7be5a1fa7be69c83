#include "skimap/grid2d.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <ostream>
#include <string>

#include "skimap/fusion.hpp"

namespace skimap {

namespace {

struct CellValue {
  std::int32_t ix;
  std::int32_t iy;
  std::uint8_t value;
};

Grid2D rasterize(const std::vector<CellValue>& cells, double resolution) {
  Grid2D grid;
  grid.resolution = resolution;
  if (cells.empty()) return grid;
  std::int32_t maxIx = std::numeric_limits<std::int32_t>::min();
  std::int32_t maxIy = maxIx;
  grid.minIx = std::numeric_limits<std::int32_t>::max();
  grid.minIy = grid.minIx;
  for (const auto& c : cells) {
    grid.minIx = std::min(grid.minIx, c.ix);
    grid.minIy = std::min(grid.minIy, c.iy);
    maxIx = std::max(maxIx, c.ix);
    maxIy = std::max(maxIy, c.iy);
  }
  grid.width = static_cast<std::size_t>(maxIx - grid.minIx + 1);
  grid.height = static_cast<std::size_t>(maxIy - grid.minIy + 1);
  grid.cells.assign(grid.width * grid.height, kCellUnknown);
  for (const auto& c : cells) {
    const auto row = static_cast<std::size_t>(c.iy - grid.minIy);
    const auto col = static_cast<std::size_t>(c.ix - grid.minIx);
    grid.cells[row * grid.width + col] = c.value;
  }
  return grid;
}

}  // namespace

std::uint8_t Grid2D::at(std::int32_t ix, std::int32_t iy) const {
  if (ix < minIx || iy < minIy) return kCellUnknown;
  const auto col = static_cast<std::size_t>(ix - minIx);
  const auto row = static_cast<std::size_t>(iy - minIy);
  if (col >= width || row >= height) return kCellUnknown;
  return cells[row * width + col];
}

std::size_t Grid2D::count(std::uint8_t value) const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), value));
}

std::uint8_t classifyColumn(bool hasVoxels, const TileData* tile, const Grid2DOptions& options) {
  if (hasVoxels) return kCellOccupied;
  if (tile != nullptr && (!options.navigableOnly || tile->navigable)) return kCellFree;
  return kCellUnknown;
}

Grid2D buildGrid2D(const OccupancyMap& map, const Grid2DOptions& options) {
  std::vector<CellValue> cells;
  map.visit2D([&](const Column& c) {
    cells.push_back({c.ix, c.iy, classifyColumn(c.voxelCount > 0, c.tile, options)});
  });
  return rasterize(cells, map.config().resolution);
}

Grid2D projectGrid2D(const OccupancyMap& map, const Grid2DOptions& options) {
  std::map<std::pair<std::int32_t, std::int32_t>, std::pair<bool, const TileData*>> columns;
  for (const auto& [key, voxel] : map.collectVoxels()) {
    columns[{key.ix, key.iy}].first = true;
  }
  for (const auto& x : map.root()) {
    for (const auto& y : x.value) {
      if (y.value.tile) columns[{x.key, y.key}].second = &*y.value.tile;
    }
  }
  std::vector<CellValue> cells;
  cells.reserve(columns.size());
  for (const auto& [xy, column] : columns) {
    cells.push_back({xy.first, xy.second, classifyColumn(column.first, column.second, options)});
  }
  return rasterize(cells, map.config().resolution);
}

void writePgm(const Grid2D& grid, std::ostream& os) {
  os << "P2\n" << grid.width << ' ' << grid.height << "\n255\n";
  for (std::size_t r = grid.height; r-- > 0;) {
    for (std::size_t c = 0; c < grid.width; ++c) {
      if (c != 0) os << ' ';
      os << static_cast<int>(grid.cells[r * grid.width + c]);
    }
    os << '\n';
  }
}

void writeGridMeta(const Grid2D& grid, std::ostream& os, const std::string& imageName) {
  os << "image: " << imageName << '\n'
     << "resolution: " << formatField(grid.resolution) << '\n'
     << "origin: [" << formatField(grid.minIx * grid.resolution) << ", "
     << formatField(grid.minIy * grid.resolution) << ", 0]\n"
     << "width: " << grid.width << '\n'
     << "height: " << grid.height << '\n'
     << "free: " << grid.count(kCellFree) << '\n'
     << "occupied: " << grid.count(kCellOccupied) << '\n'
     << "unknown: " << grid.count(kCellUnknown) << '\n'
     << "encoding: free=255 occupied=0 unknown=127\n";
}

}  // namespace skimap
