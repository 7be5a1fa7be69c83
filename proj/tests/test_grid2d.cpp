#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "skimap/grid2d.hpp"
#include "support.hpp"

using namespace skimap;

namespace {

MapConfig config(double r) {
  MapConfig cfg;
  cfg.resolution = r;
  return cfg;
}

/// Floor tiles over a square plus random obstacle columns, some over tiles.
OccupancyMap mixedScene(std::uint64_t seed) {
  OccupancyMap map(config(0.05));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> xy(-40, 40);
  std::uniform_int_distribution<int> hits(1, 5);
  for (int i = 0; i < 2000; ++i) {
    const auto ix = static_cast<KeyIndex>(xy(rng));
    const auto iy = static_cast<KeyIndex>(xy(rng));
    for (int h = hits(rng); h > 0; --h) map.integrateTile(ix, iy, 0.01);
  }
  for (const auto& p : testing_support::randomCloud(3000, 2.5, seed + 1, 2.0)) map.integratePoint(p, Sample{});
  return map;
}

}  // namespace

TEST_CASE("empty map gives an empty grid") {
  OccupancyMap map(config(0.1));
  const Grid2D grid = buildGrid2D(map);
  CHECK(grid.width == 0);
  CHECK(grid.height == 0);
  std::ostringstream os;
  writePgm(grid, os);
  CHECK(os.str() == "P2\n0 0\n255\n");
}

TEST_CASE("tiles-only map marks those cells free") {
  OccupancyMap map(config(0.1));
  map.integrateTile(0, 0, 0.0);
  map.integrateTile(2, 1, 0.0);
  const Grid2D grid = buildGrid2D(map);
  CHECK(grid.width == 3);
  CHECK(grid.height == 2);
  CHECK(grid.at(0, 0) == kCellFree);
  CHECK(grid.at(2, 1) == kCellFree);
  CHECK(grid.at(1, 0) == kCellUnknown);
  CHECK(grid.count(kCellFree) == 2);
  CHECK(grid.count(kCellUnknown) == 4);
}

TEST_CASE("an obstacle column above a ground tile is occupied") {
  OccupancyMap map(config(0.1));
  map.integrateTile(5, 5, 0.0);
  map.integrateTile(6, 5, 0.0);
  map.integrateAt({5, 5, 12}, Sample{});
  const Grid2D grid = buildGrid2D(map);
  CHECK(grid.at(5, 5) == kCellOccupied);
  CHECK(grid.at(6, 5) == kCellFree);
}

TEST_CASE("navigable-only export needs enough tile hits") {
  OccupancyMap map(config(0.1));
  map.integrateTile(0, 0, 0.0);
  map.integrateTile(0, 0, 0.0);
  for (int i = 0; i < 3; ++i) map.integrateTile(1, 0, 0.0);
  const Grid2D all = buildGrid2D(map);
  const Grid2D navigable = buildGrid2D(map, {true});
  CHECK(all.at(0, 0) == kCellFree);
  CHECK(navigable.at(0, 0) == kCellUnknown);
  CHECK(navigable.at(1, 0) == kCellFree);
}

TEST_CASE("column query grid equals the 3D projection and never reaches level 3") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    OccupancyMap map = mixedScene(seed);
    map.resetCounters();
    const Grid2D fast = buildGrid2D(map);
    CHECK(map.counters().level3Accesses == 0);
    CHECK(map.counters().level3Allocations == 0);
    const Grid2D oracle = projectGrid2D(map);
    CHECK(fast == oracle);
    CHECK(map.counters().level3Accesses > 0);
    CHECK(buildGrid2D(map, {true}) == projectGrid2D(map, {true}));
    CHECK(fast.count(kCellOccupied) > 0);
    CHECK(fast.count(kCellFree) > 0);
  }
}

TEST_CASE("graymap layout puts the largest iy on top") {
  OccupancyMap map(config(0.5));
  map.integrateTile(-1, 0, 0.0);  // bottom-left free
  map.integrateAt({0, 1, 0}, Sample{});  // top-right occupied
  const Grid2D grid = buildGrid2D(map);
  std::ostringstream pgm;
  writePgm(grid, pgm);
  CHECK(pgm.str() == "P2\n2 2\n255\n127 0\n255 127\n");

  std::ostringstream meta;
  writeGridMeta(grid, meta, "map.pgm");
  const std::string text = meta.str();
  CHECK(text.find("image: map.pgm\n") != std::string::npos);
  CHECK(text.find("resolution: 0.5\n") != std::string::npos);
  CHECK(text.find("origin: [-0.5, 0, 0]\n") != std::string::npos);
  CHECK(text.find("free: 1\noccupied: 1\nunknown: 2\n") != std::string::npos);
}
