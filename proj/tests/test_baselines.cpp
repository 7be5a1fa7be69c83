#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "skimap/baselines.hpp"
#include "support.hpp"

using namespace skimap;

TEST_CASE("dense grid memory formula") {
  CHECK(denseGridMemory(1, 1, 1, 0.5) == 32.0);
  const double expected = 292.0 * 167.0 * 28.0 / (0.05 * 0.05 * 0.05) * 4.0;
  CHECK(denseGridMemory(292, 167, 28, 0.05) == expected);
  CHECK(denseGridMemory(10, 20, 3, 0.1) == doctest::Approx(denseGridMemory(10, 20, 3, 0.2) * 8.0).epsilon(1e-12));
  CHECK_THROWS_AS(denseGridMemory(0, 1, 1, 0.1), ArgumentError);
  CHECK_THROWS_AS(denseGridMemory(1, -1, 1, 0.1), ArgumentError);
  CHECK_THROWS_AS(denseGridMemory(1, 1, 1, 0.0), ArgumentError);
}

TEST_CASE("octree and multi-level surface memory formulas") {
  CHECK(octreeMemory(0, 16, 0, 64) == 0.0);
  CHECK(octreeMemory(100, 16, 20, 64) == 2880.0);
  CHECK_THROWS_AS(octreeMemory(1, -1, 1, 1), ArgumentError);
  // 10 x 10 m at 0.5 m: 400 tiles of 8 B plus 7 voxels of 12 B.
  CHECK(mlsMemory(10, 10, 0.5, 8, 7, 12) == 400 * 8 + 7 * 12);
  CHECK_THROWS_AS(mlsMemory(10, 10, 0.0, 8, 7, 12), ArgumentError);
}

TEST_CASE("measured SkiMap memory: empty and single voxel") {
  MapConfig cfg;
  OccupancyMap map(cfg);
  const auto empty = measureSkiMapMemory(map);
  CHECK(empty.xNodes == 0);
  CHECK(empty.voxels == 0);
  CHECK(empty.towerLinks == 0);
  CHECK(empty.bytes == empty.layout.listBytes + empty.headLinks * empty.layout.linkBytes);

  map.integrateAt({3, -4, 5}, Sample{});
  const auto one = measureSkiMapMemory(map);
  CHECK(one.xNodes == 1);
  CHECK(one.yNodes == 1);
  CHECK(one.voxels == 1);
  CHECK(one.lists == 3);
  CHECK(one.towerLinks >= 3);
  CHECK(one.bytes == one.layout.listBytes + one.layout.xNodeBytes + one.layout.yNodeBytes +
                         one.layout.voxelNodeBytes + (one.towerLinks + one.headLinks) * one.layout.linkBytes);
}

TEST_CASE("measured SkiMap memory counts every node") {
  MapConfig cfg;
  cfg.resolution = 0.1;
  OccupancyMap map(cfg);
  const auto cloud = testing_support::randomCloud(5000, 2.0, 1);
  for (const auto& p : cloud) map.integratePoint(p, Sample{});
  map.integrateTile(100, 100, 0.0);
  const auto m = measureSkiMapMemory(map);
  std::set<int> xs;
  std::set<std::pair<int, int>> xys;
  for (const auto& [k, v] : map.collectVoxels()) {
    xs.insert(k.ix);
    xys.emplace(k.ix, k.iy);
  }
  xs.insert(100);
  xys.emplace(100, 100);
  CHECK(m.xNodes == xs.size());
  CHECK(m.yNodes == xys.size());
  CHECK(m.voxels == map.voxelCount());
  CHECK(m.tiles == 1);
  CHECK(m.lists == 1 + xs.size() + xys.size());
}

TEST_CASE("sparse large scene saves more than 90 percent against a full grid") {
  // 50 x 50 x 5 m at 0.1 m is 12.5 M cells; 10,000 voxels is 0.08 % occupancy.
  MapConfig cfg;
  cfg.resolution = 0.1;
  OccupancyMap map(cfg);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> xy(0, 499);
  std::uniform_int_distribution<int> z(0, 49);
  while (map.voxelCount() < 10000) {
    map.integrateAt({static_cast<KeyIndex>(xy(rng)), static_cast<KeyIndex>(xy(rng)), static_cast<KeyIndex>(z(rng))},
                    Sample{});
  }
  const auto m = measureSkiMapMemory(map);
  const double savings = memorySavings(m.bytes, 50, 50, 5, 0.1);
  CHECK(savings > 0.9);
}

TEST_CASE("dense grid and SkiMap agree on keys and payloads") {
  const double r = 0.05;
  const auto cloud = testing_support::withSamples(testing_support::randomCloud(20000, 0.6, 3), 4);
  std::vector<VoxelKey> keys;
  for (const auto& ps : cloud) keys.push_back(quantize(ps.point, r));
  auto grid = DenseGrid<OccupancyVoxel>::covering(keys, r);
  MapConfig cfg;
  cfg.resolution = r;
  OccupancyMap map(cfg);
  for (const auto& ps : cloud) grid.integrate(ps.point, ps.sample);
  map.integrateBatch(cloud);

  std::vector<std::pair<VoxelKey, OccupancyVoxel>> dense;
  grid.visitAll([&](const VoxelKey& k, const OccupancyVoxel& v) { dense.emplace_back(k, v); });
  std::sort(dense.begin(), dense.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  const auto sparse = map.collectVoxels();
  REQUIRE(dense.size() == sparse.size());
  for (std::size_t i = 0; i < dense.size(); ++i) {
    CHECK(dense[i].first == sparse[i].first);
    CHECK(std::abs(dense[i].second.probability - sparse[i].second.probability) <= 1e-9);
    CHECK(std::abs(dense[i].second.weight - sparse[i].second.weight) <= 1e-9);
  }
}

TEST_CASE("dense grid index is a bijection over its extent") {
  DenseGrid<OccupancyVoxel> grid({-3, 2, -1}, {4, 5, 6}, 0.1);
  CHECK(grid.cellCount() == 120);
  std::set<std::size_t> seen;
  for (int x = -3; x < 1; ++x) {
    for (int y = 2; y < 7; ++y) {
      for (int z = -1; z < 5; ++z) {
        const VoxelKey k{static_cast<KeyIndex>(x), static_cast<KeyIndex>(y), static_cast<KeyIndex>(z)};
        const std::size_t i = grid.index(k);
        CHECK(grid.keyAt(i) == k);
        seen.insert(i);
      }
    }
  }
  CHECK(seen.size() == 120);
  CHECK_FALSE(grid.contains({1, 2, -1}));
  CHECK_THROWS_AS(grid.index({1, 2, -1}), BoundsError);
  CHECK_THROWS_AS(DenseGrid<OccupancyVoxel>({0, 0, 0}, {0, 1, 1}, 0.1), ArgumentError);
}

TEST_CASE("reference octree mirrors the SkiMap key set") {
  const double r = 0.05;
  const auto cloud = testing_support::withSamples(testing_support::randomCloud(10000, 3.0, 5), 6);
  ReferenceOctree<OccupancyVoxel> tree(r);
  MapConfig cfg;
  cfg.resolution = r;
  OccupancyMap map(cfg);
  for (const auto& ps : cloud) tree.integrate(ps.point, ps.sample);
  map.integrateBatch(cloud);
  std::vector<std::pair<VoxelKey, OccupancyVoxel>> leaves;
  tree.visitAll([&](const VoxelKey& k, const OccupancyVoxel& v) { leaves.emplace_back(k, v); });
  std::sort(leaves.begin(), leaves.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  const auto voxels = map.collectVoxels();
  REQUIRE(leaves.size() == voxels.size());
  CHECK(tree.leafCount() == voxels.size());
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    CHECK(leaves[i].first == voxels[i].first);
    CHECK(std::abs(leaves[i].second.weight - voxels[i].second.weight) <= 1e-9);
    CHECK(tree.get(voxels[i].first).has_value());
  }
  CHECK_FALSE(tree.get({1000, 1000, 1000}).has_value());
}

TEST_CASE("octree node counts match a hand count") {
  ReferenceOctree<OccupancyVoxel> tree(0.1);
  CHECK(tree.leafCount() == 0);
  CHECK(tree.innerCount() == 1);
  tree.integrateAt({0, 0, 0}, Sample{});
  // Root plus 15 inner levels, then the leaf.
  CHECK(tree.leafCount() == 1);
  CHECK(tree.innerCount() == 16);
  // Sibling leaf under the same parent adds one leaf only.
  tree.integrateAt({1, 0, 0}, Sample{});
  CHECK(tree.leafCount() == 2);
  CHECK(tree.innerCount() == 16);
  // -1 differs from 0 in the top bit after the offset: a whole new branch.
  tree.integrateAt({-1, 0, 0}, Sample{});
  CHECK(tree.leafCount() == 3);
  CHECK(tree.innerCount() == 31);
  CHECK(tree.bytes() == static_cast<std::size_t>(octreeMemory(3, ReferenceOctree<OccupancyVoxel>::nodeBytes(), 31,
                                                              ReferenceOctree<OccupancyVoxel>::nodeBytes())));
  // Extreme keys stay addressable.
  tree.integrateAt({kKeyMin, kKeyMax, kKeyMin}, Sample{});
  CHECK(tree.get({kKeyMin, kKeyMax, kKeyMin}).has_value());
}

TEST_CASE("brute radius examples") {
  const double r = 0.1;
  const std::vector<VoxelKey> one{{0, 0, 0}};
  CHECK(bruteRadius(one, {0.05, 0.05, 0.05}, 0.0, r).size() == 1);
  CHECK(bruteRadius(one, {0.0, 0.0, 0.0}, 0.04, r).empty());
  CHECK(bruteRadius(one, {0.0, 0.0, 0.0}, 0.09, r).size() == 1);
  CHECK_THROWS_AS(bruteRadius(one, Point3::Zero(), -1.0, r), ArgumentError);
}

TEST_CASE("octree and SkiMap radius search agree with brute force") {
  const double r = 0.05;
  const auto cloud = testing_support::randomCloud(5000, 1.0, 7);
  ReferenceOctree<OccupancyVoxel> tree(r);
  MapConfig cfg;
  cfg.resolution = r;
  OccupancyMap map(cfg);
  for (const auto& p : cloud) {
    tree.integrate(p, Sample{});
    map.integratePoint(p, Sample{});
  }
  std::vector<VoxelKey> keys;
  for (const auto& [k, v] : map.collectVoxels()) keys.push_back(k);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> c(-1.2, 1.2);
  std::uniform_real_distribution<double> rad(0.0, 0.6);
  for (int q = 0; q < 100; ++q) {
    const Point3 center(c(rng), c(rng), c(rng));
    const double radius = rad(rng);
    const auto oracle = bruteRadius(keys, center, radius, r);
    std::vector<VoxelKey> fromTree;
    for (const auto& [k, v] : tree.radiusSearch(center, radius)) fromTree.push_back(k);
    std::sort(fromTree.begin(), fromTree.end());
    std::vector<VoxelKey> fromMap;
    for (const auto& [k, v] : map.radiusSearch(center, radius).voxels) fromMap.push_back(k);
    std::sort(fromMap.begin(), fromMap.end());
    CHECK(fromTree == oracle);
    CHECK(fromMap == oracle);
  }
}
