#include "skimap/bench.hpp"

#include <chrono>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "skimap/baselines.hpp"
#include "skimap/errors.hpp"
#include "skimap/fusion.hpp"

namespace skimap {

namespace {

using Clock = std::chrono::steady_clock;

template <class F>
double timeMicros(F&& f) {
  const auto start = Clock::now();
  f();
  return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

// Keeps visit loops from being optimized away.
volatile double sink = 0.0;

struct SceneData {
  std::string name;
  std::vector<Point3> cloud;
  std::vector<PointSample<Sample>> samples;
  std::vector<Point3> queries;
  Point3 lo;
  Point3 hi;
};

SceneData makeScene(SceneKind kind, const BenchConfig& config) {
  SceneData s;
  s.name = sceneKindName(kind);
  s.cloud = generateCloud(kind, config.points, config.extent, config.height, config.seed);
  s.samples.reserve(s.cloud.size());
  s.lo = s.hi = s.cloud.empty() ? Point3::Zero() : s.cloud.front();
  for (const auto& p : s.cloud) {
    s.samples.push_back({p, Sample{1.0, 1.0}});
    s.lo = s.lo.cwiseMin(p);
    s.hi = s.hi.cwiseMax(p);
  }
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  if (!s.cloud.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, s.cloud.size() - 1);
    for (std::size_t i = 0; i < config.radiusQueries; ++i) s.queries.push_back(s.cloud[pick(rng)]);
  }
  return s;
}

void benchSkiMap(const SceneData& s, double resolution, const BenchConfig& config, std::vector<BenchRow>& rows) {
  MapConfig mc;
  mc.resolution = resolution;
  mc.setDepth(config.depth);
  mc.workers = config.workers;
  mc.seed = config.seed;
  OccupancyMap map(mc);
  auto row = [&](const char* op, double t, std::size_t bytes) {
    rows.push_back({"skimap", op, s.name, resolution, s.cloud.size(), t, bytes});
  };
  row("integrate", timeMicros([&] { map.integrateBatch(s.samples); }), 0);
  row("visit", timeMicros([&] {
        double acc = 0.0;
        map.visitAll([&](const VoxelKey&, const OccupancyVoxel& v) { acc += v.probability; });
        sink = acc;
      }),
      0);
  row("visit2d", timeMicros([&] {
        std::size_t acc = 0;
        map.visit2D([&](const Column& c) { acc += c.voxelCount; });
        sink = static_cast<double>(acc);
      }),
      0);
  row("radius", timeMicros([&] {
        std::size_t acc = 0;
        for (const auto& q : s.queries) acc += map.radiusSearch(q, config.radius).voxels.size();
        sink = static_cast<double>(acc);
      }),
      0);
  row("memory", 0.0, measureSkiMapMemory(map).bytes);

  const Point3 size = (s.hi - s.lo).cwiseMax(Point3::Constant(resolution));
  rows.push_back({"dense_eq1", "memory", s.name, resolution, s.cloud.size(), 0.0,
                  static_cast<std::size_t>(denseGridMemory(size.x(), size.y(), size.z(), resolution))});
}

void benchDense(const SceneData& s, double resolution, const BenchConfig& config, std::vector<BenchRow>& rows) {
  std::vector<VoxelKey> keys;
  keys.reserve(s.cloud.size());
  for (const auto& p : s.cloud) keys.push_back(quantize(p, resolution));
  auto grid = DenseGrid<OccupancyVoxel>::covering(keys, resolution);
  auto row = [&](const char* op, double t, std::size_t bytes) {
    rows.push_back({"dense", op, s.name, resolution, s.cloud.size(), t, bytes});
  };
  row("integrate", timeMicros([&] {
        for (const auto& ps : s.samples) grid.integrate(ps.point, ps.sample);
      }),
      0);
  row("visit", timeMicros([&] {
        double acc = 0.0;
        grid.visitAll([&](const VoxelKey&, const OccupancyVoxel& v) { acc += v.probability; });
        sink = acc;
      }),
      0);
  row("visit2d", timeMicros([&] {
        std::set<std::pair<int, int>> columns;
        grid.visitAll([&](const VoxelKey& k, const OccupancyVoxel&) { columns.emplace(k.ix, k.iy); });
        sink = static_cast<double>(columns.size());
      }),
      0);
  row("radius", timeMicros([&] {
        std::size_t acc = 0;
        const double r2 = config.radius * config.radius;
        const auto reach = static_cast<std::int64_t>(std::floor(config.radius / resolution)) + 1;
        for (const auto& q : s.queries) {
          const VoxelKey c = quantize(q, resolution);
          for (std::int64_t dx = -reach; dx <= reach; ++dx) {
            for (std::int64_t dy = -reach; dy <= reach; ++dy) {
              for (std::int64_t dz = -reach; dz <= reach; ++dz) {
                const VoxelKey k{static_cast<KeyIndex>(c.ix + dx), static_cast<KeyIndex>(c.iy + dy),
                                 static_cast<KeyIndex>(c.iz + dz)};
                if (!grid.contains(k) || !grid.at(k)) continue;
                acc += (voxelCenter(k, resolution) - q).squaredNorm() <= r2;
              }
            }
          }
        }
        sink = static_cast<double>(acc);
      }),
      0);
  row("memory", 0.0, grid.bytes());
}

void benchOctree(const SceneData& s, double resolution, const BenchConfig& config, std::vector<BenchRow>& rows) {
  ReferenceOctree<OccupancyVoxel> tree(resolution);
  auto row = [&](const char* op, double t, std::size_t bytes) {
    rows.push_back({"octree", op, s.name, resolution, s.cloud.size(), t, bytes});
  };
  row("integrate", timeMicros([&] {
        for (const auto& ps : s.samples) tree.integrate(ps.point, ps.sample);
      }),
      0);
  row("visit", timeMicros([&] {
        double acc = 0.0;
        tree.visitAll([&](const VoxelKey&, const OccupancyVoxel& v) { acc += v.probability; });
        sink = acc;
      }),
      0);
  row("visit2d", timeMicros([&] {
        std::set<std::pair<int, int>> columns;
        tree.visitAll([&](const VoxelKey& k, const OccupancyVoxel&) { columns.emplace(k.ix, k.iy); });
        sink = static_cast<double>(columns.size());
      }),
      0);
  row("radius", timeMicros([&] {
        std::size_t acc = 0;
        for (const auto& q : s.queries) acc += tree.radiusSearch(q, config.radius).size();
        sink = static_cast<double>(acc);
      }),
      0);
  row("memory", 0.0, tree.bytes());
}

}  // namespace

void BenchConfig::validate() const {
  if (resolutions.empty()) throw ArgumentError("bench needs at least one resolution");
  for (double r : resolutions) {
    if (!(r > 0.0)) throw ArgumentError("bench resolutions must be positive");
  }
  for (int d : depths) {
    if (d < 1 || d > 255) throw ArgumentError("bench depths must be in [1, 255]");
  }
  if (depth < 1 || depth > 255) throw ArgumentError("depth must be in [1, 255]");
  if (!(extent > 0.0) || !(height > 0.0)) throw ArgumentError("scene extent and height must be positive");
  if (!(radius >= 0.0)) throw ArgumentError("radius must be non-negative");
  if (workers == 0) throw ArgumentError("workers must be at least 1");
  if (!(sweepResolution > 0.0)) throw ArgumentError("sweep resolution must be positive");
}

std::string BenchConfig::toJson() const {
  nlohmann::json j;
  std::vector<std::string> sceneNames;
  for (auto k : scenes) sceneNames.push_back(sceneKindName(k));
  j["scenes"] = sceneNames;
  j["resolutions"] = resolutions;
  j["depths"] = depths;
  j["points"] = points;
  j["extent"] = extent;
  j["height"] = height;
  j["radius_queries"] = radiusQueries;
  j["radius"] = radius;
  j["workers"] = workers;
  j["depth"] = depth;
  j["sweep_resolution"] = sweepResolution;
  j["sweep_scene"] = sceneKindName(sweepScene);
  j["dense"] = includeDense;
  j["octree"] = includeOctree;
  j["seed"] = seed;
  return j.dump();
}

std::vector<BenchRow> runBench(const BenchConfig& config) {
  config.validate();
  std::vector<BenchRow> rows;
  for (SceneKind kind : config.scenes) {
    const SceneData scene = makeScene(kind, config);
    for (double r : config.resolutions) {
      benchSkiMap(scene, r, config, rows);
      if (config.includeDense) benchDense(scene, r, config, rows);
      if (config.includeOctree) benchOctree(scene, r, config, rows);
    }
  }

  if (!config.depths.empty()) {
    const SceneData sweep = makeScene(config.sweepScene, config);
    for (int d : config.depths) {
      MapConfig mc;
      mc.resolution = config.sweepResolution;
      mc.setDepth(d);
      mc.workers = config.workers;
      mc.seed = config.seed;
      OccupancyMap map(mc);
      const double t = timeMicros([&] { map.integrateBatch(sweep.samples); });
      rows.push_back({"skimap_d" + std::to_string(d), "depth_sweep", sweep.name, config.sweepResolution,
                      sweep.cloud.size(), t, measureSkiMapMemory(map).bytes});
    }
  }
  return rows;
}

void writeBenchCsv(std::ostream& os, const std::vector<BenchRow>& rows, const BenchConfig& config) {
  os << "# config " << config.toJson() << '\n';
  os << "# seed " << config.seed << '\n';
  const auto layout = skiMapLayout<OccupancyVoxel>();
  os << "# skimap bytes: list " << layout.listBytes << ", xNode " << layout.xNodeBytes << ", yNode "
     << layout.yNodeBytes << ", voxel " << layout.voxelNodeBytes << ", link " << layout.linkBytes
     << "; octree node " << ReferenceOctree<OccupancyVoxel>::nodeBytes() << "; dense cell "
     << sizeof(std::optional<OccupancyVoxel>) << '\n';
  os << "structure,operation,scene,resolution,points,time_us,bytes\n";
  for (const auto& r : rows) {
    os << r.structure << ',' << r.operation << ',' << r.scene << ',' << formatField(r.resolution) << ','
       << r.points << ',' << formatField(r.timeMicros) << ',' << r.bytes << '\n';
  }
}

}  // namespace skimap
