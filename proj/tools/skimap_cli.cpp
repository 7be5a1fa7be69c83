// skimap command line: build, query, export2d, bench, gen.
// Talks to the library only through skimap_c.h.

#include <array>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skimap/skimap_c.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInvariant = 3;

int exitCode(skimap_status status) {
  switch (status) {
    case SKIMAP_OK: return kExitOk;
    case SKIMAP_ERR_ARGUMENT: return kExitUsage;
    case SKIMAP_ERR_INVARIANT:
    case SKIMAP_ERR_INTERNAL: return kExitInvariant;
    default: return kExitData;
  }
}

int report(skimap_status status) {
  if (status != SKIMAP_OK) {
    std::cerr << "skimap: " << skimap_status_name(status) << ": " << skimap_last_error() << '\n';
  }
  return exitCode(status);
}

/// Flags that map onto config keys; only the ones given on the command line
/// end up in the override object.
class Overrides {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, T& target,
                   const std::string& help) {
    auto* opt = app->add_option(flag, target, help);
    setters_.push_back([opt, key, &target](nlohmann::json& j) {
      if (opt->count() > 0) j[key] = target;
    });
    return opt;
  }

  CLI::Option* addFlag(CLI::App* app, const std::string& flag, const std::string& key, bool value,
                       const std::string& help) {
    auto* opt = app->add_flag(flag, help);
    setters_.push_back([opt, key, value](nlohmann::json& j) {
      if (opt->count() > 0) j[key] = value;
    });
    return opt;
  }

  std::string json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& set : setters_) set(j);
    return j.dump();
  }

 private:
  std::vector<std::function<void(nlohmann::json&)>> setters_;
};

bool readFile(const std::string& path, std::string& out) {
  std::ifstream is(path);
  if (!is) return false;
  std::ostringstream ss;
  ss << is.rdbuf();
  out = ss.str();
  return true;
}

struct MapOptions {
  std::string configPath;
  Overrides overrides;
  double resolution = 0.05;
  int depth = 8;
  std::size_t workers = 1;
  std::uint64_t seed = 0;

  void attach(CLI::App* app) {
    app->add_option("--config", configPath, "JSON run config; flags override it");
    overrides.add(app, "-r,--resolution", "resolution", resolution, "voxel side in meters");
    overrides.add(app, "--depth", "depth", depth, "skiplist levels per axis");
    overrides.add(app, "-j,--workers", "workers", workers, "worker threads");
    overrides.add(app, "--seed", "seed", seed, "random seed");
  }

  /// Effective map config after merging file and flags.
  int resolve(skimap_config& out) {
    std::string file;
    if (!configPath.empty() && !readFile(configPath, file)) {
      std::cerr << "skimap: cannot read config " << configPath << '\n';
      return kExitData;
    }
    const std::string flags = overrides.json();
    char* merged = nullptr;
    const auto status = skimap_run_config(configPath.empty() ? nullptr : file.c_str(), flags.c_str(), &merged);
    if (status != SKIMAP_OK) return report(status);
    const auto j = nlohmann::json::parse(merged);
    skimap_string_free(merged);
    skimap_config_default(&out);
    out.resolution = j.at("resolution").get<double>();
    out.depth = j.at("depth").get<int>();
    out.workers = j.at("workers").get<std::size_t>();
    out.seed = j.at("seed").get<std::uint64_t>();
    out.navigable_hits = j.at("navigable_hits").get<std::uint32_t>();
    out.skip_out_of_bounds = j.at("bounds_policy").get<std::string>() == "skip";
    return kExitOk;
  }
};

void printVoxel(const skimap_voxel& v) {
  std::printf("%d %d %d %.9g %.9g\n", v.ix, v.iy, v.iz, v.probability, v.weight);
}

int printList(skimap_voxel_list* list) {
  const std::size_t n = skimap_voxel_list_size(list);
  for (std::size_t i = 0; i < n; ++i) {
    skimap_voxel v;
    skimap_voxel_list_get(list, i, &v);
    printVoxel(v);
  }
  if (skimap_voxel_list_clamped(list)) std::cerr << "skimap: search window clamped to the key range\n";
  skimap_voxel_list_destroy(list);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse voxel maps on a tree of skiplists"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(skimap_version()));

  // ---------------------------------------------------------------- build
  auto* build = app.add_subcommand("build", "Replay a frame log into a map dump");
  std::string buildLog, buildOut, buildTiles, buildStats, buildConfig;
  Overrides buildFlags;
  double resolution = 0.05, ceiling = 0.0, hitProbability = 1.0, hitWeight = 1.0, inlierThreshold = 0.02,
         band = 0.0;
  int depth = 8;
  std::size_t workers = 1, batchBound = 4, minInliers = 500;
  std::uint64_t seed = 0;
  std::uint32_t navigableHits = 3;
  std::string bounds;
  build->add_option("log", buildLog, "frame log")->required();
  build->add_option("-o,--output", buildOut, "voxel dump path")->required();
  build->add_option("--tiles", buildTiles, "tile dump path");
  build->add_option("--stats", buildStats, "stats JSON path");
  build->add_option("--config", buildConfig, "JSON run config; flags override it");
  buildFlags.add(build, "-r,--resolution", "resolution", resolution, "voxel side in meters");
  buildFlags.add(build, "--depth", "depth", depth, "skiplist levels per axis");
  buildFlags.add(build, "-j,--workers", "workers", workers, "worker threads");
  buildFlags.add(build, "--batch-bound", "batch_bound", batchBound, "frames per integration cycle");
  buildFlags.addFlag(build, "--ground", "ground", true, "detect the ground plane on the first frame");
  buildFlags.addFlag(build, "--no-ground", "ground", false, "disable ground tracking");
  buildFlags.add(build, "--ceiling", "ceiling", ceiling, "drop obstacle points above this height");
  buildFlags.add(build, "--seed", "seed", seed, "random seed");
  buildFlags.add(build, "--bounds", "bounds_policy", bounds, "reject | skip");
  buildFlags.add(build, "--hit-probability", "hit_probability", hitProbability, "sample for plain points");
  buildFlags.add(build, "--hit-weight", "hit_weight", hitWeight, "weight for plain points");
  buildFlags.add(build, "--inlier-threshold", "inlier_threshold", inlierThreshold, "ground fit threshold (m)");
  buildFlags.add(build, "--min-inliers", "min_inliers", minInliers, "ground fit support");
  buildFlags.add(build, "--ground-band", "ground_band", band, "ground classification band (m)");
  buildFlags.add(build, "--navigable-hits", "navigable_hits", navigableHits, "hits before a tile is navigable");

  // ---------------------------------------------------------------- query
  auto* query = app.add_subcommand("query", "Query a map dump");
  query->require_subcommand(1);
  std::string queryMap, queryTiles;
  MapOptions queryOptions;
  std::vector<double> center;
  std::vector<int> key;
  std::vector<long long> half;
  double radius = 0.0;
  auto addMapInputs = [&](CLI::App* sub) {
    sub->add_option("map", queryMap, "voxel dump")->required();
    sub->add_option("--tiles", queryTiles, "tile dump");
    queryOptions.attach(sub);
  };
  auto* radiusCmd = query->add_subcommand("radius", "Voxels whose centers lie within a radius");
  addMapInputs(radiusCmd);
  radiusCmd->add_option("--center", center, "x y z")->expected(3)->required();
  radiusCmd->add_option("--radius", radius, "meters")->required();
  auto* boxCmd = query->add_subcommand("box", "Voxels within a key box");
  addMapInputs(boxCmd);
  boxCmd->add_option("--key", key, "ix iy iz")->expected(3)->required();
  boxCmd->add_option("--half", half, "hx hy hz")->expected(3)->required();
  auto* cellCmd = query->add_subcommand("cell", "One voxel by key or point");
  addMapInputs(cellCmd);
  auto* cellKey = cellCmd->add_option("--key", key, "ix iy iz")->expected(3);
  auto* cellPoint = cellCmd->add_option("--point", center, "x y z")->expected(3);
  cellKey->excludes(cellPoint);

  // ------------------------------------------------------------- export2d
  auto* exportCmd = app.add_subcommand("export2d", "Write the 2D grid of a map dump or a frame log");
  std::string exportMap, exportTiles, exportLog, exportOut, exportMeta, exportOracle;
  bool navigableOnly = false;
  MapOptions exportOptions;
  auto* exportMapOpt = exportCmd->add_option("--map", exportMap, "voxel dump");
  exportCmd->add_option("--tiles", exportTiles, "tile dump");
  auto* exportLogOpt = exportCmd->add_option("--log", exportLog, "build from this frame log instead");
  exportMapOpt->excludes(exportLogOpt);
  exportCmd->add_option("-o,--output", exportOut, "PGM path")->required();
  exportCmd->add_option("--meta", exportMeta, "metadata sidecar path");
  exportCmd->add_option("--oracle", exportOracle, "also write the 3D projection grid here and compare");
  exportCmd->add_flag("--navigable-only", navigableOnly, "only navigable tiles count as free");
  exportOptions.attach(exportCmd);

  // ---------------------------------------------------------------- bench
  auto* bench = app.add_subcommand("bench", "Timing and memory comparison as CSV");
  std::string benchOut, benchConfig;
  Overrides benchFlags;
  std::vector<std::string> scenes;
  std::vector<double> resolutions;
  std::vector<int> depths;
  std::size_t points = 0, queries = 0, benchWorkers = 1;
  double benchRadius = 0.0, extent = 0.0;
  std::uint64_t benchSeed = 0;
  bench->add_option("-o,--output", benchOut, "CSV path")->required();
  bench->add_option("--config", benchConfig, "JSON bench config; flags override it");
  benchFlags.add(bench, "--scenes", "scenes", scenes, "random corridor room");
  benchFlags.add(bench, "--resolutions", "resolutions", resolutions, "meters");
  benchFlags.add(bench, "--depths", "depths", depths, "depth sweep");
  benchFlags.add(bench, "--points", "points", points, "points per scene");
  benchFlags.add(bench, "--queries", "radius_queries", queries, "radius queries per run");
  benchFlags.add(bench, "--radius", "radius", benchRadius, "radius query size (m)");
  benchFlags.add(bench, "--extent", "extent", extent, "scene side (m)");
  benchFlags.add(bench, "-j,--workers", "workers", benchWorkers, "worker threads");
  benchFlags.add(bench, "--seed", "seed", benchSeed, "random seed");
  benchFlags.addFlag(bench, "--no-dense", "dense", false, "skip the dense grid");
  benchFlags.addFlag(bench, "--no-octree", "octree", false, "skip the reference octree");

  // ------------------------------------------------------------------ gen
  auto* gen = app.add_subcommand("gen", "Write a synthetic frame log");
  std::string genOut, genScene;
  Overrides genFlags;
  std::size_t frames = 0, framePoints = 0;
  double genExtent = 0.0, genHeight = 0.0, drift = 0.0, noise = 0.0, step = 0.0;
  std::uint64_t genSeed = 0;
  gen->add_option("-o,--output", genOut, "frame log path")->required();
  genFlags.add(gen, "--scene", "kind", genScene, "random | corridor | room");
  genFlags.add(gen, "--frames", "frames", frames, "frame count");
  genFlags.add(gen, "--points", "points", framePoints, "points per frame");
  genFlags.add(gen, "--extent", "extent", genExtent, "sensed square side (m)");
  genFlags.add(gen, "--height", "height", genHeight, "wall height (m)");
  genFlags.add(gen, "--step", "step", step, "sensor advance per frame (m)");
  genFlags.add(gen, "--noise", "noise", noise, "point noise sigma (m)");
  genFlags.add(gen, "--drift", "drift", drift, "live pose error sigma (m); adds OPT records");
  genFlags.add(gen, "--seed", "seed", genSeed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (build->parsed()) {
    std::string file;
    if (!buildConfig.empty() && !readFile(buildConfig, file)) {
      std::cerr << "skimap: cannot read config " << buildConfig << '\n';
      return kExitData;
    }
    const std::string flags = buildFlags.json();
    const auto status = skimap_build_from_log(buildLog.c_str(), buildConfig.empty() ? nullptr : file.c_str(),
                                              flags.c_str(), buildOut.c_str(),
                                              buildTiles.empty() ? nullptr : buildTiles.c_str(),
                                              buildStats.empty() ? nullptr : buildStats.c_str(), nullptr);
    return report(status);
  }

  if (query->parsed()) {
    skimap_config config;
    if (int rc = queryOptions.resolve(config); rc != kExitOk) return rc;
    skimap_map* map = nullptr;
    auto status = skimap_load(&config, queryMap.c_str(), queryTiles.empty() ? nullptr : queryTiles.c_str(), &map);
    if (status != SKIMAP_OK) return report(status);
    int rc = kExitOk;
    skimap_voxel_list* list = nullptr;
    if (radiusCmd->parsed()) {
      status = skimap_radius_search(map, center[0], center[1], center[2], radius, &list);
      rc = status == SKIMAP_OK ? printList(list) : report(status);
    } else if (boxCmd->parsed()) {
      status = skimap_box_search(map, static_cast<int16_t>(key[0]), static_cast<int16_t>(key[1]),
                                 static_cast<int16_t>(key[2]), half[0], half[1], half[2], &list);
      rc = status == SKIMAP_OK ? printList(list) : report(status);
    } else {
      std::array<int16_t, 3> k{};
      if (cellPoint->count() > 0) {
        status = skimap_quantize(map, center[0], center[1], center[2], k.data());
      } else if (cellKey->count() > 0) {
        for (int a = 0; a < 3; ++a) {
          if (key[a] < -32768 || key[a] > 32767) {
            std::cerr << "skimap: key outside the 16-bit range\n";
            skimap_destroy(map);
            return kExitUsage;
          }
          k[a] = static_cast<int16_t>(key[a]);
        }
      } else {
        std::cerr << "skimap: cell needs --key or --point\n";
        skimap_destroy(map);
        return kExitUsage;
      }
      skimap_voxel v;
      int found = 0;
      if (status == SKIMAP_OK) status = skimap_get_voxel(map, k[0], k[1], k[2], &v, &found);
      if (status != SKIMAP_OK) {
        rc = report(status);
      } else if (found) {
        printVoxel(v);
      } else {
        std::printf("miss\n");
      }
    }
    skimap_destroy(map);
    return rc;
  }

  if (exportCmd->parsed()) {
    skimap_config config;
    if (int rc = exportOptions.resolve(config); rc != kExitOk) return rc;
    skimap_map* map = nullptr;
    skimap_status status;
    if (!exportLog.empty()) {
      std::string file;
      if (!exportOptions.configPath.empty() && !readFile(exportOptions.configPath, file)) {
        std::cerr << "skimap: cannot read config " << exportOptions.configPath << '\n';
        return kExitData;
      }
      const std::string flags = exportOptions.overrides.json();
      status = skimap_build_from_log(exportLog.c_str(), exportOptions.configPath.empty() ? nullptr : file.c_str(),
                                     flags.c_str(), nullptr, nullptr, nullptr, &map);
    } else if (!exportMap.empty()) {
      status = skimap_load(&config, exportMap.c_str(), exportTiles.empty() ? nullptr : exportTiles.c_str(), &map);
    } else {
      std::cerr << "skimap: export2d needs --map or --log\n";
      return kExitUsage;
    }
    if (status != SKIMAP_OK) return report(status);
    int matches = 1;
    status = skimap_export2d(map, exportOut.c_str(), exportMeta.empty() ? nullptr : exportMeta.c_str(),
                             navigableOnly ? 1 : 0, exportOracle.empty() ? nullptr : exportOracle.c_str(), &matches);
    skimap_destroy(map);
    if (status != SKIMAP_OK) return report(status);
    if (!matches) {
      std::cerr << "skimap: 2D grid differs from the 3D projection\n";
      return kExitInvariant;
    }
    return kExitOk;
  }

  if (bench->parsed()) {
    nlohmann::json merged = nlohmann::json::object();
    if (!benchConfig.empty()) {
      std::string file;
      if (!readFile(benchConfig, file)) {
        std::cerr << "skimap: cannot read config " << benchConfig << '\n';
        return kExitData;
      }
      try {
        merged = nlohmann::json::parse(file);
      } catch (const nlohmann::json::exception& e) {
        std::cerr << "skimap: bad bench config: " << e.what() << '\n';
        return kExitUsage;
      }
    }
    merged.update(nlohmann::json::parse(benchFlags.json()));
    return report(skimap_bench(merged.dump().c_str(), benchOut.c_str()));
  }

  if (gen->parsed()) {
    return report(skimap_generate_scene(genFlags.json().c_str(), genOut.c_str()));
  }
  return kExitUsage;
}
