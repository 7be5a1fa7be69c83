#include "skimap/skimap_c.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "skimap/baselines.hpp"
#include "skimap/bench.hpp"
#include "skimap/dump.hpp"
#include "skimap/errors.hpp"
#include "skimap/grid2d.hpp"
#include "skimap/pipeline.hpp"
#include "skimap/scene.hpp"
#include "skimap/skimap.hpp"

struct skimap_map {
  skimap::OccupancyMap map;
};

struct skimap_voxel_list {
  std::vector<skimap::OccupancyMap::Voxel> voxels;
  bool clamped = false;
};

namespace {

thread_local std::string lastError;

class IoError : public skimap::Error {
 public:
  using Error::Error;
};

skimap_status fail(skimap_status status, const char* what) {
  lastError = what;
  return status;
}

/// Runs `body`, translating exceptions into status codes.
template <class F>
skimap_status guarded(F&& body) {
  try {
    lastError.clear();
    body();
    return SKIMAP_OK;
  } catch (const skimap::ArgumentError& e) {
    return fail(SKIMAP_ERR_ARGUMENT, e.what());
  } catch (const skimap::BoundsError& e) {
    return fail(SKIMAP_ERR_BOUNDS, e.what());
  } catch (const skimap::ErosionUnderflow& e) {
    return fail(SKIMAP_ERR_EROSION, e.what());
  } catch (const skimap::ParseError& e) {
    return fail(SKIMAP_ERR_PARSE, e.what());
  } catch (const IoError& e) {
    return fail(SKIMAP_ERR_IO, e.what());
  } catch (const skimap::GroundDetectionError& e) {
    return fail(SKIMAP_ERR_GROUND, e.what());
  } catch (const skimap::InvariantError& e) {
    return fail(SKIMAP_ERR_INVARIANT, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(SKIMAP_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SKIMAP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SKIMAP_ERR_INTERNAL, e.what());
  }
}

void require(bool condition, const char* what) {
  if (!condition) throw skimap::ArgumentError(what);
}

skimap::MapConfig toMapConfig(const skimap_config* c) {
  require(c != nullptr, "config is null");
  skimap::MapConfig m;
  m.resolution = c->resolution;
  m.setDepth(c->depth);
  m.workers = c->workers;
  m.seed = c->seed;
  m.navigableHits = c->navigable_hits;
  m.boundsPolicy = c->skip_out_of_bounds ? skimap::BoundsPolicy::SkipAndCount : skimap::BoundsPolicy::Reject;
  m.validate();
  return m;
}

std::ofstream openOut(const char* path) {
  std::ofstream os(path);
  if (!os) throw IoError(std::string("cannot write ") + path);
  return os;
}

std::ifstream openIn(const char* path) {
  std::ifstream is(path);
  if (!is) throw IoError(std::string("cannot read ") + path);
  return is;
}

void closeOut(std::ofstream& os, const char* path) {
  os.close();
  if (!os) throw IoError(std::string("failed writing ") + path);
}

std::vector<skimap::PointSample<skimap::Sample>> samplesFrom(const double* xyz, std::size_t count,
                                                             double probability, double weight) {
  require(xyz != nullptr || count == 0, "point buffer is null");
  require(probability >= 0.0 && probability <= 1.0, "probability must be in [0, 1]");
  require(weight > 0.0 && std::isfinite(weight), "weight must be positive");
  std::vector<skimap::PointSample<skimap::Sample>> cloud(count);
  for (std::size_t i = 0; i < count; ++i) {
    cloud[i] = {{xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]}, {probability, weight}};
  }
  return cloud;
}

skimap_voxel toC(const skimap::VoxelKey& k, const skimap::OccupancyVoxel& v) {
  return {k.ix, k.iy, k.iz, v.probability, v.weight};
}

skimap::RunConfig mergedRunConfig(const char* configJson, const char* overridesJson) {
  skimap::RunConfig config;
  if (configJson != nullptr) config.mergeJson(configJson);
  if (overridesJson != nullptr) config.mergeJson(overridesJson);
  config.validate();
  return config;
}

skimap::BenchConfig benchFromJson(const char* text) {
  skimap::BenchConfig c;
  if (text == nullptr) return c;
  const auto j = nlohmann::json::parse(text);
  require(j.is_object(), "bench config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "scenes") {
      c.scenes.clear();
      for (const auto& s : value) c.scenes.push_back(skimap::parseSceneKind(s.get<std::string>()));
    } else if (key == "resolutions") c.resolutions = value.get<std::vector<double>>();
    else if (key == "depths") c.depths = value.get<std::vector<int>>();
    else if (key == "points") c.points = value.get<std::size_t>();
    else if (key == "extent") c.extent = value.get<double>();
    else if (key == "height") c.height = value.get<double>();
    else if (key == "radius_queries") c.radiusQueries = value.get<std::size_t>();
    else if (key == "radius") c.radius = value.get<double>();
    else if (key == "workers") c.workers = value.get<std::size_t>();
    else if (key == "depth") c.depth = value.get<int>();
    else if (key == "sweep_resolution") c.sweepResolution = value.get<double>();
    else if (key == "sweep_scene") c.sweepScene = skimap::parseSceneKind(value.get<std::string>());
    else if (key == "dense") c.includeDense = value.get<bool>();
    else if (key == "octree") c.includeOctree = value.get<bool>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else throw skimap::ArgumentError("unknown bench key '" + key + "'");
  }
  return c;
}

skimap::SceneConfig sceneFromJson(const char* text) {
  skimap::SceneConfig c;
  if (text == nullptr) return c;
  const auto j = nlohmann::json::parse(text);
  require(j.is_object(), "scene config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") c.kind = skimap::parseSceneKind(value.get<std::string>());
    else if (key == "frames") c.frames = value.get<std::size_t>();
    else if (key == "points") c.pointsPerFrame = value.get<std::size_t>();
    else if (key == "extent") c.extent = value.get<double>();
    else if (key == "height") c.height = value.get<double>();
    else if (key == "sensor_height") c.sensorHeight = value.get<double>();
    else if (key == "step") c.step = value.get<double>();
    else if (key == "noise") c.noise = value.get<double>();
    else if (key == "drift") c.drift = value.get<double>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else throw skimap::ArgumentError("unknown scene key '" + key + "'");
  }
  return c;
}

}  // namespace

extern "C" {

const char* skimap_version(void) { return "0.1.0"; }

const char* skimap_last_error(void) { return lastError.c_str(); }

const char* skimap_status_name(skimap_status status) {
  switch (status) {
    case SKIMAP_OK: return "ok";
    case SKIMAP_ERR_ARGUMENT: return "argument error";
    case SKIMAP_ERR_BOUNDS: return "bounds error";
    case SKIMAP_ERR_EROSION: return "erosion underflow";
    case SKIMAP_ERR_PARSE: return "parse error";
    case SKIMAP_ERR_IO: return "io error";
    case SKIMAP_ERR_GROUND: return "ground detection error";
    case SKIMAP_ERR_INVARIANT: return "invariant violation";
    case SKIMAP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void skimap_config_default(skimap_config* config) {
  if (config == nullptr) return;
  const skimap::MapConfig m;
  config->resolution = m.resolution;
  config->depth = m.depthX;
  config->workers = m.workers;
  config->seed = m.seed;
  config->navigable_hits = m.navigableHits;
  config->skip_out_of_bounds = 0;
}

skimap_status skimap_create(const skimap_config* config, skimap_map** out) {
  return guarded([&] {
    require(out != nullptr, "output handle is null");
    *out = new skimap_map{skimap::OccupancyMap(toMapConfig(config))};
  });
}

void skimap_destroy(skimap_map* map) { delete map; }

skimap_status skimap_integrate_points(skimap_map* map, const double* xyz, size_t count, double probability,
                                      double weight, size_t workers) {
  return guarded([&] {
    require(map != nullptr, "map is null");
    const auto cloud = samplesFrom(xyz, count, probability, weight);
    map->map.integrateBatch(cloud, workers);
  });
}

skimap_status skimap_erode_points(skimap_map* map, const double* xyz, size_t count, double probability,
                                  double weight, size_t workers) {
  return guarded([&] {
    require(map != nullptr, "map is null");
    const auto cloud = samplesFrom(xyz, count, probability, weight);
    map->map.erodeBatch(cloud, workers);
  });
}

skimap_status skimap_quantize(const skimap_map* map, double x, double y, double z, int16_t key[3]) {
  return guarded([&] {
    require(map != nullptr && key != nullptr, "null argument");
    const auto k = map->map.quantize({x, y, z});
    key[0] = k.ix;
    key[1] = k.iy;
    key[2] = k.iz;
  });
}

skimap_status skimap_get_voxel(const skimap_map* map, int16_t ix, int16_t iy, int16_t iz, skimap_voxel* out,
                               int* found) {
  return guarded([&] {
    require(map != nullptr && out != nullptr && found != nullptr, "null argument");
    const skimap::VoxelKey key{ix, iy, iz};
    const auto v = map->map.getVoxel(key);
    *found = v.has_value();
    if (v) *out = toC(key, *v);
  });
}

skimap_status skimap_radius_search(const skimap_map* map, double x, double y, double z, double radius,
                                   skimap_voxel_list** out) {
  return guarded([&] {
    require(map != nullptr && out != nullptr, "null argument");
    auto result = map->map.radiusSearch({x, y, z}, radius);
    *out = new skimap_voxel_list{std::move(result.voxels), result.clamped};
  });
}

skimap_status skimap_box_search(const skimap_map* map, int16_t ix, int16_t iy, int16_t iz, int64_t hx,
                                int64_t hy, int64_t hz, skimap_voxel_list** out) {
  return guarded([&] {
    require(map != nullptr && out != nullptr, "null argument");
    auto result = map->map.boxSearch({ix, iy, iz}, {hx, hy, hz});
    *out = new skimap_voxel_list{std::move(result.voxels), result.clamped};
  });
}

size_t skimap_voxel_list_size(const skimap_voxel_list* list) { return list ? list->voxels.size() : 0; }

int skimap_voxel_list_clamped(const skimap_voxel_list* list) { return list && list->clamped ? 1 : 0; }

skimap_status skimap_voxel_list_get(const skimap_voxel_list* list, size_t index, skimap_voxel* out) {
  return guarded([&] {
    require(list != nullptr && out != nullptr, "null argument");
    require(index < list->voxels.size(), "index out of range");
    const auto& [key, voxel] = list->voxels[index];
    *out = toC(key, voxel);
  });
}

void skimap_voxel_list_destroy(skimap_voxel_list* list) { delete list; }

skimap_status skimap_get_stats(const skimap_map* map, skimap_stats* out) {
  return guarded([&] {
    require(map != nullptr && out != nullptr, "null argument");
    const auto memory = skimap::measureSkiMapMemory(map->map);
    *out = {memory.voxels, memory.tiles, memory.xNodes, memory.yNodes, memory.bytes};
  });
}

skimap_status skimap_check(const skimap_map* map) {
  return guarded([&] {
    require(map != nullptr, "map is null");
    if (!map->map.checkStructure()) throw skimap::InvariantError("map structure check failed");
  });
}

skimap_status skimap_save(const skimap_map* map, const char* voxel_path, const char* tile_path) {
  return guarded([&] {
    require(map != nullptr && voxel_path != nullptr, "null argument");
    auto voxels = openOut(voxel_path);
    skimap::writeVoxelDump(map->map, voxels);
    closeOut(voxels, voxel_path);
    if (tile_path != nullptr) {
      auto tiles = openOut(tile_path);
      skimap::writeTileDump(map->map, tiles);
      closeOut(tiles, tile_path);
    }
  });
}

skimap_status skimap_load(const skimap_config* config, const char* voxel_path, const char* tile_path,
                          skimap_map** out) {
  return guarded([&] {
    require(voxel_path != nullptr && out != nullptr, "null argument");
    auto loaded = std::make_unique<skimap_map>(skimap_map{skimap::OccupancyMap(toMapConfig(config))});
    auto voxels = openIn(voxel_path);
    skimap::readVoxelDump(loaded->map, voxels);
    if (tile_path != nullptr) {
      auto tiles = openIn(tile_path);
      skimap::readTileDump(loaded->map, tiles);
    }
    *out = loaded.release();
  });
}

skimap_status skimap_export2d(const skimap_map* map, const char* pgm_path, const char* meta_path,
                              int navigable_only, const char* oracle_pgm_path, int* matches) {
  return guarded([&] {
    require(map != nullptr && pgm_path != nullptr, "null argument");
    const skimap::Grid2DOptions options{navigable_only != 0};
    const auto grid = skimap::buildGrid2D(map->map, options);
    auto pgm = openOut(pgm_path);
    skimap::writePgm(grid, pgm);
    closeOut(pgm, pgm_path);
    if (meta_path != nullptr) {
      auto meta = openOut(meta_path);
      std::string image = pgm_path;
      if (const auto slash = image.find_last_of('/'); slash != std::string::npos) image = image.substr(slash + 1);
      skimap::writeGridMeta(grid, meta, image);
      closeOut(meta, meta_path);
    }
    if (oracle_pgm_path != nullptr) {
      const auto oracle = skimap::projectGrid2D(map->map, options);
      auto os = openOut(oracle_pgm_path);
      skimap::writePgm(oracle, os);
      closeOut(os, oracle_pgm_path);
      if (matches != nullptr) *matches = oracle == grid;
    }
  });
}

skimap_status skimap_build_from_log(const char* log_path, const char* config_json, const char* overrides_json,
                                    const char* voxel_path, const char* tile_path, const char* stats_path,
                                    skimap_map** out) {
  return guarded([&] {
    require(log_path != nullptr, "log path is null");
    auto config = mergedRunConfig(config_json, overrides_json);
    config.input = log_path;
    if (voxel_path != nullptr) config.output = voxel_path;
    auto log = openIn(log_path);
    auto result = skimap::buildFromLog(log, config);
    if (voxel_path != nullptr) {
      auto os = openOut(voxel_path);
      skimap::writeVoxelDump(result.map, os);
      closeOut(os, voxel_path);
    }
    if (tile_path != nullptr) {
      auto os = openOut(tile_path);
      skimap::writeTileDump(result.map, os);
      closeOut(os, tile_path);
    }
    if (stats_path != nullptr) {
      auto os = openOut(stats_path);
      os << skimap::statsJson(result.stats, config) << '\n';
      closeOut(os, stats_path);
    }
    if (!result.stats.faults.empty()) {
      throw skimap::InvariantError(result.stats.faults.front());
    }
    if (out != nullptr) *out = new skimap_map{std::move(result.map)};
  });
}

skimap_status skimap_run_config(const char* config_json, const char* overrides_json, char** out_json) {
  return guarded([&] {
    require(out_json != nullptr, "output is null");
    const std::string text = mergedRunConfig(config_json, overrides_json).toJson();
    char* copy = new char[text.size() + 1];
    std::memcpy(copy, text.c_str(), text.size() + 1);
    *out_json = copy;
  });
}

skimap_status skimap_bench(const char* bench_json, const char* csv_path) {
  return guarded([&] {
    require(csv_path != nullptr, "csv path is null");
    const auto config = benchFromJson(bench_json);
    const auto rows = skimap::runBench(config);
    auto os = openOut(csv_path);
    skimap::writeBenchCsv(os, rows, config);
    closeOut(os, csv_path);
  });
}

skimap_status skimap_generate_scene(const char* scene_json, const char* log_path) {
  return guarded([&] {
    require(log_path != nullptr, "log path is null");
    const auto records = skimap::generateScene(sceneFromJson(scene_json));
    auto os = openOut(log_path);
    skimap::writeLog(os, records);
    closeOut(os, log_path);
  });
}

void skimap_string_free(char* text) { delete[] text; }

}  // extern "C"
