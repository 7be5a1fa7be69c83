#include "skimap/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <istream>

#include <json.hpp>

#include "skimap/baselines.hpp"
#include "skimap/errors.hpp"
#include "skimap/frame_log.hpp"
#include "skimap/posegraph.hpp"

namespace skimap {

namespace {

using Clock = std::chrono::steady_clock;

double micros(Clock::time_point since) {
  return std::chrono::duration<double, std::micro>(Clock::now() - since).count();
}

nlohmann::json configJson(const RunConfig& c) {
  nlohmann::json j;
  j["resolution"] = c.resolution;
  j["depth"] = c.depth;
  j["workers"] = c.workers;
  j["batch_bound"] = c.batchBound;
  j["ground"] = c.ground;
  j["ceiling"] = c.ceiling ? nlohmann::json(*c.ceiling) : nlohmann::json(nullptr);
  j["seed"] = c.seed;
  j["bounds_policy"] = c.boundsPolicy;
  j["hit_probability"] = c.hitProbability;
  j["hit_weight"] = c.hitWeight;
  j["inlier_threshold"] = c.inlierThreshold;
  j["min_inliers"] = c.minInliers;
  j["ground_band"] = c.band();
  j["navigable_hits"] = c.navigableHits;
  j["input"] = c.input;
  j["output"] = c.output;
  return j;
}

}  // namespace

void RunConfig::validate() const {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw ArgumentError("resolution must be positive");
  if (depth < 1 || depth > 255) throw ArgumentError("depth must be in [1, 255]");
  if (workers == 0) throw ArgumentError("workers must be at least 1");
  if (batchBound == 0) throw ArgumentError("batch_bound must be at least 1");
  if (ceiling && !std::isfinite(*ceiling)) throw ArgumentError("ceiling must be finite");
  if (boundsPolicy != "reject" && boundsPolicy != "skip") {
    throw ArgumentError("bounds_policy must be 'reject' or 'skip'");
  }
  if (!(hitProbability >= 0.0 && hitProbability <= 1.0)) throw ArgumentError("hit_probability must be in [0, 1]");
  if (!(hitWeight > 0.0) || !std::isfinite(hitWeight)) throw ArgumentError("hit_weight must be positive");
  if (!(inlierThreshold > 0.0)) throw ArgumentError("inlier_threshold must be positive");
  if (groundBand && !(*groundBand >= 0.0)) throw ArgumentError("ground_band must be non-negative");
}

MapConfig RunConfig::mapConfig() const {
  MapConfig m;
  m.resolution = resolution;
  m.setDepth(depth);
  m.workers = workers;
  m.seed = seed;
  m.navigableHits = navigableHits;
  m.boundsPolicy = boundsPolicy == "skip" ? BoundsPolicy::SkipAndCount : BoundsPolicy::Reject;
  return m;
}

std::string RunConfig::toJson() const { return configJson(*this).dump(2); }

void RunConfig::mergeJson(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ArgumentError("config must be a JSON object");
  RunConfig next = *this;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "resolution") next.resolution = value.get<double>();
      else if (key == "depth") next.depth = value.get<int>();
      else if (key == "workers") next.workers = value.get<std::size_t>();
      else if (key == "batch_bound") next.batchBound = value.get<std::size_t>();
      else if (key == "ground") next.ground = value.get<bool>();
      else if (key == "ceiling") next.ceiling = value.is_null() ? std::nullopt : std::optional(value.get<double>());
      else if (key == "seed") next.seed = value.get<std::uint64_t>();
      else if (key == "bounds_policy") next.boundsPolicy = value.get<std::string>();
      else if (key == "hit_probability") next.hitProbability = value.get<double>();
      else if (key == "hit_weight") next.hitWeight = value.get<double>();
      else if (key == "inlier_threshold") next.inlierThreshold = value.get<double>();
      else if (key == "min_inliers") next.minInliers = value.get<std::size_t>();
      else if (key == "ground_band") next.groundBand = value.is_null() ? std::nullopt : std::optional(value.get<double>());
      else if (key == "navigable_hits") next.navigableHits = value.get<std::uint32_t>();
      else if (key == "input") next.input = value.get<std::string>();
      else if (key == "output") next.output = value.get<std::string>();
      else throw ArgumentError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("bad config value: ") + e.what());
  }
  *this = std::move(next);
}

BuildResult buildFromLog(std::istream& log, const RunConfig& config) {
  config.validate();
  const auto start = Clock::now();
  BuildResult result{OccupancyMap(config.mapConfig()), {}, std::nullopt};
  BuildStats& stats = result.stats;

  IntegratorConfig integrator;
  integrator.batchBound = config.batchBound;
  integrator.placement.ceiling = config.ceiling;
  integrator.placement.groundBand = config.band();
  integrator.placement.workers = config.workers;
  PoseManager manager(integrator);

  auto absorb = [&](const CycleReport& report) {
    ++stats.cycles;
    stats.integrated += report.integrated.size();
    stats.reintegrated += report.reintegrated.size();
    stats.faults.insert(stats.faults.end(), report.faults.begin(), report.faults.end());
  };

  FrameLogReader reader(log);
  bool first = true;
  while (auto record = reader.next()) {
    const auto frameStart = Clock::now();
    if (record->kind == LogRecord::Kind::Optimized) {
      ++stats.optimizedRecords;
      const std::pair<FrameId, Pose> update{record->id, record->pose};
      stats.optimizedRejected += manager.submitOptimizedPoses({&update, 1}).rejected.size();
      continue;
    }

    FrameRecord& frame = record->frame;
    if (first && config.ground) {
      GroundConfig gc;
      gc.inlierThreshold = config.inlierThreshold;
      gc.minInliers = config.minInliers;
      gc.seed = config.seed;
      try {
        result.ground = expressIn(detectGround(frame.points, gc), frame.poseQueue.front());
        stats.groundDetected = true;
        PlacementOptions placement = integrator.placement;
        placement.ground = result.ground;
        manager.setPlacement(placement);
      } catch (const GroundDetectionError& e) {
        stats.groundError = e.what();
      }
    }
    first = false;
    frame.sample = {config.hitProbability, config.hitWeight};
    stats.points += frame.points.size();
    ++stats.frames;
    try {
      manager.submitFrame(std::move(frame));
    } catch (const ArgumentError& e) {
      throw ParseError(record->line, e.what());
    }
    absorb(manager.integrationCycle(result.map));
    stats.frameMicros.push_back(micros(frameStart));
  }

  while (manager.pendingCount() > 0) {
    const auto report = manager.integrationCycle(result.map);
    absorb(report);
    if (report.touched() == 0) break;
  }

  stats.voxels = result.map.voxelCount();
  stats.tiles = result.map.tileCount();
  stats.bytes = measureSkiMapMemory(result.map).bytes;
  stats.totalMicros = micros(start);
  return result;
}

std::string statsJson(const BuildStats& stats, const RunConfig& config) {
  nlohmann::json j;
  j["config"] = configJson(config);
  j["frames"] = stats.frames;
  j["points"] = stats.points;
  j["optimized_records"] = stats.optimizedRecords;
  j["optimized_rejected"] = stats.optimizedRejected;
  j["cycles"] = stats.cycles;
  j["integrated"] = stats.integrated;
  j["reintegrated"] = stats.reintegrated;
  j["faults"] = stats.faults;
  j["ground_detected"] = stats.groundDetected;
  if (!stats.groundError.empty()) j["ground_error"] = stats.groundError;
  j["voxels"] = stats.voxels;
  j["tiles"] = stats.tiles;
  j["bytes"] = stats.bytes;
  j["total_us"] = stats.totalMicros;
  j["frame_us"] = stats.frameMicros;
  return j.dump(2);
}

}  // namespace skimap
