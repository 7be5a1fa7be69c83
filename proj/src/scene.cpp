#include "skimap/scene.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "skimap/errors.hpp"

namespace skimap {

SceneKind parseSceneKind(const std::string& name) {
  if (name == "random") return SceneKind::Random;
  if (name == "corridor") return SceneKind::Corridor;
  if (name == "room") return SceneKind::Room;
  throw ArgumentError("unknown scene '" + name + "' (random, corridor, room)");
}

std::string sceneKindName(SceneKind kind) {
  switch (kind) {
    case SceneKind::Random: return "random";
    case SceneKind::Corridor: return "corridor";
    case SceneKind::Room: return "room";
  }
  return "room";
}

namespace {

void requireScene(double extent, double height) {
  if (!(extent > 0.0) || !(height > 0.0)) throw ArgumentError("scene extent and height must be positive");
}

/// Points on the scene surfaces inside the square of side `extent` centered
/// on (cx, cy).
std::vector<Point3> sampleSurfaces(SceneKind kind, std::size_t n, double cx, double cy, double extent,
                                   double height, double noise, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, noise > 0.0 ? noise : 1.0);
  const double half = extent / 2.0;
  auto across = [&](double c) { return c - half + extent * u(rng); };
  std::vector<Point3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point3 p;
    const double pick = u(rng);
    switch (kind) {
      case SceneKind::Random:
        p = {across(cx), across(cy), height * u(rng)};
        break;
      case SceneKind::Corridor: {
        const double wall = std::min(half, 1.0);
        if (pick < 0.5) {
          p = {across(cx), cy - wall + 2.0 * wall * u(rng), 0.0};
        } else if (pick < 0.8) {
          p = {across(cx), pick < 0.65 ? cy - wall : cy + wall, height * u(rng)};
        } else {
          p = {across(cx), cy - wall + 2.0 * wall * u(rng), height};
        }
        break;
      }
      case SceneKind::Room:
        if (pick < 0.7) {
          p = {across(cx), across(cy), 0.0};
        } else {
          p = {half, across(cy), height * u(rng)};
        }
        break;
    }
    if (noise > 0.0) p += Point3(jitter(rng), jitter(rng), jitter(rng));
    out.push_back(p);
  }
  return out;
}

}  // namespace

std::vector<Point3> generateCloud(SceneKind kind, std::size_t points, double extent, double height,
                                  std::uint64_t seed, double noise) {
  requireScene(extent, height);
  std::mt19937_64 rng(seed);
  return sampleSurfaces(kind, points, 0.0, 0.0, extent, height, noise, rng);
}

Pose scenePose(const SceneConfig& config, std::size_t index) {
  Pose pose;
  const double yaw = 0.1 * static_cast<double>(index);
  pose.rotation = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  pose.translation = {config.step * static_cast<double>(index), 0.0, config.sensorHeight};
  return pose;
}

std::vector<LogRecord> generateScene(const SceneConfig& config) {
  requireScene(config.extent, config.height);
  if (config.drift < 0.0 || config.noise < 0.0) throw ArgumentError("drift and noise must be non-negative");
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> drift(0.0, config.drift > 0.0 ? config.drift : 1.0);
  std::vector<LogRecord> records;
  for (std::size_t i = 0; i < config.frames; ++i) {
    const Pose truth = scenePose(config, i);
    const Pose toSensor = truth.inverse();
    LogRecord rec;
    rec.kind = LogRecord::Kind::Frame;
    rec.frame.id = i;
    rec.frame.timestamp = 0.1 * static_cast<double>(i);
    for (const auto& w : sampleSurfaces(config.kind, config.pointsPerFrame, truth.translation.x(),
                                        truth.translation.y(), config.extent, config.height, config.noise,
                                        rng)) {
      rec.frame.points.push_back(toSensor.apply(w));
    }
    Pose live = truth;
    // The first frame anchors the map and is never corrected.
    if (config.drift > 0.0 && i > 0) live.translation += Eigen::Vector3d(drift(rng), drift(rng), 0.0);
    rec.frame.poseQueue.push_back(live);
    records.push_back(std::move(rec));

    // Corrections arrive one frame late.
    if (config.drift > 0.0 && i > 1) {
      LogRecord opt;
      opt.kind = LogRecord::Kind::Optimized;
      opt.id = i - 1;
      opt.pose = scenePose(config, i - 1);
      records.push_back(std::move(opt));
    }
  }
  if (config.drift > 0.0 && config.frames > 1) {
    LogRecord opt;
    opt.kind = LogRecord::Kind::Optimized;
    opt.id = config.frames - 1;
    opt.pose = scenePose(config, config.frames - 1);
    records.push_back(std::move(opt));
  }
  return records;
}

void writeLog(std::ostream& os, const std::vector<LogRecord>& records) {
  for (const auto& rec : records) {
    if (rec.kind == LogRecord::Kind::Frame) {
      writeFrame(os, rec.frame, rec.frame.poseQueue.front());
    } else {
      writeOptimized(os, rec.id, rec.pose);
    }
  }
}

}  // namespace skimap
