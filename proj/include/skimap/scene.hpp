#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "skimap/frame_log.hpp"

namespace skimap {

enum class SceneKind { Random, Corridor, Room };

SceneKind parseSceneKind(const std::string& name);
std::string sceneKindName(SceneKind kind);

/// World frame: z up, floor on z = 0.
struct SceneConfig {
  SceneKind kind = SceneKind::Room;
  std::size_t frames = 1;
  std::size_t pointsPerFrame = 2000;
  double extent = 4.0;       // side of the sensed square around the sensor, meters
  double height = 2.5;       // wall / roof height
  double sensorHeight = 1.0;
  double step = 0.5;         // sensor advance along +x between frames
  double noise = 0.002;      // gaussian noise on every coordinate
  /// Standard deviation of the translation error on live poses. When
  /// positive, an OPT record with the true pose follows one frame later.
  double drift = 0.0;
  std::uint64_t seed = 1;
};

/// Static world-frame cloud for benchmarks. Random fills a box of side
/// `extent` and height `height`; Corridor is floor, two walls and a roof
/// (roof above `height`); Room is a floor (70%) and one wall (30%).
std::vector<Point3> generateCloud(SceneKind kind, std::size_t points, double extent, double height,
                                  std::uint64_t seed, double noise = 0.0);

/// Frames in their sensor frame, in arrival order, interleaved with OPT
/// records when drift is enabled.
std::vector<LogRecord> generateScene(const SceneConfig& config);

/// True sensor-to-world pose of frame `index`.
Pose scenePose(const SceneConfig& config, std::size_t index);

void writeLog(std::ostream& os, const std::vector<LogRecord>& records);

}  // namespace skimap
