#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "skimap/ground.hpp"
#include "skimap/skimap.hpp"

namespace skimap {

/// Every knob of a build or bench run. Serialized into each report.
struct RunConfig {
  double resolution = 0.05;
  int depth = 8;
  std::size_t workers = 1;
  std::size_t batchBound = 4;
  bool ground = true;
  std::optional<double> ceiling;
  std::uint64_t seed = 0x5eed5eedULL;
  std::string boundsPolicy = "reject";  // reject | skip
  /// Sample used for plain "x y z" point lines.
  double hitProbability = 1.0;
  double hitWeight = 1.0;
  double inlierThreshold = 0.02;
  std::size_t minInliers = 500;
  /// Ground classification band; defaults to 2 * resolution.
  std::optional<double> groundBand;
  std::uint32_t navigableHits = 3;
  std::string input;
  std::string output;

  /// Throws ArgumentError naming the first bad field.
  void validate() const;
  double band() const { return groundBand.value_or(2.0 * resolution); }
  MapConfig mapConfig() const;

  std::string toJson() const;
  /// Fields absent from `json` keep their current value. Unknown keys are an
  /// error.
  void mergeJson(const std::string& json);
};

struct BuildStats {
  std::size_t frames = 0;
  std::size_t points = 0;
  std::size_t optimizedRecords = 0;
  std::size_t optimizedRejected = 0;
  std::size_t cycles = 0;
  std::size_t integrated = 0;
  std::size_t reintegrated = 0;
  std::vector<std::string> faults;
  bool groundDetected = false;
  std::string groundError;
  std::size_t voxels = 0;
  std::size_t tiles = 0;
  std::size_t bytes = 0;
  double totalMicros = 0.0;
  /// Submit plus integration cycle time for each frame record.
  std::vector<double> frameMicros;
};

struct BuildResult {
  OccupancyMap map;
  BuildStats stats;
  std::optional<GroundModel> ground;
};

/// Replays a frame log: ground detection on the first frame (when enabled;
/// failure continues without it), one integration cycle after each frame,
/// OPT records forwarded as optimized poses, then cycles until nothing is
/// pending. Malformed input throws ParseError.
BuildResult buildFromLog(std::istream& log, const RunConfig& config);

/// Stats plus the full RunConfig as one JSON document.
std::string statsJson(const BuildStats& stats, const RunConfig& config);

}  // namespace skimap
