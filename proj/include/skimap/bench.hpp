#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "skimap/pipeline.hpp"
#include "skimap/scene.hpp"

namespace skimap {

struct BenchConfig {
  std::vector<SceneKind> scenes{SceneKind::Room, SceneKind::Corridor, SceneKind::Random};
  std::vector<double> resolutions{0.05, 0.1, 0.2};
  std::vector<int> depths{4, 8, 16, 32, 64};
  std::size_t points = 100000;
  double extent = 10.0;
  double height = 2.5;
  std::size_t radiusQueries = 100;
  double radius = 0.5;
  std::size_t workers = 1;
  int depth = 8;              // used outside the depth sweep
  double sweepResolution = 0.05;
  SceneKind sweepScene = SceneKind::Room;
  bool includeDense = true;
  bool includeOctree = true;
  std::uint64_t seed = 1;

  void validate() const;
  std::string toJson() const;
};

struct BenchRow {
  std::string structure;
  std::string operation;
  std::string scene;
  double resolution = 0.0;
  std::size_t points = 0;
  double timeMicros = 0.0;
  std::size_t bytes = 0;
};

/// Integration, full visit, 2D extraction, radius search and memory for
/// SkiMap, DenseGrid and ReferenceOctree on every scene and resolution,
/// then the SkiMap depth sweep. Non-timing columns depend only on the
/// config.
std::vector<BenchRow> runBench(const BenchConfig& config);

/// CSV with the config as leading '#' comment lines.
void writeBenchCsv(std::ostream& os, const std::vector<BenchRow>& rows, const BenchConfig& config);

}  // namespace skimap
