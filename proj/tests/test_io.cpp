#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <sstream>

#include "skimap/bench.hpp"
#include "skimap/dump.hpp"
#include "skimap/frame_log.hpp"
#include "skimap/pipeline.hpp"
#include "skimap/scene.hpp"
#include "support.hpp"

using namespace skimap;

namespace {

std::size_t parseErrorLine(const std::string& text) {
  std::istringstream is(text);
  FrameLogReader reader(is);
  try {
    while (reader.next()) {
    }
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::string logText(const std::vector<LogRecord>& records) {
  std::ostringstream os;
  writeLog(os, records);
  return os.str();
}

BuildResult build(const std::string& log, const RunConfig& config) {
  std::istringstream is(log);
  return buildFromLog(is, config);
}

bool mapsClose(const OccupancyMap& a, const OccupancyMap& b, double tol) {
  const auto va = a.collectVoxels();
  const auto vb = b.collectVoxels();
  if (va.size() != vb.size()) return false;
  for (std::size_t i = 0; i < va.size(); ++i) {
    if (!(va[i].first == vb[i].first)) return false;
    if (std::abs(va[i].second.probability - vb[i].second.probability) > tol) return false;
    if (std::abs(va[i].second.weight - vb[i].second.weight) > tol) return false;
  }
  bool tilesMatch = a.tileCount() == b.tileCount();
  a.visit2D([&](const Column& c) {
    if (!c.tile) return;
    const auto t = b.tile(c.ix, c.iy);
    if (!t || t->hits != c.tile->hits || std::abs(t->weight - c.tile->weight) > tol ||
        std::abs(t->heightSum - c.tile->heightSum) > tol) {
      tilesMatch = false;
    }
  });
  return tilesMatch;
}

RunConfig quickConfig() {
  RunConfig c;
  c.resolution = 0.05;
  c.minInliers = 200;
  return c;
}

}  // namespace

// ------------------------------------------------------------------ frame log

TEST_CASE("frame log records parse in arrival order") {
  const std::string text =
      "# header comment\n"
      "FRAME 4 0.5 1 2 3 0 0 0 1\n"
      "0.1 0.2 0.3\n"
      "\n"
      "-1 -2 -3\n"
      "OPT 4 0 0 0 0 0 0 2\n"
      "FRAME 5 0.6 0 0 0 0 0 0 1\n"
      "1 1 1 0.7 2.5\n";
  std::istringstream is(text);
  FrameLogReader reader(is);
  auto a = reader.next();
  REQUIRE(a);
  CHECK(a->kind == LogRecord::Kind::Frame);
  CHECK(a->line == 2);
  CHECK(a->frame.id == 4);
  CHECK(a->frame.timestamp == 0.5);
  REQUIRE(a->frame.points.size() == 2);
  CHECK(a->frame.points[1] == Point3(-1, -2, -3));
  CHECK(a->frame.samples.empty());
  CHECK(a->frame.poseQueue.front().translation == Point3(1, 2, 3));
  auto b = reader.next();
  REQUIRE(b);
  CHECK(b->kind == LogRecord::Kind::Optimized);
  CHECK(b->id == 4);
  CHECK(b->pose.approxEquals(Pose::identity()));
  auto c = reader.next();
  REQUIRE(c);
  REQUIRE(c->frame.samples.size() == 1);
  CHECK(c->frame.samples[0].probability == 0.7);
  CHECK(c->frame.samples[0].weight == 2.5);
  CHECK_FALSE(reader.next());
}

TEST_CASE("malformed frame logs report the offending line") {
  CHECK(parseErrorLine("1 2 3\n") == 1);
  CHECK(parseErrorLine("FRAME 1 0 0 0 0 0 0 0 1\n1 2 x\n") == 2);
  CHECK(parseErrorLine("FRAME 1 0 0 0 0 0 0 1\n") == 1);
  CHECK(parseErrorLine("FRAME 1 0 0 0 0 0 0 0 1\n1 2\n") == 2);
  CHECK(parseErrorLine("FRAME 1 0 0 0 0 0 0 0 1\n1 2 3\n1 2 3 0.5 1\n") == 3);
  CHECK(parseErrorLine("FRAME 1 0 0 0 0 0 0 0 1\n1 2 3 1.5 1\n") == 2);
  CHECK(parseErrorLine("FRAME 1 0 0 0 0 0 0 0 1\n1 2 3 0.5 0\n") == 2);
  CHECK(parseErrorLine("# c\nFRAME 1 0 0 0 0 0 0 0 0\n") == 2);
  CHECK(parseErrorLine("FRAME -1 0 0 0 0 0 0 0 1\n") == 1);
  CHECK(parseErrorLine("FRAME 1 0 0 0 0 0 0 0 1\nnan 0 0\n") == 2);
  CHECK(parseErrorLine("OPT 1 0 0 0 0 0 0\n") == 1);
  CHECK(parseErrorLine("FRAME 1 0 0 0 0 0 0 0 1\n1 2 3\n") == 0);
}

TEST_CASE("written frames read back exactly") {
  FrameRecord frame;
  frame.id = 17;
  frame.timestamp = 1.0 / 3.0;
  frame.points = testing_support::randomCloud(200, 5.0, 2);
  for (const auto& ps : testing_support::withSamples(frame.points, 3)) frame.samples.push_back(ps.sample);
  const Pose pose = Pose::fromQuaternion({0.1, -0.2, 0.3}, Eigen::Quaterniond(0.7, 0.1, 0.2, -0.3));
  std::ostringstream os;
  writeFrame(os, frame, pose);
  writeOptimized(os, 17, pose);
  std::istringstream is(os.str());
  FrameLogReader reader(is);
  const auto back = reader.next();
  REQUIRE(back);
  CHECK(back->frame.id == 17);
  CHECK(back->frame.timestamp == frame.timestamp);
  REQUIRE(back->frame.points.size() == frame.points.size());
  for (std::size_t i = 0; i < frame.points.size(); ++i) {
    CHECK(back->frame.points[i] == frame.points[i]);
    CHECK(back->frame.samples[i].probability == frame.samples[i].probability);
    CHECK(back->frame.samples[i].weight == frame.samples[i].weight);
  }
  CHECK(back->frame.poseQueue.front().approxEquals(pose, 1e-12));
  const auto opt = reader.next();
  REQUIRE(opt);
  CHECK(opt->pose.approxEquals(pose, 1e-12));
}

// --------------------------------------------------------------------- scenes

TEST_CASE("scene generation is deterministic per seed") {
  SceneConfig cfg;
  cfg.kind = SceneKind::Corridor;
  cfg.frames = 4;
  cfg.pointsPerFrame = 300;
  cfg.drift = 0.05;
  const std::string a = logText(generateScene(cfg));
  CHECK(a == logText(generateScene(cfg)));
  cfg.seed = 2;
  CHECK(a != logText(generateScene(cfg)));

  std::size_t frames = 0, opts = 0;
  for (const auto& r : generateScene(cfg)) (r.kind == LogRecord::Kind::Frame ? frames : opts)++;
  CHECK(frames == 4);
  CHECK(opts == 3);
  CHECK(parseSceneKind("room") == SceneKind::Room);
  CHECK_THROWS_AS(parseSceneKind("forest"), ArgumentError);
}

TEST_CASE("room scene splits floor and wall 70/30") {
  const auto cloud = generateCloud(SceneKind::Room, 10000, 4.0, 2.5, 5);
  std::size_t floor = 0;
  for (const auto& p : cloud) floor += p.z() == 0.0;
  CHECK(floor > 6700);
  CHECK(floor < 7300);
}

// ------------------------------------------------------------------- pipeline

TEST_CASE("empty log builds an empty map") {
  const auto result = build("", quickConfig());
  CHECK(result.map.empty());
  CHECK(result.stats.frames == 0);
  CHECK(result.stats.voxels == 0);
  CHECK(voxelDumpString(result.map).empty());
  CHECK(tileDumpString(result.map).empty());
}

TEST_CASE("one-frame log matches direct integration of that frame") {
  SceneConfig scene;
  scene.frames = 1;
  scene.pointsPerFrame = 3000;
  const auto records = generateScene(scene);
  const FrameRecord& frame = records.front().frame;
  const Pose& pose = frame.poseQueue.front();

  SUBCASE("without ground tracking") {
    RunConfig cfg = quickConfig();
    cfg.ground = false;
    const auto result = build(logText(records), cfg);
    OccupancyMap direct(cfg.mapConfig());
    std::vector<PointSample<Sample>> cloud;
    for (const auto& p : frame.points) cloud.push_back({pose.apply(p), Sample{1.0, 1.0}});
    direct.integrateBatch(cloud);
    CHECK(voxelDumpString(result.map) == voxelDumpString(direct));
    CHECK(result.map.tileCount() == 0);
  }
  SUBCASE("with ground tracking") {
    const RunConfig cfg = quickConfig();
    const auto result = build(logText(records), cfg);
    REQUIRE(result.stats.groundDetected);
    GroundConfig gc;
    gc.minInliers = cfg.minInliers;
    gc.seed = cfg.seed;
    PlacementOptions placement;
    placement.ground = expressIn(detectGround(frame.points, gc), pose);
    placement.groundBand = cfg.band();
    OccupancyMap direct(cfg.mapConfig());
    placeFrame(direct, frame, pose, placement, PlacementMode::Fuse);
    CHECK(voxelDumpString(result.map) == voxelDumpString(direct));
    CHECK(tileDumpString(result.map) == tileDumpString(direct));
    CHECK(result.map.tileCount() > 0);
    // The floor ends up on z = 0 of the zero frame.
    CHECK(std::abs(result.ground->toZeroFrame({0.3, 0.2, 0.0}).z()) < 0.01);
  }
}

TEST_CASE("log with optimized poses equals a fresh build under the final poses") {
  for (SceneKind kind : {SceneKind::Room, SceneKind::Corridor}) {
    SceneConfig scene;
    scene.kind = kind;
    scene.frames = 6;
    scene.pointsPerFrame = 2000;
    scene.drift = 0.08;
    scene.seed = 9;
    const auto records = generateScene(scene);

    std::map<FrameId, Pose> finalPose;
    for (const auto& r : records) {
      if (r.kind == LogRecord::Kind::Frame) finalPose[r.frame.id] = r.frame.poseQueue.front();
      else finalPose[r.id] = r.pose;
    }
    std::ostringstream fresh;
    for (const auto& r : records) {
      if (r.kind == LogRecord::Kind::Frame) writeFrame(fresh, r.frame, finalPose.at(r.frame.id));
    }

    const RunConfig cfg = quickConfig();
    const auto replayed = build(logText(records), cfg);
    const auto direct = build(fresh.str(), cfg);
    CHECK(replayed.stats.reintegrated == 5);
    CHECK(replayed.stats.faults.empty());
    CHECK(direct.stats.reintegrated == 0);
    CHECK(mapsClose(replayed.map, direct.map, 1e-6));
  }
}

TEST_CASE("malformed log fails the build with its line number") {
  const std::string text = "FRAME 0 0 0 0 1 0 0 0 1\n0 0 0\n0 0 zero\n";
  try {
    build(text, quickConfig());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(build("FRAME 0 0 0 0 1 0 0 0 1\nFRAME 0 0 0 0 1 0 0 0 1\n", quickConfig()), ParseError);
}

TEST_CASE("ground detection failure falls back to plain voxels") {
  SceneConfig scene;
  scene.kind = SceneKind::Random;
  scene.pointsPerFrame = 2000;
  const auto result = build(logText(generateScene(scene)), quickConfig());
  CHECK_FALSE(result.stats.groundDetected);
  CHECK_FALSE(result.stats.groundError.empty());
  CHECK(result.map.tileCount() == 0);
  CHECK(result.map.voxelCount() > 0);
}

TEST_CASE("optimized poses for unknown frames are counted, not fatal") {
  const std::string text = "FRAME 0 0 0 0 1 0 0 0 1\n0 0 0\nOPT 9 0 0 0 0 0 0 1\n";
  RunConfig cfg = quickConfig();
  cfg.ground = false;
  const auto result = build(text, cfg);
  CHECK(result.stats.optimizedRecords == 1);
  CHECK(result.stats.optimizedRejected == 1);
  CHECK(result.map.voxelCount() == 1);
}

TEST_CASE("run config validation and JSON") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.band() == doctest::Approx(0.1));
  RunConfig bad = c;
  bad.resolution = 0.0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = c;
  bad.boundsPolicy = "wrap";
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = c;
  bad.hitProbability = 1.5;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = c;
  bad.depth = 0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);

  RunConfig changed;
  changed.mergeJson(R"({"resolution": 0.2, "ceiling": 2.0, "ground": false, "bounds_policy": "skip"})");
  CHECK(changed.resolution == 0.2);
  CHECK(changed.ceiling == std::optional<double>(2.0));
  CHECK_FALSE(changed.ground);
  CHECK(changed.mapConfig().boundsPolicy == BoundsPolicy::SkipAndCount);
  CHECK(changed.band() == doctest::Approx(0.4));

  RunConfig copy;
  copy.mergeJson(changed.toJson());
  CHECK(copy.toJson() == changed.toJson());
  CHECK_THROWS_AS(copy.mergeJson(R"({"resolutoin": 0.1})"), ArgumentError);
  CHECK_THROWS_AS(copy.mergeJson(R"({"depth": "deep"})"), ArgumentError);
  CHECK_THROWS_AS(copy.mergeJson("[1, 2]"), ArgumentError);
  CHECK_THROWS_AS(copy.mergeJson("{"), ArgumentError);
  CHECK(copy.toJson() == changed.toJson());

  BuildStats stats;
  const std::string text = statsJson(stats, changed);
  CHECK(text.find("\"config\"") != std::string::npos);
  CHECK(text.find("\"bounds_policy\": \"skip\"") != std::string::npos);
}

// ---------------------------------------------------------------------- dumps

TEST_CASE("dump, load, dump is byte-identical") {
  for (SceneKind kind : {SceneKind::Room, SceneKind::Corridor, SceneKind::Random}) {
    SceneConfig scene;
    scene.kind = kind;
    scene.frames = 3;
    scene.pointsPerFrame = 2000;
    scene.drift = 0.03;
    const auto built = build(logText(generateScene(scene)), quickConfig());
    const std::string voxels = voxelDumpString(built.map);
    const std::string tiles = tileDumpString(built.map);
    OccupancyMap loaded(quickConfig().mapConfig());
    std::istringstream vs(voxels);
    std::istringstream ts(tiles);
    readVoxelDump(loaded, vs);
    readTileDump(loaded, ts);
    CHECK(voxelDumpString(loaded) == voxels);
    CHECK(tileDumpString(loaded) == tiles);
    CHECK(loaded.checkStructure());
  }
}

TEST_CASE("bad dump lines carry line numbers") {
  auto voxelError = [](const std::string& text) -> std::size_t {
    OccupancyMap map;
    std::istringstream is(text);
    try {
      readVoxelDump(map, is);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(voxelError("0 0 0 0.5 1\n0 0 0 0.5 1\n") == 2);
  CHECK(voxelError("0 0 0 0.5 1 9\n") == 1);
  CHECK(voxelError("0 0 40000 0.5 1\n") == 1);
  CHECK(voxelError("0 0 0 0.5\n") == 1);
  CHECK(voxelError("0 0 0 0.5 -1\n") == 1);
  CHECK(voxelError("0 0 0 0.5 1\n") == 0);

  OccupancyMap map;
  std::istringstream tiles("1 1 3 0.3 3 1\n1 1 3 0.3 3 1\n");
  try {
    readTileDump(map, tiles);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

// ---------------------------------------------------------------------- bench

TEST_CASE("bench covers every structure, resolution and depth") {
  BenchConfig cfg;
  cfg.points = 3000;
  cfg.extent = 3.0;
  cfg.radiusQueries = 5;
  cfg.scenes = {SceneKind::Room};
  const auto rows = runBench(cfg);

  std::map<std::string, std::size_t> perStructure;
  std::set<double> resolutions;
  std::vector<std::size_t> sweepBytes;
  for (const auto& r : rows) {
    ++perStructure[r.structure];
    resolutions.insert(r.resolution);
    if (r.operation == "depth_sweep") sweepBytes.push_back(r.bytes);
  }
  CHECK(perStructure["skimap"] == 3 * 5);
  CHECK(perStructure["dense"] == 3 * 5);
  CHECK(perStructure["octree"] == 3 * 5);
  CHECK(perStructure["dense_eq1"] == 3);
  CHECK(resolutions == std::set<double>{0.05, 0.1, 0.2});
  REQUIRE(sweepBytes.size() == 5);
  for (std::size_t i = 1; i < sweepBytes.size(); ++i) CHECK(sweepBytes[i] >= sweepBytes[i - 1]);

  // Non-timing columns repeat exactly for the same seed.
  const auto again = runBench(cfg);
  REQUIRE(again.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(again[i].structure == rows[i].structure);
    CHECK(again[i].operation == rows[i].operation);
    CHECK(again[i].points == rows[i].points);
    CHECK(again[i].bytes == rows[i].bytes);
  }

  std::ostringstream csv;
  writeBenchCsv(csv, rows, cfg);
  const std::string text = csv.str();
  CHECK(text.rfind("# config {", 0) == 0);
  CHECK(text.find("\n# seed 1\n") != std::string::npos);
  CHECK(text.find("\nstructure,operation,scene,resolution,points,time_us,bytes\n") != std::string::npos);
  CHECK(text.find("\nskimap_d64,depth_sweep,room,0.05,3000,") != std::string::npos);

  BenchConfig bad = cfg;
  bad.depths = {0};
  CHECK_THROWS_AS(runBench(bad), ArgumentError);
}
