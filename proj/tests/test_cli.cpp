#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "skimap/dump.hpp"
#include "skimap/pipeline.hpp"

namespace fs = std::filesystem;
using namespace skimap;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string command = std::string(SKIMAP_CLI_PATH) + " " + args + " 2>/dev/null";
  Run run;
  FILE* pipe = ::popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buffer[4096];
  std::size_t n;
  while ((n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) run.out.append(buffer, n);
  const int status = ::pclose(pipe);
  run.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return run;
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::vector<std::string> sortedLines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) lines.push_back(line);
  std::sort(lines.begin(), lines.end());
  return lines;
}

std::string voxelLine(const VoxelKey& k, const OccupancyVoxel& v) {
  char buffer[128];
  std::snprintf(buffer, sizeof buffer, "%d %d %d %.9g %.9g", k.ix, k.iy, k.iz, v.probability, v.weight);
  return buffer;
}

/// One generated log and its build, shared by the cases below.
struct Fixture {
  fs::path dir;
  std::string log, vox, tiles;

  Fixture() {
    dir = fs::temp_directory_path() / ("skimap_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    log = (dir / "scene.log").string();
    vox = (dir / "map.vox").string();
    tiles = (dir / "map.tiles").string();
    REQUIRE(cli("gen -o " + log + " --frames 3 --points 1500 --drift 0.02 --seed 3").code == 0);
    REQUIRE(cli("build " + log + " -o " + vox + " --tiles " + tiles).code == 0);
  }
  ~Fixture() { fs::remove_all(dir); }

  OccupancyMap inProcess() const {
    std::ifstream is(log);
    return buildFromLog(is, RunConfig{}).map;
  }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "build writes the same dump as the library") {
  const OccupancyMap map = inProcess();
  CHECK(slurp(vox) == voxelDumpString(map));
  CHECK(slurp(tiles) == tileDumpString(map));
  CHECK_FALSE(slurp(vox).empty());
}

TEST_CASE_FIXTURE(Fixture, "radius queries through the dump match in-process results") {
  const OccupancyMap map = inProcess();
  const auto voxels = map.collectVoxels();
  REQUIRE(voxels.size() > 10);

  // Zero radius at an occupied voxel center returns that voxel alone.
  const auto& [key, payload] = voxels[voxels.size() / 2];
  const Point3 c = voxelCenter(key, map.config().resolution);
  std::ostringstream args;
  args.precision(17);
  args << "query radius " << vox << " --center " << c.x() << ' ' << c.y() << ' ' << c.z() << " --radius 0";
  const Run one = cli(args.str());
  CHECK(one.code == 0);
  CHECK(one.out == voxelLine(key, payload) + "\n");

  for (double radius : {0.1, 0.3, 0.75}) {
    const Point3 center(0.7, -0.2, 0.4);
    std::vector<std::string> expected;
    for (const auto& [k, v] : map.radiusSearch(center, radius).voxels) expected.push_back(voxelLine(k, v));
    std::sort(expected.begin(), expected.end());
    std::ostringstream q;
    q << "query radius " << vox << " --center 0.7 -0.2 0.4 --radius " << radius;
    const Run run = cli(q.str());
    CHECK(run.code == 0);
    CHECK(sortedLines(run.out) == expected);
  }
}

TEST_CASE_FIXTURE(Fixture, "cell and box queries") {
  CHECK(cli("query cell " + vox + " --key 30000 30000 30000").out == "miss\n");
  const Run hit = cli("query cell " + vox + " --point 0.7 -0.2 0.001");
  CHECK(hit.code == 0);
  CHECK(hit.out.empty() == false);
  const Run box = cli("query box " + vox + " --key 0 0 0 --half 5 5 5");
  CHECK(box.code == 0);
  CHECK(cli("query cell " + vox).code == 1);
  CHECK(cli("query cell " + vox + " --key 40000 0 0").code == 1);
}

TEST_CASE_FIXTURE(Fixture, "2D export from a dump agrees with its projection") {
  const std::string pgm = (dir / "grid.pgm").string();
  const std::string oracle = (dir / "oracle.pgm").string();
  const std::string meta = (dir / "grid.yaml").string();
  const Run run = cli("export2d --map " + vox + " --tiles " + tiles + " -o " + pgm + " --meta " + meta +
                      " --oracle " + oracle);
  CHECK(run.code == 0);
  CHECK(slurp(pgm) == slurp(oracle));
  CHECK(slurp(pgm).rfind("P2\n", 0) == 0);
  CHECK(slurp(meta).find("image: grid.pgm") != std::string::npos);

  const std::string fromLog = (dir / "log.pgm").string();
  CHECK(cli("export2d --log " + log + " -o " + fromLog).code == 0);
  CHECK(slurp(fromLog) == slurp(pgm));
}

TEST_CASE_FIXTURE(Fixture, "exit codes") {
  CHECK(cli("").code == 1);
  CHECK(cli("frobnicate").code == 1);
  CHECK(cli("build " + log + " -o " + (dir / "x.vox").string() + " -r -1").code == 1);
  CHECK(cli("build " + (dir / "missing.log").string() + " -o " + (dir / "x.vox").string()).code == 2);

  const std::string bad = (dir / "bad.log").string();
  std::ofstream(bad) << "FRAME 0 0 0 0 0 0 0 0 1\n0 0 zero\n";
  CHECK(cli("build " + bad + " -o " + (dir / "x.vox").string()).code == 2);

  const std::string config = (dir / "run.json").string();
  std::ofstream(config) << "{\"resolutoin\": 0.1}";
  CHECK(cli("build " + log + " -o " + (dir / "x.vox").string() + " --config " + config).code == 1);
  CHECK(cli("query cell " + (dir / "missing.vox").string() + " --key 0 0 0").code == 2);
}

TEST_CASE_FIXTURE(Fixture, "config file values yield to flags") {
  const std::string config = (dir / "run.json").string();
  std::ofstream(config) << "{\"resolution\": 0.2, \"ground\": false}";
  const std::string stats = (dir / "stats.json").string();
  REQUIRE(cli("build " + log + " -o " + (dir / "c.vox").string() + " --config " + config + " -r 0.1 --stats " +
              stats)
              .code == 0);
  const std::string text = slurp(stats);
  CHECK(text.find("\"resolution\": 0.1") != std::string::npos);
  CHECK(text.find("\"ground\": false") != std::string::npos);
}

TEST_CASE_FIXTURE(Fixture, "bench writes a CSV") {
  const std::string csv = (dir / "bench.csv").string();
  const Run run = cli("bench -o " + csv + " --points 800 --extent 2 --queries 2 --scenes room --resolutions 0.1 "
                      "--depths 4 8");
  CHECK(run.code == 0);
  const std::string text = slurp(csv);
  CHECK(text.find("structure,operation,scene,resolution,points,time_us,bytes") != std::string::npos);
  CHECK(text.find("skimap_d4,depth_sweep") != std::string::npos);
}
