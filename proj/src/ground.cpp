#include "skimap/ground.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "skimap/errors.hpp"

namespace skimap {

namespace {

struct Plane {
  Eigen::Vector3d normal;
  double offset;
};

std::size_t countInliers(std::span<const Point3> points, const Plane& plane, double threshold) {
  std::size_t n = 0;
  for (const auto& p : points) n += std::abs(plane.normal.dot(p) - plane.offset) <= threshold;
  return n;
}

/// Least-squares plane through the inliers of `plane`; also returns their
/// centroid.
std::pair<Plane, Point3> refit(std::span<const Point3> points, const Plane& plane, double threshold,
                               std::size_t& inliers) {
  Point3 centroid = Point3::Zero();
  inliers = 0;
  for (const auto& p : points) {
    if (std::abs(plane.normal.dot(p) - plane.offset) <= threshold) {
      centroid += p;
      ++inliers;
    }
  }
  centroid /= static_cast<double>(inliers);
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    if (std::abs(plane.normal.dot(p) - plane.offset) <= threshold) {
      const Eigen::Vector3d d = p - centroid;
      scatter += d * d.transpose();
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(scatter);
  Eigen::Vector3d normal = solver.eigenvectors().col(0).normalized();
  if (normal.dot(plane.normal) < 0.0) normal = -normal;
  return {Plane{normal, normal.dot(centroid)}, centroid};
}

std::size_t requiredIterations(double inlierRatio, double confidence, std::size_t cap) {
  const double good = std::pow(inlierRatio, 3.0);
  if (good <= 0.0) return cap;
  if (good >= 1.0) return 1;
  const double n = std::log(1.0 - confidence) / std::log(1.0 - good);
  if (!std::isfinite(n) || n > static_cast<double>(cap)) return cap;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(n)));
}

}  // namespace

GroundModel detectGround(std::span<const Point3> points, const GroundConfig& config) {
  if (!(config.inlierThreshold > 0.0)) throw ArgumentError("inlier threshold must be positive");
  if (!(config.confidence > 0.0 && config.confidence < 1.0)) {
    throw ArgumentError("confidence must be in (0, 1)");
  }
  const std::size_t minInliers = std::max<std::size_t>(config.minInliers, 3);
  if (points.size() < minInliers) {
    throw GroundDetectionError("first frame has fewer points than the minimum inlier count");
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  Plane best{Eigen::Vector3d::UnitZ(), 0.0};
  std::size_t bestInliers = 0;
  std::size_t budget = config.maxIterations;
  for (std::size_t iter = 0; iter < budget; ++iter) {
    const Point3& a = points[pick(rng)];
    const Point3& b = points[pick(rng)];
    const Point3& c = points[pick(rng)];
    Eigen::Vector3d n = (b - a).cross(c - a);
    const double len = n.norm();
    if (len < 1e-12) continue;
    n /= len;
    const Plane candidate{n, n.dot(a)};
    const std::size_t inliers = countInliers(points, candidate, config.inlierThreshold);
    if (inliers > bestInliers) {
      bestInliers = inliers;
      best = candidate;
      const double ratio = static_cast<double>(inliers) / static_cast<double>(points.size());
      budget = std::min(budget, requiredIterations(ratio, config.confidence, config.maxIterations));
    }
  }
  if (bestInliers < minInliers) {
    throw GroundDetectionError("no plane supported by " + std::to_string(minInliers) + " inliers");
  }

  std::size_t inliers = 0;
  auto [plane, centroid] = refit(points, best, config.inlierThreshold, inliers);
  // One more pass: the refined plane may gather a slightly different set.
  std::tie(plane, centroid) = refit(points, plane, config.inlierThreshold, inliers);
  if (inliers < minInliers) {
    throw GroundDetectionError("refined plane lost support below the minimum inlier count");
  }

  // Orient the normal toward the sensor at the origin: n.0 - d > 0.
  if (plane.offset > 0.0 || (plane.offset == 0.0 && plane.normal.z() < 0.0)) {
    plane.normal = -plane.normal;
    plane.offset = -plane.offset;
  }

  GroundModel model;
  model.normal = plane.normal;
  model.offset = plane.offset;
  model.centroid = centroid;
  model.inlierThreshold = config.inlierThreshold;
  model.inliers = inliers;

  const Eigen::Vector3d& n = plane.normal;
  Eigen::Vector3d helper = Eigen::Vector3d::UnitX();
  if (std::abs(n.x()) > 0.9) helper = Eigen::Vector3d::UnitY();
  const Eigen::Vector3d e1 = (helper - helper.dot(n) * n).normalized();
  const Eigen::Vector3d e2 = n.cross(e1);
  model.zeroFrame.rotation.row(0) = e1.transpose();
  model.zeroFrame.rotation.row(1) = e2.transpose();
  model.zeroFrame.rotation.row(2) = n.transpose();
  model.zeroFrame.translation = -(model.zeroFrame.rotation * centroid);
  return model;
}

GroundModel expressIn(const GroundModel& model, const Pose& sensorToWorld) {
  GroundModel out = model;
  out.normal = sensorToWorld.rotation * model.normal;
  out.centroid = sensorToWorld.apply(model.centroid);
  out.offset = out.normal.dot(out.centroid);
  out.zeroFrame = model.zeroFrame * sensorToWorld.inverse();
  return out;
}

PointLabel classify(const GroundModel& model, const Point3& p, double band) {
  return classifyHeight(model.toZeroFrame(p).z(), band);
}

namespace {

struct Split {
  std::vector<PointSample<Sample>> obstacles;
  std::vector<TilePoint> ground;
  std::size_t dropped = 0;
};

Split split(std::span<const LabeledPoint> cloud, const ClassifiedOptions& options) {
  Split out;
  for (const auto& lp : cloud) {
    if (lp.label == PointLabel::Ground) {
      out.ground.push_back({lp.point, lp.sample.weight});
    } else if (options.ceiling && lp.point.z() > *options.ceiling) {
      ++out.dropped;
    } else {
      out.obstacles.push_back({lp.point, lp.sample});
    }
  }
  return out;
}

}  // namespace

ClassifiedReport integrateClassified(OccupancyMap& map, std::span<const LabeledPoint> cloud,
                                     const ClassifiedOptions& options) {
  const Split parts = split(cloud, options);
  ClassifiedReport report;
  report.groundPoints = parts.ground.size();
  report.obstaclePoints = parts.obstacles.size();
  report.dropped = parts.dropped;
  report.tiles = map.integrateTiles(parts.ground, options.workers);
  report.voxels = map.integrateBatch(parts.obstacles, options.workers);
  return report;
}

ClassifiedReport erodeClassified(OccupancyMap& map, std::span<const LabeledPoint> cloud,
                                 const ClassifiedOptions& options) {
  const Split parts = split(cloud, options);
  ClassifiedReport report;
  report.groundPoints = parts.ground.size();
  report.obstaclePoints = parts.obstacles.size();
  report.dropped = parts.dropped;
  const auto tiles = map.erodeTiles(parts.ground);
  try {
    const auto voxels = map.erodeBatch(parts.obstacles, options.workers);
    report.voxels.points = voxels.points;
    report.voxels.updated = voxels.updated;
    report.voxels.skipped = voxels.skipped;
  } catch (const ErosionUnderflow&) {
    // Voxel erosion validates before writing; restore the tiles it followed.
    map.integrateTiles(parts.ground, options.workers);
    throw;
  }
  report.tiles.points = tiles.points;
  report.tiles.updated = tiles.updated;
  report.tiles.skipped = tiles.skipped;
  return report;
}

}  // namespace skimap
