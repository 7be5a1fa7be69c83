#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "skimap/pose.hpp"
#include "skimap/skimap.hpp"

namespace skimap {

struct GroundConfig {
  double inlierThreshold = 0.02;
  std::size_t minInliers = 500;
  double confidence = 0.99;
  std::size_t maxIterations = 2000;
  std::uint64_t seed = 1;
};

/// Dominant plane n.x = d of the first frame and the frame anchored on it.
struct GroundModel {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;
  /// Maps input coordinates to the zero reference frame: the plane becomes
  /// z = 0, the origin sits at the inlier centroid, +z points to the sensor.
  Pose zeroFrame;
  Point3 centroid = Point3::Zero();
  double inlierThreshold = 0.02;
  std::size_t inliers = 0;

  Point3 toZeroFrame(const Point3& p) const { return zeroFrame.apply(p); }
  double signedDistance(const Point3& p) const { return normal.dot(p) - offset; }
};

enum class PointLabel { Ground, Obstacle };

/// Robust consensus plane fit followed by a least-squares refit on the
/// inliers. The sensor is assumed at the origin of `points`' frame.
/// Throws GroundDetectionError when no plane reaches `minInliers`.
GroundModel detectGround(std::span<const Point3> points, const GroundConfig& config = {});

/// The same plane and zero frame for inputs expressed through
/// `sensorToWorld`: result.toZeroFrame(sensorToWorld.apply(p)) equals
/// model.toZeroFrame(p).
GroundModel expressIn(const GroundModel& model, const Pose& sensorToWorld);

/// Ground iff |z| <= band once the point is expressed in the zero frame.
PointLabel classify(const GroundModel& model, const Point3& p, double band);

inline PointLabel classifyHeight(double zeroFrameZ, double band) {
  return std::abs(zeroFrameZ) <= band ? PointLabel::Ground : PointLabel::Obstacle;
}

struct LabeledPoint {
  Point3 point;  // zero-frame coordinates
  Sample sample;
  PointLabel label;
};

struct ClassifiedOptions {
  /// Obstacles above this zero-frame height are discarded.
  std::optional<double> ceiling;
  std::size_t workers = 0;
};

struct ClassifiedReport {
  std::size_t groundPoints = 0;
  std::size_t obstaclePoints = 0;
  std::size_t dropped = 0;
  IntegrationReport voxels;
  IntegrationReport tiles;
};

/// Ground points update level-2 tiles only; obstacles become voxels.
ClassifiedReport integrateClassified(OccupancyMap& map, std::span<const LabeledPoint> cloud,
                                     const ClassifiedOptions& options = {});

/// Exact inverse of integrateClassified() for the same input. Either both
/// layers are eroded or, on ErosionUnderflow, the map is left as it was.
ClassifiedReport erodeClassified(OccupancyMap& map, std::span<const LabeledPoint> cloud,
                                 const ClassifiedOptions& options = {});

}  // namespace skimap
