#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "skimap/voxel_key.hpp"

namespace skimap {

/// Rigid transform q = R p + t.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose identity() { return {}; }

  /// Builds a pose from a translation and a (not necessarily unit)
  /// quaternion. Throws ArgumentError for a zero quaternion.
  static Pose fromQuaternion(const Eigen::Vector3d& t, const Eigen::Quaterniond& q);

  Eigen::Quaterniond quaternion() const { return Eigen::Quaterniond(rotation).normalized(); }

  Point3 apply(const Point3& p) const { return rotation * p + translation; }

  Pose inverse() const {
    Pose out;
    out.rotation = rotation.transpose();
    out.translation = -(out.rotation * translation);
    return out;
  }

  /// (this * other).apply(p) == this->apply(other.apply(p))
  Pose operator*(const Pose& other) const {
    Pose out;
    out.rotation = rotation * other.rotation;
    out.translation = rotation * other.translation + translation;
    return out;
  }

  /// Orthonormal with determinant +1, within `tolerance`.
  bool isValid(double tolerance = 1e-6) const;

  bool approxEquals(const Pose& other, double tolerance = 1e-12) const {
    return (rotation - other.rotation).cwiseAbs().maxCoeff() <= tolerance &&
           (translation - other.translation).cwiseAbs().maxCoeff() <= tolerance;
  }
};

std::vector<Point3> transformPoints(const Pose& pose, std::span<const Point3> points);

}  // namespace skimap
