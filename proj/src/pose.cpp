#include "skimap/pose.hpp"

#include "skimap/errors.hpp"

namespace skimap {

Pose Pose::fromQuaternion(const Eigen::Vector3d& t, const Eigen::Quaterniond& q) {
  const double norm = q.norm();
  if (!(norm > 1e-12) || !std::isfinite(norm)) throw ArgumentError("quaternion must be non-zero");
  if (!t.allFinite()) throw ArgumentError("translation must be finite");
  Pose pose;
  pose.rotation = q.normalized().toRotationMatrix();
  pose.translation = t;
  return pose;
}

bool Pose::isValid(double tolerance) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const double orthogonality =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return orthogonality <= tolerance && std::abs(rotation.determinant() - 1.0) <= tolerance;
}

std::vector<Point3> transformPoints(const Pose& pose, std::span<const Point3> points) {
  std::vector<Point3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(pose.apply(p));
  return out;
}

}  // namespace skimap
