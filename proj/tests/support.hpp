#pragma once

// Test-only oracles and generators. Nothing here calls into the map's
// search or indexing paths.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "skimap/skimap.hpp"

namespace testing_support {

using Key3 = std::tuple<long, long, long>;

/// floor(x / r) computed by truncation plus correction, not std::floor.
/// Uses the library's documented 1e-9-cell snap for decimal inputs.
inline long floorDiv(double x, double r) {
  const double q = x / r + 1e-9;
  auto t = static_cast<long>(q);
  if (static_cast<double>(t) > q) t -= 1;
  return t;
}

inline Key3 oracleKey(const skimap::Point3& p, double r) {
  return {floorDiv(p.x(), r), floorDiv(p.y(), r), floorDiv(p.z(), r)};
}

inline Key3 asTuple(const skimap::VoxelKey& k) { return {k.ix, k.iy, k.iz}; }

inline std::vector<skimap::Point3> randomCloud(std::size_t n, double extent, std::uint64_t seed,
                                               double zExtent = -1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xy(-extent, extent);
  std::uniform_real_distribution<double> z(zExtent < 0 ? -extent : 0.0, zExtent < 0 ? extent : zExtent);
  std::vector<skimap::Point3> out(n);
  for (auto& p : out) p = {xy(rng), xy(rng), z(rng)};
  return out;
}

inline std::vector<skimap::PointSample<skimap::Sample>> withSamples(
    const std::vector<skimap::Point3>& points, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> prob(0.0, 1.0);
  std::uniform_real_distribution<double> weight(0.25, 2.0);
  std::vector<skimap::PointSample<skimap::Sample>> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back({p, {prob(rng), weight(rng)}});
  return out;
}

/// Brute-force dense accumulation: key -> (sum p*w, sum w).
inline std::map<Key3, std::pair<double, double>> denseHistogram(
    const std::vector<skimap::PointSample<skimap::Sample>>& cloud, double r) {
  std::map<Key3, std::pair<double, double>> out;
  for (const auto& ps : cloud) {
    auto& acc = out[oracleKey(ps.point, r)];
    acc.first += ps.sample.probability * ps.sample.weight;
    acc.second += ps.sample.weight;
  }
  return out;
}

/// Exhaustive center-distance filter.
inline std::set<Key3> bruteRadiusKeys(const std::vector<Key3>& occupied, const skimap::Point3& c,
                                      double radius, double r) {
  std::set<Key3> out;
  for (const auto& [ix, iy, iz] : occupied) {
    const double dx = (static_cast<double>(ix) + 0.5) * r - c.x();
    const double dy = (static_cast<double>(iy) + 0.5) * r - c.y();
    const double dz = (static_cast<double>(iz) + 0.5) * r - c.z();
    if (dx * dx + dy * dy + dz * dz <= radius * radius) out.insert({ix, iy, iz});
  }
  return out;
}

template <class Map>
std::vector<Key3> allKeys(const Map& map) {
  std::vector<Key3> out;
  for (const auto& [k, v] : map.collectVoxels()) out.push_back(asTuple(k));
  return out;
}

}  // namespace testing_support
