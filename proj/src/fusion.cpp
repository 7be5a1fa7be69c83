#include "skimap/fusion.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "skimap/errors.hpp"

namespace skimap {

namespace {

double clampUnit(double value) { return std::clamp(value, 0.0, 1.0); }

}  // namespace

OccupancyVoxel fuse(const OccupancyVoxel& voxel, const Sample& sample) {
  if (!(sample.weight > 0.0)) throw ArgumentError("sample weight must be positive");
  const double weight = voxel.weight + sample.weight;
  const double probability =
      (voxel.probability * voxel.weight + sample.probability * sample.weight) / weight;
  return {clampUnit(probability), weight};
}

ErodeResult erode(const OccupancyVoxel& voxel, const Sample& sample) {
  if (!(sample.weight > 0.0)) throw ArgumentError("sample weight must be positive");
  const double weight = voxel.weight - sample.weight;
  if (weight < -kWeightEpsilon) {
    throw ErosionUnderflow("erosion weight " + formatField(sample.weight) +
                           " exceeds stored weight " + formatField(voxel.weight));
  }
  if (weight <= kWeightEpsilon) return DeleteSignal{};
  const double probability =
      (voxel.probability * voxel.weight - sample.probability * sample.weight) / weight;
  return OccupancyVoxel{clampUnit(probability), weight};
}

std::string formatField(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.9g", value);
  return buffer;
}

void writeFields(std::ostream& os, const OccupancyVoxel& voxel) {
  os << formatField(voxel.probability) << ' ' << formatField(voxel.weight);
}

void readFields(std::istream& is, OccupancyVoxel& out) {
  OccupancyVoxel voxel;
  if (!(is >> voxel.probability >> voxel.weight)) {
    throw ArgumentError("expected occupancy fields 'P W'");
  }
  if (voxel.probability < 0.0 || voxel.probability > 1.0 || voxel.weight < 0.0) {
    throw ArgumentError("occupancy fields out of range");
  }
  out = voxel;
}

}  // namespace skimap
