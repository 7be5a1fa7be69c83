#pragma once

#include <concepts>
#include <istream>
#include <ostream>
#include <string>
#include <variant>

namespace skimap {

/// Returned by erosion when no evidence remains in the voxel.
struct DeleteSignal {
  friend bool operator==(const DeleteSignal&, const DeleteSignal&) = default;
};

/// Weight floor below which an eroded voxel is deleted.
inline constexpr double kWeightEpsilon = 1e-9;

/// One weighted measurement of occupancy probability.
struct Sample {
  double probability = 1.0;
  double weight = 1.0;
};

/// Weighted-mean occupancy payload.
struct OccupancyVoxel {
  using Sample = skimap::Sample;

  double probability = 0.0;
  double weight = 0.0;

  friend bool operator==(const OccupancyVoxel&, const OccupancyVoxel&) = default;
};

using ErodeResult = std::variant<OccupancyVoxel, DeleteSignal>;

/// P' = (P W + p w) / (W + w), W' = W + w.
OccupancyVoxel fuse(const OccupancyVoxel& voxel, const Sample& sample);

/// Inverse of fuse(). Returns DeleteSignal when the remaining weight is at
/// most kWeightEpsilon; throws ErosionUnderflow when the sample weight
/// exceeds the stored weight by more than that.
ErodeResult erode(const OccupancyVoxel& voxel, const Sample& sample);

/// Writes "P W" with 9 significant digits.
void writeFields(std::ostream& os, const OccupancyVoxel& voxel);
/// Parses "P W"; throws ArgumentError on malformed or out-of-range fields.
void readFields(std::istream& is, OccupancyVoxel& out);

/// Formats a double with 9 significant digits (the dump precision).
std::string formatField(double value);

/// What the map needs from a voxel payload. The default-constructed value
/// is the empty state fused into on first touch.
template <class P>
concept VoxelPayload = std::default_initializable<P> && std::copyable<P> &&
    requires(const P& p, P& out, const typename P::Sample& s, std::ostream& os,
             std::istream& is) {
      { fuse(p, s) } -> std::same_as<P>;
      { erode(p, s) } -> std::same_as<std::variant<P, DeleteSignal>>;
      writeFields(os, p);
      readFields(is, out);
    };

}  // namespace skimap
