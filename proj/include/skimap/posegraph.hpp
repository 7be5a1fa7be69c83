#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "skimap/ground.hpp"
#include "skimap/pose.hpp"
#include "skimap/skimap.hpp"

namespace skimap {

using FrameId = std::uint64_t;

/// A sensor measurement in its own frame plus the queue of poses it has
/// been given so far. The queue is append-only.
struct FrameRecord {
  FrameId id = 0;
  double timestamp = 0.0;
  std::vector<Point3> points;
  /// Per-point samples; when empty every point uses `sample`.
  std::vector<Sample> samples;
  Sample sample{1.0, 1.0};
  std::vector<Pose> poseQueue;
  std::optional<std::size_t> lastIntegratedPoseIndex;

  const Sample& sampleAt(std::size_t i) const { return samples.empty() ? sample : samples[i]; }
};

/// How a frame's points enter the map once posed.
struct PlacementOptions {
  std::optional<GroundModel> ground;
  double groundBand = 0.1;
  std::optional<double> ceiling;
  std::size_t workers = 0;
};

enum class PlacementMode { Fuse, Erode };

/// Transforms the frame by `pose`, then fuses or erodes it. With a ground
/// model, points are moved to the zero frame and split into tiles and
/// voxels. Erosion is all-or-nothing.
void placeFrame(OccupancyMap& map, const FrameRecord& frame, const Pose& pose,
                const PlacementOptions& options, PlacementMode mode);

struct IntegratorConfig {
  std::size_t batchBound = 4;
  PlacementOptions placement;
};

struct CycleReport {
  std::vector<FrameId> integrated;
  std::vector<FrameId> reintegrated;
  std::vector<FrameId> faulted;
  std::vector<std::string> faults;

  std::size_t touched() const { return integrated.size() + reintegrated.size() + faulted.size(); }
};

struct OptimizedPoseResult {
  std::size_t accepted = 0;
  std::vector<FrameId> rejected;
};

/// Snapshot of one frame's pose bookkeeping.
struct FrameStatus {
  FrameId id;
  std::size_t poseCount;
  std::optional<std::size_t> lastIntegratedPoseIndex;
  bool stale;
  bool faulted;
};

/// Pose History plus Pose Integrator. Submissions may come from any thread;
/// integrationCycle() runs on one thread and is the only map writer while
/// it runs.
class PoseManager {
 public:
  explicit PoseManager(IntegratorConfig config = {});

  /// Enqueues a frame with at least its live pose. Throws ArgumentError on
  /// a duplicate id, an empty pose queue, or samples/points size mismatch.
  FrameId submitFrame(FrameRecord frame);

  /// Appends each pose to its frame's queue. Unknown ids are rejected
  /// individually.
  OptimizedPoseResult submitOptimizedPoses(std::span<const std::pair<FrameId, Pose>> updates);

  /// Integrates at most batchBound frames: never-integrated frames first in
  /// submission order, then stale frames closest (translation) to the live
  /// pose, ties by id. Stale frames are eroded under their last integrated
  /// pose and fused under their newest one. When `gate` is given, each
  /// frame's update holds it exclusively, so shared holders never observe a
  /// half-moved frame.
  CycleReport integrationCycle(OccupancyMap& map, std::shared_mutex* gate = nullptr);

  /// Frames waiting for a first integration or a re-integration.
  std::size_t pendingCount() const;

  std::optional<FrameStatus> status(FrameId id) const;
  std::optional<Pose> livePose() const;
  std::size_t frameCount() const;
  bool hasFault() const;

  void setPlacement(PlacementOptions placement);
  const IntegratorConfig& config() const noexcept { return config_; }

 private:
  struct Slot {
    std::shared_ptr<const FrameRecord> frame;  // points are immutable after submit
    std::vector<Pose> poses;
    std::optional<std::size_t> last;
    std::uint64_t order = 0;
    bool faulted = false;
  };

  bool isStale(const Slot& slot) const;

  IntegratorConfig config_;
  mutable std::mutex mutex_;
  std::map<FrameId, Slot> slots_;
  std::uint64_t nextOrder_ = 0;
  std::optional<FrameId> newest_;
};

}  // namespace skimap
