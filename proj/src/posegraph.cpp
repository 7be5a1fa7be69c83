#include "skimap/posegraph.hpp"

#include <algorithm>
#include <tuple>

#include "skimap/errors.hpp"

namespace skimap {

void placeFrame(OccupancyMap& map, const FrameRecord& frame, const Pose& pose,
                const PlacementOptions& options, PlacementMode mode) {
  if (options.ground) {
    std::vector<LabeledPoint> labeled;
    labeled.reserve(frame.points.size());
    for (std::size_t i = 0; i < frame.points.size(); ++i) {
      const Point3 p = options.ground->toZeroFrame(pose.apply(frame.points[i]));
      labeled.push_back({p, frame.sampleAt(i), classifyHeight(p.z(), options.groundBand)});
    }
    const ClassifiedOptions classified{options.ceiling, options.workers};
    if (mode == PlacementMode::Fuse) {
      integrateClassified(map, labeled, classified);
    } else {
      erodeClassified(map, labeled, classified);
    }
    return;
  }

  std::vector<PointSample<Sample>> cloud;
  cloud.reserve(frame.points.size());
  for (std::size_t i = 0; i < frame.points.size(); ++i) {
    const Point3 p = pose.apply(frame.points[i]);
    if (options.ceiling && p.z() > *options.ceiling) continue;
    cloud.push_back({p, frame.sampleAt(i)});
  }
  if (mode == PlacementMode::Fuse) {
    map.integrateBatch(cloud, options.workers);
  } else {
    map.erodeBatch(cloud, options.workers);
  }
}

PoseManager::PoseManager(IntegratorConfig config) : config_(std::move(config)) {
  if (config_.batchBound == 0) throw ArgumentError("batchBound must be at least 1");
}

FrameId PoseManager::submitFrame(FrameRecord frame) {
  if (frame.poseQueue.empty()) throw ArgumentError("frame needs its live pose");
  if (!frame.samples.empty() && frame.samples.size() != frame.points.size()) {
    throw ArgumentError("per-point samples must match the point count");
  }
  std::lock_guard lock(mutex_);
  if (slots_.count(frame.id) != 0) {
    throw ArgumentError("duplicate frame id " + std::to_string(frame.id));
  }
  const FrameId id = frame.id;
  Slot slot;
  slot.poses = std::move(frame.poseQueue);
  slot.last = frame.lastIntegratedPoseIndex;
  frame.poseQueue.clear();
  frame.lastIntegratedPoseIndex.reset();
  if (slot.last && *slot.last >= slot.poses.size()) {
    throw ArgumentError("last integrated pose index out of range");
  }
  slot.frame = std::make_shared<const FrameRecord>(std::move(frame));
  slot.order = nextOrder_++;
  slots_.emplace(id, std::move(slot));
  newest_ = id;
  return id;
}

OptimizedPoseResult PoseManager::submitOptimizedPoses(std::span<const std::pair<FrameId, Pose>> updates) {
  OptimizedPoseResult result;
  std::lock_guard lock(mutex_);
  for (const auto& [id, pose] : updates) {
    auto it = slots_.find(id);
    if (it == slots_.end() || !pose.isValid()) {
      result.rejected.push_back(id);
      continue;
    }
    it->second.poses.push_back(pose);
    ++result.accepted;
  }
  return result;
}

bool PoseManager::isStale(const Slot& slot) const {
  if (!slot.last || slot.faulted) return false;
  return !slot.poses.back().approxEquals(slot.poses[*slot.last]);
}

CycleReport PoseManager::integrationCycle(OccupancyMap& map, std::shared_mutex* gate) {
  struct Job {
    FrameId id;
    std::shared_ptr<const FrameRecord> frame;
    std::optional<Pose> oldPose;
    Pose newPose;
    std::size_t newIndex;
  };
  std::vector<Job> jobs;
  PlacementOptions placement;
  {
    std::lock_guard lock(mutex_);
    placement = config_.placement;
    std::vector<const std::pair<const FrameId, Slot>*> fresh;
    std::vector<std::tuple<double, FrameId, const Slot*>> stale;
    const Eigen::Vector3d live =
        newest_ ? slots_.at(*newest_).poses.front().translation : Eigen::Vector3d::Zero();
    for (const auto& entry : slots_) {
      const Slot& slot = entry.second;
      if (slot.faulted) continue;
      if (!slot.last) {
        fresh.push_back(&entry);
      } else if (isStale(slot)) {
        const double distance = (slot.poses[*slot.last].translation - live).norm();
        stale.emplace_back(distance, entry.first, &slot);
      }
    }
    std::sort(fresh.begin(), fresh.end(),
              [](const auto* a, const auto* b) { return a->second.order < b->second.order; });
    std::sort(stale.begin(), stale.end(), [](const auto& a, const auto& b) {
      return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    for (const auto* entry : fresh) {
      if (jobs.size() == config_.batchBound) break;
      const Slot& slot = entry->second;
      jobs.push_back({entry->first, slot.frame, std::nullopt, slot.poses.back(), slot.poses.size() - 1});
    }
    for (const auto& [distance, id, slot] : stale) {
      if (jobs.size() == config_.batchBound) break;
      jobs.push_back({id, slot->frame, slot->poses[*slot->last], slot->poses.back(), slot->poses.size() - 1});
    }
  }

  CycleReport report;
  for (const Job& job : jobs) {
    std::string fault;
    try {
      std::unique_lock<std::shared_mutex> exclusive;
      if (gate != nullptr) exclusive = std::unique_lock(*gate);
      if (job.oldPose) placeFrame(map, *job.frame, *job.oldPose, placement, PlacementMode::Erode);
      try {
        placeFrame(map, *job.frame, job.newPose, placement, PlacementMode::Fuse);
      } catch (...) {
        // Put the frame back where it was so the map still matches `last`.
        if (job.oldPose) placeFrame(map, *job.frame, *job.oldPose, placement, PlacementMode::Fuse);
        throw;
      }
    } catch (const ErosionUnderflow& e) {
      fault = std::string("map consistency fault: ") + e.what();
    } catch (const Error& e) {
      fault = e.what();
    }

    std::lock_guard lock(mutex_);
    Slot& slot = slots_.at(job.id);
    if (!fault.empty()) {
      slot.faulted = true;
      report.faulted.push_back(job.id);
      report.faults.push_back("frame " + std::to_string(job.id) + ": " + fault);
      continue;
    }
    slot.last = job.newIndex;
    (job.oldPose ? report.reintegrated : report.integrated).push_back(job.id);
  }
  return report;
}

std::size_t PoseManager::pendingCount() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [id, slot] : slots_) n += !slot.faulted && (!slot.last || isStale(slot));
  return n;
}

std::optional<FrameStatus> PoseManager::status(FrameId id) const {
  std::lock_guard lock(mutex_);
  auto it = slots_.find(id);
  if (it == slots_.end()) return std::nullopt;
  const Slot& slot = it->second;
  return FrameStatus{id, slot.poses.size(), slot.last, isStale(slot), slot.faulted};
}

std::optional<Pose> PoseManager::livePose() const {
  std::lock_guard lock(mutex_);
  if (!newest_) return std::nullopt;
  return slots_.at(*newest_).poses.front();
}

std::size_t PoseManager::frameCount() const {
  std::lock_guard lock(mutex_);
  return slots_.size();
}

bool PoseManager::hasFault() const {
  std::lock_guard lock(mutex_);
  return std::any_of(slots_.begin(), slots_.end(), [](const auto& e) { return e.second.faulted; });
}

void PoseManager::setPlacement(PlacementOptions placement) {
  std::lock_guard lock(mutex_);
  config_.placement = std::move(placement);
}

}  // namespace skimap
