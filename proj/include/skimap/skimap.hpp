#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "skimap/errors.hpp"
#include "skimap/fusion.hpp"
#include "skimap/parallel.hpp"
#include "skimap/skiplist.hpp"
#include "skimap/voxel_key.hpp"

namespace skimap {

/// Ground evidence stored on a yNode (a 2D cell).
struct TileData {
  std::uint32_t hits = 0;
  double heightSum = 0.0;  // sum of weight * height
  double weight = 0.0;
  bool navigable = false;

  double meanHeight() const noexcept { return weight > 0.0 ? heightSum / weight : 0.0; }

  friend bool operator==(const TileData&, const TileData&) = default;
};

/// A ground point reduced to its column and height.
struct TilePoint {
  Point3 point;
  double weight = 1.0;
};

enum class BoundsPolicy { Reject, SkipAndCount };

struct MapConfig {
  double resolution = 0.05;
  int depthX = 8;
  int depthY = 8;
  int depthZ = 8;
  std::size_t workers = 1;
  std::uint64_t seed = 0x5eed5eedULL;
  std::uint32_t navigableHits = 3;
  BoundsPolicy boundsPolicy = BoundsPolicy::Reject;

  void setDepth(int depth) { depthX = depthY = depthZ = depth; }

  void validate() const {
    if (!(resolution > 0.0) || !std::isfinite(resolution)) {
      throw ArgumentError("resolution must be positive");
    }
    for (int d : {depthX, depthY, depthZ}) {
      if (d < 1 || d > 255) throw ArgumentError("skiplist depth must be in [1, 255]");
    }
    if (workers == 0) throw ArgumentError("worker count must be positive");
  }

  /// Metric extent addressable along one axis.
  double axisExtent() const noexcept { return 65536.0 * resolution; }
};

template <class S>
struct PointSample {
  Point3 point;
  S sample;
};

struct IntegrationReport {
  std::size_t points = 0;
  std::size_t created = 0;
  std::size_t updated = 0;
  std::size_t skipped = 0;
  std::size_t partitions = 0;
};

struct ErosionReport {
  std::size_t points = 0;
  std::size_t updated = 0;
  std::size_t deleted = 0;
  std::size_t skipped = 0;
};

struct MapCounters {
  std::uint64_t level3Accesses = 0;
  std::uint64_t level3Allocations = 0;
  std::uint64_t writes = 0;
};

/// Inclusive per-axis index window, before clamping to the key range.
struct KeyWindow {
  std::array<std::int64_t, 3> lo{};
  std::array<std::int64_t, 3> hi{};
};

/// What visit2D() reports for each yNode. Only the list header is read, the
/// voxel list itself is never traversed.
struct Column {
  KeyIndex ix;
  KeyIndex iy;
  const TileData* tile;
  std::size_t voxelCount;
};

/// Tree of SkipLists: a list of x indices, each holding a list of y indices,
/// each holding optional tile data and a list of z-indexed voxels.
///
/// Writers are partitioned by x-branch. Batch operations group their input by
/// ix, create missing xNodes sequentially and then process each branch on one
/// worker, so the result is independent of the worker count.
template <VoxelPayload P>
class SkiMap {
 public:
  using Payload = P;
  using Sample = typename P::Sample;
  using Voxel = std::pair<VoxelKey, P>;
  using VoxelList = SkipList<KeyIndex, P>;

  struct YNode {
    std::optional<TileData> tile;
    VoxelList voxels;
  };
  using YList = SkipList<KeyIndex, YNode>;
  using XList = SkipList<KeyIndex, YList>;

  struct SearchResult {
    std::vector<Voxel> voxels;
    bool clamped = false;
  };

  explicit SkiMap(MapConfig config = {})
      : config_((config.validate(), config)),
        root_(SkipListOptions{config_.depthX}, SplitMix64(mixSeed(config_.seed, 0))),
        counters_(std::make_unique<AtomicCounters>()) {}

  SkiMap(SkiMap&&) noexcept = default;
  SkiMap& operator=(SkiMap&&) noexcept = default;

  const MapConfig& config() const noexcept { return config_; }
  double resolution() const noexcept { return config_.resolution; }

  VoxelKey quantize(const Point3& p) const { return skimap::quantize(p, config_.resolution); }

  // ---------------------------------------------------------------- writes

  VoxelKey integratePoint(const Point3& p, const Sample& sample) {
    const VoxelKey key = quantize(p);
    integrateAt(key, sample);
    return key;
  }

  /// Fuses a sample into the voxel at `key`. Returns true if it was created.
  bool integrateAt(const VoxelKey& key, const Sample& sample) {
    YList& ys = xBranch(key.ix);
    const auto [created, _] = fuseInBranch(ys, key, sample);
    counters_->writes.fetch_add(1, std::memory_order_relaxed);
    counters_->level3Accesses.fetch_add(1, std::memory_order_relaxed);
    if (created) {
      counters_->level3Allocations.fetch_add(1, std::memory_order_relaxed);
      ++voxelCount_;
    }
    return created;
  }

  /// Overwrites (or creates) the payload at `key`. Used when loading dumps.
  void setVoxel(const VoxelKey& key, const P& payload) {
    YList& ys = xBranch(key.ix);
    YNode& y = yNodeIn(ys, key.ix, key.iy);
    auto [entry, created] = y.voxels.insertOrGet(key.iz);
    entry.value = payload;
    counters_->writes.fetch_add(1, std::memory_order_relaxed);
    counters_->level3Accesses.fetch_add(1, std::memory_order_relaxed);
    if (created) {
      counters_->level3Allocations.fetch_add(1, std::memory_order_relaxed);
      ++voxelCount_;
    }
  }

  IntegrationReport integrateBatch(std::span<const PointSample<Sample>> cloud,
                                   std::size_t workers = 0) {
    IntegrationReport report;
    report.points = cloud.size();
    std::vector<VoxelKey> keys(cloud.size());
    std::vector<std::size_t> order = quantizeAll(
        cloud.size(), [&](std::size_t i) -> const Point3& { return cloud[i].point; }, keys,
        report.skipped);
    auto groups = groupByX(keys, order);
    report.partitions = groups.size();

    std::vector<YList*> branches(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) branches[g] = &xBranch(groups[g].ix);

    std::vector<std::array<std::size_t, 2>> tallies(groups.size(), {0, 0});
    parallelFor(groups.size(), resolveWorkers(workers), [&](std::size_t g) {
      std::size_t created = 0;
      for (std::size_t i = groups[g].begin; i < groups[g].end; ++i) {
        const std::size_t idx = order[i];
        if (fuseInBranch(*branches[g], keys[idx], cloud[idx].sample).first) ++created;
      }
      tallies[g] = {created, (groups[g].end - groups[g].begin) - created};
    });

    std::uint64_t touched = 0;
    for (const auto& [created, updated] : tallies) {
      report.created += created;
      report.updated += updated;
      touched += created + updated;
    }
    voxelCount_ += report.created;
    counters_->writes.fetch_add(touched, std::memory_order_relaxed);
    counters_->level3Accesses.fetch_add(touched, std::memory_order_relaxed);
    counters_->level3Allocations.fetch_add(report.created, std::memory_order_relaxed);
    return report;
  }

  /// Erodes one sample from the voxel containing `p`. Throws ErosionUnderflow
  /// if the voxel does not exist. Returns true if the voxel was deleted.
  bool erodePoint(const Point3& p, const Sample& sample) {
    return erodeAt(quantize(p), sample);
  }

  bool erodeAt(const VoxelKey& key, const Sample& sample) {
    P* current = findMutable(key);
    counters_->level3Accesses.fetch_add(1, std::memory_order_relaxed);
    if (current == nullptr) throw ErosionUnderflow("eroding a voxel that does not exist");
    auto result = erode(*current, sample);
    counters_->writes.fetch_add(1, std::memory_order_relaxed);
    if (auto* next = std::get_if<P>(&result)) {
      *current = *next;
      return false;
    }
    removeVoxel(key);
    return true;
  }

  /// Erodes a whole cloud. Every erosion is validated before any voxel is
  /// modified: on ErosionUnderflow the map is left untouched.
  ErosionReport erodeBatch(std::span<const PointSample<Sample>> cloud, std::size_t workers = 0) {
    ErosionReport report;
    report.points = cloud.size();
    std::vector<VoxelKey> keys(cloud.size());
    std::vector<std::size_t> order = quantizeAll(
        cloud.size(), [&](std::size_t i) -> const Point3& { return cloud[i].point; }, keys,
        report.skipped);
    auto groups = groupByX(keys, order);

    // Pass 1, read only: replay erosions per branch on copies.
    std::vector<std::vector<std::pair<VoxelKey, std::optional<P>>>> outcomes(groups.size());
    const std::size_t threads = resolveWorkers(workers);
    parallelFor(groups.size(), threads, [&](std::size_t g) {
      std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> slot;
      auto& out = outcomes[g];
      for (std::size_t i = groups[g].begin; i < groups[g].end; ++i) {
        const std::size_t idx = order[i];
        const VoxelKey& key = keys[idx];
        auto it = slot.find(key);
        if (it == slot.end()) {
          const P* existing = findConst(key);
          if (existing == nullptr) {
            throw ErosionUnderflow("eroding a voxel that does not exist");
          }
          it = slot.emplace(key, out.size()).first;
          out.emplace_back(key, *existing);
        }
        auto& state = out[it->second].second;
        if (!state) throw ErosionUnderflow("eroding a voxel that was already drained");
        auto result = erode(*state, cloud[idx].sample);
        if (auto* next = std::get_if<P>(&result)) {
          state = *next;
        } else {
          state.reset();
        }
      }
    });

    // Pass 2: commit per branch, then prune emptied xNodes.
    std::vector<std::size_t> deletedPerGroup(groups.size(), 0);
    parallelFor(groups.size(), threads, [&](std::size_t g) {
      auto* xEntry = root_.find(groups[g].ix);
      YList& ys = xEntry->value;
      std::size_t deleted = 0;
      for (auto& [key, state] : outcomes[g]) {
        auto* yEntry = ys.find(key.iy);
        auto* voxel = yEntry->value.voxels.find(key.iz);
        if (state) {
          voxel->value = *state;
        } else {
          yEntry->value.voxels.remove(key.iz);
          ++deleted;
          if (yEntry->value.voxels.empty() && !yEntry->value.tile) ys.remove(key.iy);
        }
      }
      deletedPerGroup[g] = deleted;
    });
    for (std::size_t g = 0; g < groups.size(); ++g) {
      auto* xEntry = root_.find(groups[g].ix);
      if (xEntry != nullptr && xEntry->value.empty()) root_.remove(groups[g].ix);
      report.deleted += deletedPerGroup[g];
      report.updated += outcomes[g].size() - deletedPerGroup[g];
    }
    voxelCount_ -= report.deleted;
    const std::uint64_t eroded = cloud.size() - report.skipped;
    counters_->writes.fetch_add(eroded, std::memory_order_relaxed);
    counters_->level3Accesses.fetch_add(eroded, std::memory_order_relaxed);
    return report;
  }

  /// Removes a voxel and prunes its yNode/xNode ancestors if they become
  /// empty. Returns true iff the voxel existed.
  bool removeVoxel(const VoxelKey& key) {
    auto* xEntry = root_.find(key.ix);
    if (xEntry == nullptr) return false;
    auto* yEntry = xEntry->value.find(key.iy);
    if (yEntry == nullptr) return false;
    counters_->level3Accesses.fetch_add(1, std::memory_order_relaxed);
    if (!yEntry->value.voxels.remove(key.iz)) return false;
    counters_->writes.fetch_add(1, std::memory_order_relaxed);
    --voxelCount_;
    pruneColumn(key.ix, key.iy);
    return true;
  }

  // ----------------------------------------------------------------- tiles

  void integrateTile(KeyIndex ix, KeyIndex iy, double height, double weight = 1.0) {
    YList& ys = xBranch(ix);
    fuseTile(yNodeIn(ys, ix, iy), height, weight);
    counters_->writes.fetch_add(1, std::memory_order_relaxed);
  }

  /// Removes one ground hit. Throws ErosionUnderflow if the tile has none.
  void erodeTile(KeyIndex ix, KeyIndex iy, double height, double weight = 1.0) {
    auto* xEntry = root_.find(ix);
    auto* yEntry = xEntry ? xEntry->value.find(iy) : nullptr;
    if (yEntry == nullptr || !yEntry->value.tile) {
      throw ErosionUnderflow("eroding a tile that does not exist");
    }
    erodeTileData(yEntry->value, height, weight);
    counters_->writes.fetch_add(1, std::memory_order_relaxed);
    pruneColumn(ix, iy);
  }

  void setTile(KeyIndex ix, KeyIndex iy, const TileData& tile) {
    YList& ys = xBranch(ix);
    yNodeIn(ys, ix, iy).tile = tile;
    counters_->writes.fetch_add(1, std::memory_order_relaxed);
  }

  /// Ground points touch level 2 only: the z coordinate is kept as height.
  IntegrationReport integrateTiles(std::span<const TilePoint> points, std::size_t workers = 0) {
    IntegrationReport report;
    report.points = points.size();
    std::vector<VoxelKey> keys(points.size());
    std::vector<std::size_t> order = quantizeAll(
        points.size(), [&](std::size_t i) -> const Point3& { return points[i].point; }, keys,
        report.skipped);
    auto groups = groupByX(keys, order);
    report.partitions = groups.size();
    std::vector<YList*> branches(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) branches[g] = &xBranch(groups[g].ix);
    std::vector<std::size_t> createdPerGroup(groups.size(), 0);
    parallelFor(groups.size(), resolveWorkers(workers), [&](std::size_t g) {
      std::size_t created = 0;
      for (std::size_t i = groups[g].begin; i < groups[g].end; ++i) {
        const std::size_t idx = order[i];
        YNode& y = yNodeIn(*branches[g], groups[g].ix, keys[idx].iy);
        if (!y.tile) ++created;
        fuseTile(y, points[idx].point.z(), points[idx].weight);
      }
      createdPerGroup[g] = created;
    });
    for (std::size_t c : createdPerGroup) report.created += c;
    report.updated = report.points - report.skipped - report.created;
    counters_->writes.fetch_add(report.points - report.skipped, std::memory_order_relaxed);
    return report;
  }

  /// Validated like erodeBatch(): nothing changes on ErosionUnderflow.
  ErosionReport erodeTiles(std::span<const TilePoint> points) {
    ErosionReport report;
    report.points = points.size();
    std::unordered_map<std::uint32_t, TileData> staged;
    std::vector<std::pair<KeyIndex, KeyIndex>> touched;
    for (const auto& tp : points) {
      VoxelKey key;
      if (!tryQuantize(tp.point, config_.resolution, key)) {
        if (config_.boundsPolicy == BoundsPolicy::Reject) {
          (void)quantize(tp.point);
        }
        ++report.skipped;
        continue;
      }
      const std::uint32_t id = columnId(key.ix, key.iy);
      auto it = staged.find(id);
      if (it == staged.end()) {
        const auto current = tile(key.ix, key.iy);
        if (!current) throw ErosionUnderflow("eroding a tile that does not exist");
        it = staged.emplace(id, *current).first;
        touched.emplace_back(key.ix, key.iy);
      }
      YNode scratch;
      scratch.tile = it->second;
      if (scratch.tile->hits == 0) throw ErosionUnderflow("eroding a drained tile");
      erodeTileData(scratch, tp.point.z(), tp.weight);
      it->second = scratch.tile.value_or(TileData{});
    }
    for (const auto& [ix, iy] : touched) {
      auto* yEntry = root_.find(ix)->value.find(iy);
      const TileData& next = staged.at(columnId(ix, iy));
      if (next.hits == 0) {
        yEntry->value.tile.reset();
        ++report.deleted;
      } else {
        yEntry->value.tile = next;
        ++report.updated;
      }
      pruneColumn(ix, iy);
    }
    counters_->writes.fetch_add(report.points - report.skipped, std::memory_order_relaxed);
    return report;
  }

  std::optional<TileData> tile(KeyIndex ix, KeyIndex iy) const {
    const auto* xEntry = root_.find(ix);
    const auto* yEntry = xEntry ? xEntry->value.find(iy) : nullptr;
    if (yEntry == nullptr) return std::nullopt;
    return yEntry->value.tile;
  }

  // ------------------------------------------------------------------ reads

  /// Payload iff all three nested lookups hit.
  std::optional<P> getVoxel(const VoxelKey& key) const {
    const P* found = findConst(key);
    counters_->level3Accesses.fetch_add(1, std::memory_order_relaxed);
    if (found == nullptr) return std::nullopt;
    return *found;
  }

  /// Visits every voxel once. With workers > 1 x-branches are visited
  /// concurrently and `visitor` must be safe to call from several threads.
  template <class Visitor>
  std::size_t visitAll(Visitor&& visitor, std::size_t workers = 1) const {
    std::vector<const typename XList::Entry*> branches;
    branches.reserve(root_.size());
    for (const auto& x : root_) branches.push_back(&x);
    std::vector<std::size_t> counts(branches.size(), 0);
    parallelFor(branches.size(), workers, [&](std::size_t b) {
      const KeyIndex ix = branches[b]->key;
      std::size_t visited = 0;
      for (const auto& y : branches[b]->value) {
        for (const auto& z : y.value.voxels) {
          visitor(VoxelKey{ix, y.key, z.key}, z.value);
          ++visited;
        }
      }
      counts[b] = visited;
    });
    std::size_t total = 0;
    std::uint64_t lists = 0;
    for (std::size_t b = 0; b < branches.size(); ++b) {
      total += counts[b];
      lists += branches[b]->value.size();
    }
    counters_->level3Accesses.fetch_add(lists, std::memory_order_relaxed);
    return total;
  }

  /// All voxels in (ix, iy, iz) order, gathered per x-branch in parallel.
  std::vector<Voxel> collectVoxels(std::size_t workers = 1) const {
    std::vector<const typename XList::Entry*> branches;
    branches.reserve(root_.size());
    for (const auto& x : root_) branches.push_back(&x);
    std::vector<std::vector<Voxel>> parts(branches.size());
    parallelFor(branches.size(), workers, [&](std::size_t b) {
      const KeyIndex ix = branches[b]->key;
      for (const auto& y : branches[b]->value) {
        for (const auto& z : y.value.voxels) parts[b].emplace_back(VoxelKey{ix, y.key, z.key}, z.value);
      }
    });
    std::vector<Voxel> out;
    out.reserve(voxelCount_);
    std::uint64_t lists = 0;
    for (std::size_t b = 0; b < branches.size(); ++b) {
      out.insert(out.end(), parts[b].begin(), parts[b].end());
      lists += branches[b]->value.size();
    }
    counters_->level3Accesses.fetch_add(lists, std::memory_order_relaxed);
    return out;
  }

  /// Visits every yNode without descending into its voxel list.
  template <class Visitor>
  std::size_t visit2D(Visitor&& visitor) const {
    std::size_t visited = 0;
    for (const auto& x : root_) {
      for (const auto& y : x.value) {
        const TileData* t = y.value.tile ? &*y.value.tile : nullptr;
        visitor(Column{x.key, y.key, t, y.value.voxels.size()});
        ++visited;
      }
    }
    return visited;
  }

  /// All voxels with |i - c| <= h on every axis, by nested range iteration.
  /// Bounds leaving the key range are clamped and reported.
  SearchResult boxSearch(const VoxelKey& center, const std::array<std::int64_t, 3>& halfExtents) const {
    KeyWindow window;
    const std::array<std::int64_t, 3> c{center.ix, center.iy, center.iz};
    for (int a = 0; a < 3; ++a) {
      if (halfExtents[a] < 0) throw ArgumentError("half extents must be non-negative");
      window.lo[a] = c[a] - halfExtents[a];
      window.hi[a] = c[a] + halfExtents[a];
    }
    return windowSearch(window, [](const VoxelKey&) { return true; });
  }

  /// Per-axis index window scanned by radiusSearch(): the discrete window
  /// I +- floor(radius / r), widened where needed so that it contains every
  /// voxel whose center can lie within `radius` of an off-center query.
  KeyWindow radiusWindow(const Point3& center, double radius) const {
    if (!(radius >= 0.0)) throw ArgumentError("radius must be non-negative");
    const double r = config_.resolution;
    const auto half = static_cast<std::int64_t>(std::floor(radius / r));
    KeyWindow window;
    for (int a = 0; a < 3; ++a) {
      const std::int64_t index = floorIndex(center[a], r);
      const auto exactLo =
          static_cast<std::int64_t>(std::ceil((center[a] - radius) / r - 0.5 - 1e-9));
      const auto exactHi =
          static_cast<std::int64_t>(std::floor((center[a] + radius) / r - 0.5 + 1e-9));
      window.lo[a] = std::min(index - half, exactLo);
      window.hi[a] = std::max(index + half, exactHi);
    }
    return window;
  }

  /// Voxels whose center lies within `radius` (Euclidean) of `center`.
  SearchResult radiusSearch(const Point3& center, double radius) const {
    const double r = config_.resolution;
    const double r2 = radius * radius;
    return windowSearch(radiusWindow(center, radius), [&](const VoxelKey& k) {
      const double dx = cellCenter(k.ix, r) - center.x();
      const double dy = cellCenter(k.iy, r) - center.y();
      const double dz = cellCenter(k.iz, r) - center.z();
      return dx * dx + dy * dy + dz * dz <= r2;
    });
  }

  // ------------------------------------------------------------- structure

  std::size_t voxelCount() const noexcept { return voxelCount_; }
  std::size_t xNodeCount() const noexcept { return root_.size(); }
  std::size_t yNodeCount() const {
    std::size_t n = 0;
    for (const auto& x : root_) n += x.value.size();
    return n;
  }
  std::size_t tileCount() const {
    std::size_t n = 0;
    visit2D([&](const Column& c) { n += c.tile != nullptr; });
    return n;
  }
  bool empty() const noexcept { return root_.empty(); }

  const XList& root() const noexcept { return root_; }

  MapCounters counters() const noexcept {
    return {counters_->level3Accesses.load(), counters_->level3Allocations.load(),
            counters_->writes.load()};
  }
  void resetCounters() noexcept {
    counters_->level3Accesses = 0;
    counters_->level3Allocations = 0;
    counters_->writes = 0;
  }

  /// Full walk: every list valid, no empty yNodes or xNodes, ordering holds
  /// across levels and the voxel count matches.
  bool checkStructure() const {
    if (!root_.checkInvariants()) return false;
    std::size_t voxels = 0;
    for (const auto& x : root_) {
      if (x.value.empty() || !x.value.checkInvariants()) return false;
      for (const auto& y : x.value) {
        if (y.value.voxels.empty() && !y.value.tile) return false;
        if (!y.value.voxels.checkInvariants()) return false;
        voxels += y.value.voxels.size();
      }
    }
    return voxels == voxelCount_;
  }

  void clear() {
    root_.clear();
    voxelCount_ = 0;
  }

 private:
  struct AtomicCounters {
    std::atomic<std::uint64_t> level3Accesses{0};
    std::atomic<std::uint64_t> level3Allocations{0};
    std::atomic<std::uint64_t> writes{0};
  };

  struct Group {
    KeyIndex ix;
    std::size_t begin;
    std::size_t end;
  };

  static std::uint32_t columnId(KeyIndex ix, KeyIndex iy) noexcept {
    return (std::uint32_t{static_cast<std::uint16_t>(ix)} << 16) | static_cast<std::uint16_t>(iy);
  }

  std::size_t resolveWorkers(std::size_t workers) const noexcept {
    return workers == 0 ? config_.workers : workers;
  }

  /// Quantizes every point; returns indices of in-bounds points. Under the
  /// Reject policy the first out-of-bounds point throws before anything is
  /// modified.
  template <class PointAt>
  std::vector<std::size_t> quantizeAll(std::size_t n, PointAt&& pointAt, std::vector<VoxelKey>& keys,
                                       std::size_t& skipped) const {
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (tryQuantize(pointAt(i), config_.resolution, keys[i])) {
        order.push_back(i);
      } else if (config_.boundsPolicy == BoundsPolicy::Reject) {
        keys[i] = quantize(pointAt(i));  // throws with the offending axis
      } else {
        ++skipped;
      }
    }
    return order;
  }

  /// Stable partition of `order` into runs of equal ix (the subsets C_x).
  static std::vector<Group> groupByX(const std::vector<VoxelKey>& keys, std::vector<std::size_t>& order) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return keys[a].ix < keys[b].ix; });
    std::vector<Group> groups;
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      const KeyIndex ix = keys[order[i]].ix;
      while (j < order.size() && keys[order[j]].ix == ix) ++j;
      groups.push_back({ix, i, j});
      i = j;
    }
    return groups;
  }

  YList& xBranch(KeyIndex ix) {
    auto [entry, created] = root_.insertOrGet(ix, [&] {
      return YList(SkipListOptions{config_.depthY},
                   SplitMix64(mixSeed(config_.seed, 0x10000ULL + static_cast<std::uint16_t>(ix))));
    });
    return entry.value;
  }

  YNode& yNodeIn(YList& ys, KeyIndex ix, KeyIndex iy) {
    auto [entry, created] = ys.insertOrGet(iy, [&] {
      return YNode{std::nullopt,
                   VoxelList(SkipListOptions{config_.depthZ},
                             SplitMix64(mixSeed(config_.seed, 0x100000000ULL + columnId(ix, iy))))};
    });
    return entry.value;
  }

  /// Returns (created, payload pointer). Touches only the given branch.
  std::pair<bool, P*> fuseInBranch(YList& ys, const VoxelKey& key, const Sample& sample) {
    YNode& y = yNodeIn(ys, key.ix, key.iy);
    auto [entry, created] = y.voxels.insertOrGet(key.iz);
    entry.value = fuse(entry.value, sample);
    return {created, &entry.value};
  }

  void fuseTile(YNode& y, double height, double weight) {
    TileData t = y.tile.value_or(TileData{});
    t.hits += 1;
    t.heightSum += weight * height;
    t.weight += weight;
    t.navigable = t.hits >= config_.navigableHits;
    y.tile = t;
  }

  void erodeTileData(YNode& y, double height, double weight) {
    TileData t = *y.tile;
    if (t.hits == 0 || t.weight - weight < -kWeightEpsilon) {
      throw ErosionUnderflow("eroding a ground hit that was never integrated");
    }
    t.hits -= 1;
    t.heightSum -= weight * height;
    t.weight -= weight;
    if (t.hits == 0) {
      y.tile.reset();
      return;
    }
    t.navigable = t.hits >= config_.navigableHits;
    y.tile = t;
  }

  void pruneColumn(KeyIndex ix, KeyIndex iy) {
    auto* xEntry = root_.find(ix);
    if (xEntry == nullptr) return;
    auto* yEntry = xEntry->value.find(iy);
    if (yEntry != nullptr && yEntry->value.voxels.empty() && !yEntry->value.tile) {
      xEntry->value.remove(iy);
    }
    if (xEntry->value.empty()) root_.remove(ix);
  }

  const P* findConst(const VoxelKey& key) const {
    const auto* xEntry = root_.find(key.ix);
    if (xEntry == nullptr) return nullptr;
    const auto* yEntry = xEntry->value.find(key.iy);
    if (yEntry == nullptr) return nullptr;
    const auto* zEntry = yEntry->value.voxels.find(key.iz);
    return zEntry ? &zEntry->value : nullptr;
  }

  P* findMutable(const VoxelKey& key) { return const_cast<P*>(findConst(key)); }

  template <class Keep>
  SearchResult windowSearch(KeyWindow window, Keep&& keep) const {
    SearchResult result;
    std::array<KeyIndex, 3> lo{};
    std::array<KeyIndex, 3> hi{};
    for (int a = 0; a < 3; ++a) {
      if (window.lo[a] < kKeyMin || window.hi[a] > kKeyMax) result.clamped = true;
      const std::int64_t l = std::max(window.lo[a], kKeyMin);
      const std::int64_t h = std::min(window.hi[a], kKeyMax);
      if (l > h) return result;
      lo[a] = static_cast<KeyIndex>(l);
      hi[a] = static_cast<KeyIndex>(h);
    }
    std::uint64_t zLists = 0;
    root_.rangeIterate(lo[0], hi[0], [&](const typename XList::Entry& x) {
      x.value.rangeIterate(lo[1], hi[1], [&](const typename YList::Entry& y) {
        ++zLists;
        y.value.voxels.rangeIterate(lo[2], hi[2], [&](const typename VoxelList::Entry& z) {
          const VoxelKey key{x.key, y.key, z.key};
          if (keep(key)) result.voxels.emplace_back(key, z.value);
        });
      });
    });
    counters_->level3Accesses.fetch_add(zLists, std::memory_order_relaxed);
    return result;
  }

  MapConfig config_;
  XList root_;
  std::size_t voxelCount_ = 0;
  std::unique_ptr<AtomicCounters> counters_;
};

using OccupancyMap = SkiMap<OccupancyVoxel>;

}  // namespace skimap
