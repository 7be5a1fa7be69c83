#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "skimap/errors.hpp"
#include "skimap/fusion.hpp"
#include "skimap/skimap.hpp"

namespace skimap {

// ------------------------------------------------------------------ memory

/// M = x y z / r^3 * 4 bytes: one float per cell of a full grid.
double denseGridMemory(double x, double y, double z, double resolution);

/// M = n_leaf B_leaf + n_inner B_inner.
double octreeMemory(std::uint64_t leaves, double leafBytes, std::uint64_t inners, double innerBytes);

/// M = x y / r^2 B_tile + n_voxels B_voxel.
double mlsMemory(double x, double y, double resolution, double tileBytes, std::uint64_t voxels,
                 double voxelBytes);

/// Byte costs used by measureSkiMapMemory, taken from the actual node
/// layouts so reported figures can be audited.
struct SkiMapLayout {
  std::size_t listBytes;      // SkipList object (root, or embedded in a parent node)
  std::size_t xNodeBytes;     // x-level node, includes its y-list object
  std::size_t yNodeBytes;     // y-level node, includes tile and z-list object
  std::size_t voxelNodeBytes; // z-level node with payload
  std::size_t linkBytes;      // one forward pointer
};

struct SkiMapMemoryReport {
  std::size_t xNodes = 0;
  std::size_t yNodes = 0;
  std::size_t voxels = 0;
  std::size_t tiles = 0;
  std::size_t lists = 0;
  std::size_t towerLinks = 0;  // forward links held by element nodes
  std::size_t headLinks = 0;   // forward links held by head sentinels
  std::size_t bytes = 0;
  SkiMapLayout layout{};
};

template <VoxelPayload P>
SkiMapLayout skiMapLayout() {
  using Map = SkiMap<P>;
  return {sizeof(typename Map::XList), Map::XList::kNodeBytes, Map::YList::kNodeBytes,
          Map::VoxelList::kNodeBytes, Map::XList::kLinkBytes};
}

/// Walks the whole tree and prices every node, tower link and head tower.
template <VoxelPayload P>
SkiMapMemoryReport measureSkiMapMemory(const SkiMap<P>& map) {
  SkiMapMemoryReport r;
  r.layout = skiMapLayout<P>();
  const auto& root = map.root();
  r.lists = 1;
  r.headLinks += root.headLinks();
  r.towerLinks += root.towerLinks();
  r.xNodes = root.size();
  for (const auto& x : root) {
    ++r.lists;
    r.headLinks += x.value.headLinks();
    r.towerLinks += x.value.towerLinks();
    r.yNodes += x.value.size();
    for (const auto& y : x.value) {
      ++r.lists;
      r.headLinks += y.value.voxels.headLinks();
      r.towerLinks += y.value.voxels.towerLinks();
      r.voxels += y.value.voxels.size();
      r.tiles += y.value.tile.has_value();
    }
  }
  r.bytes = r.layout.listBytes + r.xNodes * r.layout.xNodeBytes + r.yNodes * r.layout.yNodeBytes +
            r.voxels * r.layout.voxelNodeBytes + (r.towerLinks + r.headLinks) * r.layout.linkBytes;
  return r;
}

/// 1 - bytes / denseGridMemory(x, y, z, r).
double memorySavings(std::size_t bytes, double x, double y, double z, double resolution);

// -------------------------------------------------------------- dense grid

/// Full 3D array over a fixed key box. Oracle and timing baseline.
template <VoxelPayload P>
class DenseGrid {
 public:
  DenseGrid(VoxelKey origin, std::array<std::size_t, 3> extent, double resolution)
      : origin_(origin), extent_(extent), resolution_(resolution) {
    if (!(resolution > 0.0)) throw ArgumentError("resolution must be positive");
    std::size_t cells = 1;
    for (std::size_t e : extent) {
      if (e == 0) throw ArgumentError("dense grid extent must be positive");
      cells *= e;
    }
    cells_.resize(cells);
  }

  /// Smallest grid covering every key in `keys`.
  static DenseGrid covering(std::span<const VoxelKey> keys, double resolution) {
    if (keys.empty()) return DenseGrid({0, 0, 0}, {1, 1, 1}, resolution);
    std::array<int, 3> lo{keys[0].ix, keys[0].iy, keys[0].iz};
    std::array<int, 3> hi = lo;
    for (const auto& k : keys) {
      const std::array<int, 3> v{k.ix, k.iy, k.iz};
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], v[a]);
        hi[a] = std::max(hi[a], v[a]);
      }
    }
    return DenseGrid({static_cast<KeyIndex>(lo[0]), static_cast<KeyIndex>(lo[1]), static_cast<KeyIndex>(lo[2])},
                     {static_cast<std::size_t>(hi[0] - lo[0] + 1), static_cast<std::size_t>(hi[1] - lo[1] + 1),
                      static_cast<std::size_t>(hi[2] - lo[2] + 1)},
                     resolution);
  }

  bool contains(const VoxelKey& k) const noexcept {
    const std::array<long, 3> d{long{k.ix} - origin_.ix, long{k.iy} - origin_.iy, long{k.iz} - origin_.iz};
    for (int a = 0; a < 3; ++a) {
      if (d[a] < 0 || static_cast<std::size_t>(d[a]) >= extent_[a]) return false;
    }
    return true;
  }

  std::size_t index(const VoxelKey& k) const {
    if (!contains(k)) throw BoundsError('x', k.ix * resolution_);
    const auto dx = static_cast<std::size_t>(k.ix - origin_.ix);
    const auto dy = static_cast<std::size_t>(k.iy - origin_.iy);
    const auto dz = static_cast<std::size_t>(k.iz - origin_.iz);
    return (dx * extent_[1] + dy) * extent_[2] + dz;
  }

  VoxelKey keyAt(std::size_t index) const {
    const std::size_t dz = index % extent_[2];
    const std::size_t dy = (index / extent_[2]) % extent_[1];
    const std::size_t dx = index / (extent_[2] * extent_[1]);
    return {static_cast<KeyIndex>(origin_.ix + static_cast<long>(dx)),
            static_cast<KeyIndex>(origin_.iy + static_cast<long>(dy)),
            static_cast<KeyIndex>(origin_.iz + static_cast<long>(dz))};
  }

  void integrate(const Point3& p, const typename P::Sample& sample) {
    auto& cell = cells_[index(skimap::quantize(p, resolution_))];
    cell = fuse(cell.value_or(P{}), sample);
  }

  const std::optional<P>& at(const VoxelKey& k) const { return cells_[index(k)]; }

  template <class Visitor>
  std::size_t visitAll(Visitor&& visitor) const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      if (cells_[i]) {
        visitor(keyAt(i), *cells_[i]);
        ++n;
      }
    }
    return n;
  }

  std::size_t cellCount() const noexcept { return cells_.size(); }
  std::size_t bytes() const noexcept { return cells_.size() * sizeof(std::optional<P>); }
  const std::array<std::size_t, 3>& extent() const noexcept { return extent_; }

 private:
  VoxelKey origin_;
  std::array<std::size_t, 3> extent_;
  double resolution_;
  std::vector<std::optional<P>> cells_;
};

// ------------------------------------------------------------------ octree

/// Pointer octree over the 16-bit key cube: 16 levels of subdivision, leaf
/// side equal to the map resolution. Correctness-grade only.
template <VoxelPayload P>
class ReferenceOctree {
 public:
  static constexpr int kDepth = 16;

  struct Node {
    std::array<std::unique_ptr<Node>, 8> children;
    std::optional<P> payload;  // set on leaves only
  };

  explicit ReferenceOctree(double resolution) : resolution_(resolution) {
    if (!(resolution > 0.0)) throw ArgumentError("resolution must be positive");
  }

  double resolution() const noexcept { return resolution_; }

  void integrate(const Point3& p, const typename P::Sample& sample) {
    integrateAt(skimap::quantize(p, resolution_), sample);
  }

  void integrateAt(const VoxelKey& k, const typename P::Sample& sample) {
    Node* node = &root_;
    const auto code = unsignedKey(k);
    for (int level = kDepth - 1; level >= 0; --level) {
      auto& child = node->children[childIndex(code, level)];
      if (!child) {
        child = std::make_unique<Node>();
        ++(level == 0 ? leaves_ : inners_);
      }
      node = child.get();
    }
    node->payload = fuse(node->payload.value_or(P{}), sample);
  }

  std::optional<P> get(const VoxelKey& k) const {
    const Node* node = &root_;
    const auto code = unsignedKey(k);
    for (int level = kDepth - 1; level >= 0 && node != nullptr; --level) {
      node = node->children[childIndex(code, level)].get();
    }
    return node ? node->payload : std::nullopt;
  }

  template <class Visitor>
  std::size_t visitAll(Visitor&& visitor) const {
    std::size_t n = 0;
    walk(root_, kDepth, {0, 0, 0}, [&](const VoxelKey& k, const P& p) {
      visitor(k, p);
      ++n;
    });
    return n;
  }

  /// Voxel centers within `radius` of `center`, pruning octants that miss
  /// the bounding window.
  std::vector<std::pair<VoxelKey, P>> radiusSearch(const Point3& center, double radius) const {
    if (!(radius >= 0.0)) throw ArgumentError("radius must be non-negative");
    std::array<std::int64_t, 3> lo{};
    std::array<std::int64_t, 3> hi{};
    for (int a = 0; a < 3; ++a) {
      lo[a] = floorIndex(center[a] - radius, resolution_) - 1 - kKeyMin;
      hi[a] = floorIndex(center[a] + radius, resolution_) + 1 - kKeyMin;
    }
    std::vector<std::pair<VoxelKey, P>> out;
    const double r2 = radius * radius;
    searchBox(root_, kDepth, {0, 0, 0}, lo, hi, [&](const VoxelKey& k, const P& p) {
      const Point3 c = voxelCenter(k, resolution_);
      if ((c - center).squaredNorm() <= r2) out.emplace_back(k, p);
    });
    return out;
  }

  std::uint64_t leafCount() const noexcept { return leaves_; }
  /// Inner nodes including the root.
  std::uint64_t innerCount() const noexcept { return inners_ + 1; }
  static constexpr std::size_t nodeBytes() noexcept { return sizeof(Node); }
  std::size_t bytes() const noexcept {
    return static_cast<std::size_t>(octreeMemory(leafCount(), sizeof(Node), innerCount(), sizeof(Node)));
  }

 private:
  using Code = std::array<std::uint32_t, 3>;

  static Code unsignedKey(const VoxelKey& k) {
    return {static_cast<std::uint32_t>(k.ix - kKeyMin), static_cast<std::uint32_t>(k.iy - kKeyMin),
            static_cast<std::uint32_t>(k.iz - kKeyMin)};
  }

  static std::size_t childIndex(const Code& c, int level) {
    return ((c[0] >> level) & 1u) << 2 | ((c[1] >> level) & 1u) << 1 | ((c[2] >> level) & 1u);
  }

  static VoxelKey signedKey(const Code& c) {
    return {static_cast<KeyIndex>(static_cast<std::int64_t>(c[0]) + kKeyMin),
            static_cast<KeyIndex>(static_cast<std::int64_t>(c[1]) + kKeyMin),
            static_cast<KeyIndex>(static_cast<std::int64_t>(c[2]) + kKeyMin)};
  }

  template <class F>
  static void walk(const Node& node, int level, Code base, F&& f) {
    if (level == 0) {
      if (node.payload) f(signedKey(base), *node.payload);
      return;
    }
    for (std::size_t i = 0; i < 8; ++i) {
      if (!node.children[i]) continue;
      const std::uint32_t half = 1u << (level - 1);
      Code child = base;
      if (i & 4) child[0] += half;
      if (i & 2) child[1] += half;
      if (i & 1) child[2] += half;
      walk(*node.children[i], level - 1, child, f);
    }
  }

  template <class F>
  static void searchBox(const Node& node, int level, Code base, const std::array<std::int64_t, 3>& lo,
                        const std::array<std::int64_t, 3>& hi, F&& f) {
    const std::int64_t side = std::int64_t{1} << level;
    for (int a = 0; a < 3; ++a) {
      if (static_cast<std::int64_t>(base[a]) + side - 1 < lo[a] || static_cast<std::int64_t>(base[a]) > hi[a]) {
        return;
      }
    }
    if (level == 0) {
      if (node.payload) f(signedKey(base), *node.payload);
      return;
    }
    for (std::size_t i = 0; i < 8; ++i) {
      if (!node.children[i]) continue;
      const std::uint32_t half = 1u << (level - 1);
      Code child = base;
      if (i & 4) child[0] += half;
      if (i & 2) child[1] += half;
      if (i & 1) child[2] += half;
      searchBox(*node.children[i], level - 1, child, lo, hi, f);
    }
  }

  double resolution_;
  Node root_;
  std::uint64_t leaves_ = 0;
  std::uint64_t inners_ = 0;
};

// -------------------------------------------------------------- brute force

/// Exhaustive center-distance filter over a key list.
std::vector<VoxelKey> bruteRadius(std::span<const VoxelKey> occupied, const Point3& center, double radius,
                                  double resolution);

}  // namespace skimap
