#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <limits>
#include <memory>
#include <utility>

#include "skimap/errors.hpp"

namespace skimap {

/// SplitMix64: 8 bytes of state, so every nested list can own one.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Mixes a parent seed with a key to seed a child list deterministically.
constexpr std::uint64_t mixSeed(std::uint64_t seed, std::uint64_t salt) noexcept {
  std::uint64_t z = seed ^ (salt + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct SkipListOptions {
  int maxLevel = 8;
  double promotionProbability = 0.5;
};

/// Ordered map from signed integer keys to values, implemented as a
/// probabilistic multi-level linked list.
///
/// Node heights are drawn with a single random draw per insertion (a capped
/// geometric variate), so for a fixed seed the height of a node under depth
/// d is min(G, d) for the same G. Raising maxLevel never shrinks a node.
///
/// The head tower is allocated lazily on first insertion; an empty list
/// owns no heap memory.
///
/// Not internally synchronized: one writer, or any number of readers.
template <std::signed_integral Key, class Value, class Rng = SplitMix64>
class SkipList {
 public:
  struct Entry {
    Key key;
    Value value;
  };

 private:
  struct Node {
    Entry entry;
    int height;
    std::unique_ptr<Node*[]> next;
  };

 public:
  static constexpr std::size_t kNodeBytes = sizeof(Node);
  static constexpr std::size_t kLinkBytes = sizeof(Node*);

  explicit SkipList(SkipListOptions options = {}, Rng rng = Rng{})
      : maxLevel_(options.maxLevel),
        promotion_(options.promotionProbability),
        rng_(std::move(rng)) {
    if (maxLevel_ < 1 || maxLevel_ > 255) {
      throw ArgumentError("skiplist maxLevel must be in [1, 255]");
    }
    if (!(promotion_ > 0.0 && promotion_ < 1.0)) {
      throw ArgumentError("skiplist promotion probability must be in (0, 1)");
    }
    logPromotion_ = std::log(promotion_);
  }

  SkipList(const SkipList&) = delete;
  SkipList& operator=(const SkipList&) = delete;

  SkipList(SkipList&& other) noexcept
      : maxLevel_(other.maxLevel_),
        level_(std::exchange(other.level_, 0)),
        count_(std::exchange(other.count_, 0)),
        towerLinks_(std::exchange(other.towerLinks_, 0)),
        promotion_(other.promotion_),
        logPromotion_(other.logPromotion_),
        rng_(std::move(other.rng_)),
        head_(std::move(other.head_)) {}

  SkipList& operator=(SkipList&& other) noexcept {
    if (this != &other) {
      clear();
      maxLevel_ = other.maxLevel_;
      level_ = std::exchange(other.level_, 0);
      count_ = std::exchange(other.count_, 0);
      towerLinks_ = std::exchange(other.towerLinks_, 0);
      promotion_ = other.promotion_;
      logPromotion_ = other.logPromotion_;
      rng_ = std::move(other.rng_);
      head_ = std::move(other.head_);
    }
    return *this;
  }

  ~SkipList() { clear(); }

  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  int maxLevel() const noexcept { return maxLevel_; }
  int currentLevel() const noexcept { return level_; }
  double promotionProbability() const noexcept { return promotion_; }

  /// Sum of all node heights (forward links owned by element nodes).
  std::size_t towerLinks() const noexcept { return towerLinks_; }

  /// Links owned by the head sentinel: maxLevel once allocated, else 0.
  std::size_t headLinks() const noexcept {
    return head_ ? static_cast<std::size_t>(maxLevel_) : 0;
  }

  void clear() noexcept {
    if (!head_) return;
    Node* node = head_[0];
    while (node != nullptr) {
      Node* next = node->next[0];
      delete node;
      node = next;
    }
    head_.reset();
    level_ = 0;
    count_ = 0;
    towerLinks_ = 0;
  }

  /// Returns the entry for `key`, creating it with `makeValue()` if absent.
  /// An existing value is left untouched.
  template <class Factory>
  std::pair<Entry&, bool> insertOrGet(Key key, Factory&& makeValue) {
    ensureHead();
    Node** update[kMaxSupportedLevel];
    Node** links = head_.get();
    for (int lvl = level_ - 1; lvl >= 0; --lvl) {
      while (links[lvl] != nullptr && links[lvl]->entry.key < key) {
        links = links[lvl]->next.get();
      }
      update[lvl] = links;
    }
    if (level_ > 0 && links[0] != nullptr && links[0]->entry.key == key) {
      return {links[0]->entry, false};
    }

    const int height = randomHeight();
    for (int lvl = level_; lvl < height; ++lvl) update[lvl] = head_.get();
    if (height > level_) level_ = height;

    auto node = std::make_unique<Node>(
        Node{Entry{key, makeValue()}, height, std::make_unique<Node*[]>(height)});
    Node* raw = node.release();
    for (int lvl = 0; lvl < height; ++lvl) {
      raw->next[lvl] = update[lvl][lvl];
      update[lvl][lvl] = raw;
    }
    ++count_;
    towerLinks_ += static_cast<std::size_t>(height);
    return {raw->entry, true};
  }

  std::pair<Entry&, bool> insertOrGet(Key key) {
    return insertOrGet(key, [] { return Value{}; });
  }

  Entry* find(Key key) noexcept {
    Node* node = lowerBound(key);
    return (node != nullptr && node->entry.key == key) ? &node->entry : nullptr;
  }

  const Entry* find(Key key) const noexcept {
    return const_cast<SkipList*>(this)->find(key);
  }

  struct Neighbors {
    const Entry* predecessor = nullptr;
    const Entry* successor = nullptr;
  };

  /// Greatest entry with key' < key and least entry with key' > key. Either
  /// side is null at the extremes. An exact match is reported by find().
  Neighbors findNeighbors(Key key) const noexcept {
    Neighbors out;
    if (!head_) return out;
    Node* const* links = head_.get();
    const Node* pred = nullptr;
    for (int lvl = level_ - 1; lvl >= 0; --lvl) {
      while (links[lvl] != nullptr && links[lvl]->entry.key < key) {
        pred = links[lvl];
        links = links[lvl]->next.get();
      }
    }
    if (pred != nullptr) out.predecessor = &pred->entry;
    const Node* candidate = level_ > 0 ? links[0] : nullptr;
    if (candidate != nullptr && candidate->entry.key == key) candidate = candidate->next[0];
    if (candidate != nullptr) out.successor = &candidate->entry;
    return out;
  }

  /// Calls visitor(entry) for every lo <= key <= hi in ascending order.
  /// Throws ArgumentError when lo > hi.
  template <class Visitor>
  std::size_t rangeIterate(Key lo, Key hi, Visitor&& visitor) {
    if (lo > hi) throw ArgumentError("empty range: lo > hi");
    std::size_t visited = 0;
    for (Node* node = lowerBound(lo); node != nullptr && node->entry.key <= hi;
         node = node->next[0]) {
      visitor(node->entry);
      ++visited;
    }
    return visited;
  }

  template <class Visitor>
  std::size_t rangeIterate(Key lo, Key hi, Visitor&& visitor) const {
    if (lo > hi) throw ArgumentError("empty range: lo > hi");
    std::size_t visited = 0;
    for (const Node* node = lowerBound(lo); node != nullptr && node->entry.key <= hi;
         node = node->next[0]) {
      visitor(static_cast<const Entry&>(node->entry));
      ++visited;
    }
    return visited;
  }

  bool remove(Key key) {
    if (!head_ || level_ == 0) return false;
    Node** update[kMaxSupportedLevel];
    Node** links = head_.get();
    for (int lvl = level_ - 1; lvl >= 0; --lvl) {
      while (links[lvl] != nullptr && links[lvl]->entry.key < key) {
        links = links[lvl]->next.get();
      }
      update[lvl] = links;
    }
    Node* target = links[0];
    if (target == nullptr || target->entry.key != key) return false;
    for (int lvl = 0; lvl < target->height; ++lvl) {
      update[lvl][lvl] = target->next[lvl];
    }
    while (level_ > 0 && head_[level_ - 1] == nullptr) --level_;
    towerLinks_ -= static_cast<std::size_t>(target->height);
    --count_;
    delete target;
    return true;
  }

  /// Height of the node holding `key`, 0 if absent. Exposed for structural
  /// checks.
  int heightOf(Key key) const noexcept {
    const Node* node = const_cast<SkipList*>(this)->lowerBound(key);
    return (node != nullptr && node->entry.key == key) ? node->height : 0;
  }

  /// Walks every level and verifies ordering, the subset property and the
  /// element count. Returns false on the first violation.
  bool checkInvariants() const {
    if (!head_) return count_ == 0 && level_ == 0;
    std::size_t walked = 0;
    std::size_t links = 0;
    for (const Node* n = head_[0]; n != nullptr; n = n->next[0]) {
      if (n->height < 1 || n->height > maxLevel_) return false;
      if (n->next[0] != nullptr && !(n->entry.key < n->next[0]->entry.key)) return false;
      ++walked;
      links += static_cast<std::size_t>(n->height);
    }
    if (walked != count_ || links != towerLinks_) return false;
    for (int lvl = 1; lvl < maxLevel_; ++lvl) {
      // Every node on level lvl must appear on level lvl - 1, in order.
      const Node* below = head_[lvl - 1];
      for (const Node* n = head_[lvl]; n != nullptr; n = n->next[lvl]) {
        if (lvl >= level_) return false;
        if (n->height <= lvl) return false;
        while (below != nullptr && below != n) below = below->next[lvl - 1];
        if (below == nullptr) return false;
        if (n->next[lvl] != nullptr && !(n->entry.key < n->next[lvl]->entry.key)) {
          return false;
        }
      }
    }
    return true;
  }

  template <bool Const>
  class BasicIterator {
    using NodePtr = std::conditional_t<Const, const Node*, Node*>;

   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = Entry;
    using difference_type = std::ptrdiff_t;
    using pointer = std::conditional_t<Const, const Entry*, Entry*>;
    using reference = std::conditional_t<Const, const Entry&, Entry&>;

    BasicIterator() = default;
    explicit BasicIterator(NodePtr node) : node_(node) {}

    reference operator*() const { return node_->entry; }
    pointer operator->() const { return &node_->entry; }
    BasicIterator& operator++() {
      node_ = node_->next[0];
      return *this;
    }
    BasicIterator operator++(int) {
      BasicIterator copy = *this;
      ++*this;
      return copy;
    }
    friend bool operator==(const BasicIterator& a, const BasicIterator& b) {
      return a.node_ == b.node_;
    }

   private:
    NodePtr node_ = nullptr;
  };

  using iterator = BasicIterator<false>;
  using const_iterator = BasicIterator<true>;

  iterator begin() noexcept { return iterator(head_ ? head_[0] : nullptr); }
  iterator end() noexcept { return iterator(nullptr); }
  const_iterator begin() const noexcept {
    return const_iterator(head_ ? head_[0] : nullptr);
  }
  const_iterator end() const noexcept { return const_iterator(nullptr); }

 private:
  static constexpr int kMaxSupportedLevel = 255;

  void ensureHead() {
    if (!head_) head_ = std::make_unique<Node*[]>(static_cast<std::size_t>(maxLevel_));
  }

  int randomHeight() {
    // 53-bit uniform in (0, 1].
    const double u = 1.0 - static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    const double g = std::floor(std::log(u) / logPromotion_);
    if (!(g < static_cast<double>(maxLevel_ - 1))) return maxLevel_;
    return 1 + static_cast<int>(g);
  }

  Node* lowerBound(Key key) const noexcept {
    if (!head_ || level_ == 0) return nullptr;
    Node* const* links = head_.get();
    for (int lvl = level_ - 1; lvl >= 0; --lvl) {
      while (links[lvl] != nullptr && links[lvl]->entry.key < key) {
        links = links[lvl]->next.get();
      }
    }
    return links[0];
  }

  int maxLevel_;
  int level_ = 0;
  std::size_t count_ = 0;
  std::size_t towerLinks_ = 0;
  double promotion_;
  double logPromotion_ = 0.0;
  Rng rng_;
  std::unique_ptr<Node*[]> head_;
};

}  // namespace skimap
