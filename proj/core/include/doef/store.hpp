#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "doef/database.hpp"
#include "doef/operations.hpp"

namespace doef {

using PageId = std::uint32_t;
inline constexpr PageId kNoPage = std::numeric_limits<PageId>::max();

struct StoreConfig {
  std::uint32_t page_size = 4096;
  std::uint64_t cache_size = 4ULL * 1024 * 1024;

  void validate() const;
  std::size_t cache_pages() const { return static_cast<std::size_t>(cache_size / page_size); }
};

struct Placement {
  PageId first = kNoPage;
  std::uint32_t pages = 0;  // > 1 only for objects larger than a page
};

/// Object-to-page map with per-page fill accounting.
///
/// Objects never span pages unless they are larger than a page, in which case
/// they own ceil(size / page_size) consecutive dedicated pages. Removing an
/// object leaves a hole; nothing compacts pages except explicit relocation.
class PageStore {
 public:
  explicit PageStore(std::uint32_t page_size = 4096);

  std::uint32_t page_size() const { return page_size_; }
  std::size_t page_count() const { return pages_.size(); }
  std::size_t mapped_count() const { return mapped_; }

  bool is_mapped(ObjectId oid) const {
    return oid < placement_.size() && placement_[oid].first != kNoPage;
  }
  // Throws LookupError when unmapped.
  const Placement& placement(ObjectId oid) const;
  std::uint32_t object_size(ObjectId oid) const;

  std::uint32_t page_used(PageId page) const;
  std::uint32_t page_free(PageId page) const;
  std::span<const ObjectId> page_objects(PageId page) const;
  // True for pages created by allocate_page() that have no disk image yet.
  bool is_fresh(PageId page) const;
  void mark_materialized(PageId page);

  // Next-fit at the tail: the object goes on the last sequential page if it
  // fits, otherwise on a new page.
  void append(ObjectId oid, std::uint32_t size);
  PageId allocate_page();
  // Mapping change only; I/O is the caller's business. Throws StateError when
  // the target lacks room or the object spans several pages.
  void relocate(ObjectId oid, PageId target);
  void unmap(ObjectId oid);

 private:
  struct Page {
    std::uint32_t used = 0;
    bool fresh = false;
    std::vector<ObjectId> objects;
  };

  void check_page(PageId page) const;

  std::uint32_t page_size_;
  std::vector<Page> pages_;
  std::vector<Placement> placement_;
  std::vector<std::uint32_t> sizes_;
  PageId tail_ = kNoPage;
  std::size_t mapped_ = 0;
};

// Packs live objects in oid order, next-fit, never splitting an object.
PageStore place_sequential(const Database& db, const StoreConfig& config);

enum class IoContext { Transaction, Clustering };

struct IoStats {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t clustering_reads = 0;
  std::uint64_t clustering_writes = 0;

  std::uint64_t transaction_io() const { return reads + writes; }
  std::uint64_t clustering_io() const { return clustering_reads + clustering_writes; }
  std::uint64_t total_io() const { return transaction_io() + clustering_io(); }
  friend bool operator==(const IoStats&, const IoStats&) = default;
};

/// LRU page cache with write-back and per-context I/O accounting.
///
/// Reads are charged to the context that misses. A dirty page remembers who
/// dirtied it: its write-back counts as a transaction write if a transaction
/// dirtied it, otherwise as a clustering write.
class BufferPool {
 public:
  explicit BufferPool(std::size_t capacity_pages);

  std::size_t capacity() const { return capacity_; }
  std::size_t resident_count() const { return resident_; }
  const IoStats& stats() const { return stats_; }

  // Returns true on a hit. A miss reads the page, evicting the LRU victim.
  bool touch(PageId page, AccessMode mode, IoContext ctx);
  // Brings a page with no disk image into the cache, dirty, without a read.
  void install_new(PageId page, IoContext ctx);

  bool is_resident(PageId page) const;
  bool is_dirty(PageId page) const;

  // Writes back every dirty page; returns the number of writes.
  std::size_t flush();

  // Resident pages from most to least recently used.
  std::vector<PageId> resident_pages() const;

 private:
  struct Frame {
    PageId prev = kNoPage;
    PageId next = kNoPage;
    bool resident = false;
    bool txn_dirty = false;
    bool clust_dirty = false;
  };

  Frame& frame(PageId page);
  void unlink(PageId page);
  void push_front(PageId page);
  void evict_lru();
  void write_back(Frame& f);
  void mark_dirty(Frame& f, IoContext ctx);

  std::size_t capacity_;
  std::size_t resident_ = 0;
  std::vector<Frame> frames_;
  PageId head_ = kNoPage;  // MRU
  PageId tail_ = kNoPage;  // LRU
  IoStats stats_;
};

enum class AccessResult { Hit, Miss };

// Touches every page of the object in the transaction context. Miss if any
// page missed. Throws LookupError when the object is unmapped.
AccessResult access(const PageStore& store, BufferPool& buffer, ObjectId oid, AccessMode mode);

// Moves a single-page object to `target` in the clustering context: the
// source and target pages are read if absent and both end dirty. A fresh
// target is installed without a read. Returns the number of pages touched
// (0 when the object is already on `target`).
std::size_t move_object(PageStore& store, BufferPool& buffer, ObjectId oid, PageId target);

// Flushes all dirty pages and returns the final counters.
IoStats flush_and_report(BufferPool& buffer);

}  // namespace doef
