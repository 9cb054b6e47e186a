#include "doef/store.hpp"

#include <string>

#include "doef/error.hpp"

namespace doef {

void StoreConfig::validate() const {
  if (page_size == 0) throw ConfigError("StoreConfig: page_size must be > 0");
  if (cache_size < page_size) throw ConfigError("StoreConfig: cache_size must be >= page_size");
}

// ---------------------------------------------------------------------------
// PageStore

PageStore::PageStore(std::uint32_t page_size) : page_size_(page_size) {
  if (page_size == 0) throw ConfigError("PageStore: page_size must be > 0");
}

void PageStore::check_page(PageId page) const {
  if (page >= pages_.size()) throw LookupError("unknown page " + std::to_string(page));
}

const Placement& PageStore::placement(ObjectId oid) const {
  if (!is_mapped(oid)) throw LookupError("object " + std::to_string(oid) + " is not mapped");
  return placement_[oid];
}

std::uint32_t PageStore::object_size(ObjectId oid) const {
  placement(oid);
  return sizes_[oid];
}

std::uint32_t PageStore::page_used(PageId page) const {
  check_page(page);
  return pages_[page].used;
}

std::uint32_t PageStore::page_free(PageId page) const { return page_size_ - page_used(page); }

std::span<const ObjectId> PageStore::page_objects(PageId page) const {
  check_page(page);
  return pages_[page].objects;
}

bool PageStore::is_fresh(PageId page) const {
  check_page(page);
  return pages_[page].fresh;
}

void PageStore::mark_materialized(PageId page) {
  check_page(page);
  pages_[page].fresh = false;
}

void PageStore::append(ObjectId oid, std::uint32_t size) {
  if (size == 0) throw ConfigError("PageStore: object size must be > 0");
  if (is_mapped(oid)) throw StateError("object " + std::to_string(oid) + " already mapped");
  if (oid >= placement_.size()) {
    placement_.resize(oid + 1);
    sizes_.resize(oid + 1, 0);
  }
  sizes_[oid] = size;
  ++mapped_;

  if (size > page_size_) {
    const std::uint32_t count = (size + page_size_ - 1) / page_size_;
    const auto first = static_cast<PageId>(pages_.size());
    for (std::uint32_t i = 0; i < count; ++i) {
      Page p;
      p.used = page_size_;
      p.objects.push_back(oid);
      pages_.push_back(std::move(p));
    }
    placement_[oid] = {first, count};
    tail_ = kNoPage;
    return;
  }

  if (tail_ == kNoPage || pages_[tail_].used + size > page_size_) {
    tail_ = static_cast<PageId>(pages_.size());
    pages_.emplace_back();
  }
  pages_[tail_].used += size;
  pages_[tail_].objects.push_back(oid);
  placement_[oid] = {tail_, 1};
}

PageId PageStore::allocate_page() {
  Page p;
  p.fresh = true;
  pages_.push_back(std::move(p));
  return static_cast<PageId>(pages_.size() - 1);
}

void PageStore::relocate(ObjectId oid, PageId target) {
  const auto where = placement(oid);
  check_page(target);
  if (where.pages != 1) throw StateError("cannot relocate a multi-page object");
  if (where.first == target) return;
  const std::uint32_t size = sizes_[oid];
  if (pages_[target].used + size > page_size_) {
    throw StateError("page " + std::to_string(target) + " lacks room for object " +
                     std::to_string(oid));
  }
  auto& src = pages_[where.first];
  std::erase(src.objects, oid);
  src.used -= size;
  pages_[target].used += size;
  pages_[target].objects.push_back(oid);
  placement_[oid].first = target;
}

void PageStore::unmap(ObjectId oid) {
  const auto where = placement(oid);
  for (std::uint32_t i = 0; i < where.pages; ++i) {
    auto& page = pages_[where.first + i];
    std::erase(page.objects, oid);
    page.used = where.pages == 1 ? page.used - sizes_[oid] : 0;
  }
  placement_[oid] = {};
  sizes_[oid] = 0;
  --mapped_;
}

PageStore place_sequential(const Database& db, const StoreConfig& config) {
  config.validate();
  PageStore store(config.page_size);
  for (ObjectId oid : db.live_objects()) store.append(oid, db.object(oid).filler_size);
  return store;
}

// ---------------------------------------------------------------------------
// BufferPool

BufferPool::BufferPool(std::size_t capacity_pages) : capacity_(capacity_pages) {
  if (capacity_pages == 0) throw ConfigError("BufferPool: capacity must be >= 1 page");
}

BufferPool::Frame& BufferPool::frame(PageId page) {
  if (page >= frames_.size()) frames_.resize(static_cast<std::size_t>(page) + 1);
  return frames_[page];
}

bool BufferPool::is_resident(PageId page) const {
  return page < frames_.size() && frames_[page].resident;
}

bool BufferPool::is_dirty(PageId page) const {
  return page < frames_.size() && (frames_[page].txn_dirty || frames_[page].clust_dirty);
}

void BufferPool::unlink(PageId page) {
  Frame& f = frames_[page];
  if (f.prev != kNoPage) frames_[f.prev].next = f.next; else head_ = f.next;
  if (f.next != kNoPage) frames_[f.next].prev = f.prev; else tail_ = f.prev;
  f.prev = f.next = kNoPage;
}

void BufferPool::push_front(PageId page) {
  Frame& f = frames_[page];
  f.prev = kNoPage;
  f.next = head_;
  if (head_ != kNoPage) frames_[head_].prev = page;
  head_ = page;
  if (tail_ == kNoPage) tail_ = page;
}

void BufferPool::write_back(Frame& f) {
  if (f.txn_dirty) {
    ++stats_.writes;
  } else if (f.clust_dirty) {
    ++stats_.clustering_writes;
  }
  f.txn_dirty = f.clust_dirty = false;
}

void BufferPool::mark_dirty(Frame& f, IoContext ctx) {
  if (ctx == IoContext::Transaction) f.txn_dirty = true; else f.clust_dirty = true;
}

void BufferPool::evict_lru() {
  const PageId victim = tail_;
  unlink(victim);
  Frame& f = frames_[victim];
  write_back(f);
  f.resident = false;
  --resident_;
}

bool BufferPool::touch(PageId page, AccessMode mode, IoContext ctx) {
  Frame& probe = frame(page);
  const bool hit = probe.resident;
  if (hit) {
    unlink(page);
  } else {
    if (resident_ == capacity_) evict_lru();
    if (ctx == IoContext::Transaction) ++stats_.reads; else ++stats_.clustering_reads;
    frames_[page].resident = true;
    ++resident_;
  }
  push_front(page);
  if (mode == AccessMode::Write) mark_dirty(frames_[page], ctx);
  return hit;
}

void BufferPool::install_new(PageId page, IoContext ctx) {
  Frame& probe = frame(page);
  if (probe.resident) {
    unlink(page);
  } else {
    if (resident_ == capacity_) evict_lru();
    frames_[page].resident = true;
    ++resident_;
  }
  push_front(page);
  mark_dirty(frames_[page], ctx);
}

std::size_t BufferPool::flush() {
  std::size_t writes = 0;
  for (PageId p = head_; p != kNoPage; p = frames_[p].next) {
    Frame& f = frames_[p];
    if (f.txn_dirty || f.clust_dirty) {
      write_back(f);
      ++writes;
    }
  }
  return writes;
}

std::vector<PageId> BufferPool::resident_pages() const {
  std::vector<PageId> out;
  out.reserve(resident_);
  for (PageId p = head_; p != kNoPage; p = frames_[p].next) out.push_back(p);
  return out;
}

// ---------------------------------------------------------------------------

AccessResult access(const PageStore& store, BufferPool& buffer, ObjectId oid, AccessMode mode) {
  const auto where = store.placement(oid);
  bool all_hit = true;
  for (std::uint32_t i = 0; i < where.pages; ++i) {
    all_hit &= buffer.touch(where.first + i, mode, IoContext::Transaction);
  }
  return all_hit ? AccessResult::Hit : AccessResult::Miss;
}

std::size_t move_object(PageStore& store, BufferPool& buffer, ObjectId oid, PageId target) {
  const auto where = store.placement(oid);
  if (where.pages != 1) throw StateError("cannot move a multi-page object");
  if (where.first == target) return 0;
  if (store.page_free(target) < store.object_size(oid)) {
    throw StateError("move_object: target page lacks room");
  }
  buffer.touch(where.first, AccessMode::Write, IoContext::Clustering);
  if (store.is_fresh(target)) {
    buffer.install_new(target, IoContext::Clustering);
    store.mark_materialized(target);
  } else {
    buffer.touch(target, AccessMode::Write, IoContext::Clustering);
  }
  store.relocate(oid, target);
  return 2;
}

IoStats flush_and_report(BufferPool& buffer) {
  buffer.flush();
  return buffer.stats();
}

}  // namespace doef
