#pragma once

#include <cstdint>
#include <list>
#include <unordered_map>
#include <vector>

namespace doef::test {

// Textbook LRU with write-back, kept deliberately naive: a recency list with
// the most recent page at the front and a dirty bit per resident page.
class ReferenceLru {
 public:
  explicit ReferenceLru(std::size_t capacity) : capacity_(capacity) {}

  // Returns true on a hit.
  bool access(std::uint32_t page, bool write) {
    auto it = where_.find(page);
    const bool hit = it != where_.end();
    if (hit) {
      order_.erase(it->second);
    } else {
      ++reads;
      if (order_.size() == capacity_) {
        const auto victim = order_.back();
        order_.pop_back();
        where_.erase(victim);
        if (dirty_[victim]) ++writes;
        dirty_.erase(victim);
      }
    }
    order_.push_front(page);
    where_[page] = order_.begin();
    if (write) dirty_[page] = true;
    else dirty_.try_emplace(page, false);
    return hit;
  }

  std::vector<std::uint32_t> contents() const { return {order_.begin(), order_.end()}; }

  std::uint64_t reads = 0;
  std::uint64_t writes = 0;

 private:
  std::size_t capacity_;
  std::list<std::uint32_t> order_;
  std::unordered_map<std::uint32_t, std::list<std::uint32_t>::iterator> where_;
  std::unordered_map<std::uint32_t, bool> dirty_;
};

}  // namespace doef::test
