#include "doef/clustering.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <unordered_set>

#include "doef/error.hpp"

namespace doef {

namespace {

std::uint64_t pair_key(ObjectId a, ObjectId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

ObjectId key_first(std::uint64_t key) { return static_cast<ObjectId>(key >> 32); }
ObjectId key_second(std::uint64_t key) { return static_cast<ObjectId>(key & 0xFFFFFFFFULL); }

template <class Map, class Key>
void decrement(Map& map, const Key& key) {
  auto it = map.find(key);
  if (it == map.end()) return;
  if (--it->second == 0) map.erase(it);
}

}  // namespace

std::unique_ptr<ClusteringPolicy> no_clustering() { return std::make_unique<NoClustering>(); }

void CfcConfig::validate() const {
  if (stat_window == 0) throw ConfigError("CfcConfig: stat_window must be > 0");
  if (trigger_period == 0) throw ConfigError("CfcConfig: trigger_period must be > 0");
  if (min_heat == 0) throw ConfigError("CfcConfig: min_heat must be > 0");
  if (!(badness_threshold > 0.0 && badness_threshold <= 1.0)) {
    throw ConfigError("CfcConfig: badness_threshold must be in (0, 1]");
  }
}

CfcConfig CfcConfig::aggressive() {
  CfcConfig c;
  c.stat_window = 50;
  c.trigger_period = 50;
  c.min_heat = 1;
  c.badness_threshold = 1e-9;
  c.max_pages_per_round = 0;
  return c;
}

CfcPolicy::CfcPolicy(CfcConfig config) : config_(config) { config_.validate(); }

std::uint32_t CfcPolicy::heat(ObjectId oid) const {
  auto it = heat_.find(oid);
  return it == heat_.end() ? 0 : it->second;
}

std::uint32_t CfcPolicy::co_access(ObjectId a, ObjectId b) const {
  if (a == b) return 0;
  auto it = pairs_.find(pair_key(a, b));
  return it == pairs_.end() ? 0 : it->second;
}

void CfcPolicy::observe(const AccessTrace& trace) {
  Window w;
  w.objects.reserve(trace.accesses.size());
  for (std::size_t i = 0; i < trace.accesses.size(); ++i) {
    const ObjectId oid = trace.accesses[i].oid;
    w.objects.push_back(oid);
    ++heat_[oid];
    if (i > 0) {
      const ObjectId prev = trace.accesses[i - 1].oid;
      if (prev != oid) {
        const auto key = pair_key(prev, oid);
        w.pairs.push_back(key);
        ++pairs_[key];
      }
    }
  }
  window_.push_back(std::move(w));
  while (window_.size() > config_.stat_window) {
    for (ObjectId oid : window_.front().objects) decrement(heat_, oid);
    for (std::uint64_t key : window_.front().pairs) decrement(pairs_, key);
    window_.pop_front();
  }
}

CfcPolicy::Adjacency CfcPolicy::strong_pairs(const PageStore& store) const {
  Adjacency adj;
  auto movable = [&](ObjectId o) {
    return store.is_mapped(o) && store.placement(o).pages == 1 && heat(o) >= config_.min_heat;
  };
  for (const auto& [key, count] : pairs_) {
    if (count < config_.min_heat) continue;
    const ObjectId a = key_first(key);
    const ObjectId b = key_second(key);
    if (!movable(a) || !movable(b)) continue;
    adj[a].emplace_back(b, count);
    adj[b].emplace_back(a, count);
  }
  // Strongest partner first, oid as tie-break, so rounds are reproducible.
  for (auto& [oid, partners] : adj) {
    std::sort(partners.begin(), partners.end(),
              [](const auto& x, const auto& y) {
                return x.second != y.second ? x.second > y.second : x.first < y.first;
              });
  }
  return adj;
}

std::vector<std::pair<PageId, double>> CfcPolicy::page_badness(const PageStore& store) const {
  const auto adj = strong_pairs(store);
  std::unordered_map<PageId, std::pair<double, double>> acc;  // off, total
  for (const auto& [oid, partners] : adj) {
    const PageId page = store.placement(oid).first;
    auto& [off, total] = acc[page];
    for (const auto& [other, count] : partners) {
      total += count;
      if (store.placement(other).first != page) off += count;
    }
  }
  std::vector<std::pair<PageId, double>> out;
  out.reserve(acc.size());
  for (const auto& [page, v] : acc) out.emplace_back(page, v.first / v.second);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t CfcPolicy::maybe_recluster(PageStore& store, BufferPool& buffer) {
  ++transactions_;
  if (transactions_ % config_.trigger_period != 0) return 0;

  auto badness = page_badness(store);
  std::erase_if(badness, [&](const auto& pb) { return pb.second <= config_.badness_threshold; });
  if (badness.empty()) return 0;
  std::sort(badness.begin(), badness.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  if (config_.max_pages_per_round != 0 && badness.size() > config_.max_pages_per_round) {
    badness.resize(config_.max_pages_per_round);
  }
  ++rounds_;

  const auto adj = strong_pairs(store);
  std::unordered_set<ObjectId> placed;
  std::set<PageId> touched;
  PageId target = kNoPage;

  auto place = [&](ObjectId oid) {
    placed.insert(oid);
    const std::uint32_t size = store.object_size(oid);
    if (target == kNoPage || store.page_free(target) < size) target = store.allocate_page();
    const PageId source = store.placement(oid).first;
    if (move_object(store, buffer, oid, target) != 0) {
      touched.insert(source);
      touched.insert(target);
      ++objects_moved_;
    }
  };

  for (const auto& [page, bad] : badness) {
    std::vector<ObjectId> seeds;
    for (ObjectId oid : store.page_objects(page)) {
      if (adj.contains(oid)) seeds.push_back(oid);
    }
    std::sort(seeds.begin(), seeds.end(), [&](ObjectId x, ObjectId y) {
      const auto hx = heat(x), hy = heat(y);
      return hx != hy ? hx > hy : x < y;
    });
    for (ObjectId seed : seeds) {
      if (placed.contains(seed)) continue;
      // Grow the group along the strongest edge leaving it.
      using Edge = std::pair<std::uint32_t, ObjectId>;
      auto weaker = [](const Edge& x, const Edge& y) {
        return x.first != y.first ? x.first < y.first : x.second > y.second;
      };
      std::priority_queue<Edge, std::vector<Edge>, decltype(weaker)> frontier(weaker);
      auto expand = [&](ObjectId oid) {
        for (const auto& [other, count] : adj.at(oid)) {
          if (!placed.contains(other)) frontier.emplace(count, other);
        }
      };
      place(seed);
      expand(seed);
      while (!frontier.empty()) {
        const ObjectId next = frontier.top().second;
        frontier.pop();
        if (placed.contains(next)) continue;
        place(next);
        expand(next);
      }
    }
  }
  return touched.size();
}

}  // namespace doef
