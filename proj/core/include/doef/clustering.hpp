#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "doef/operations.hpp"
#include "doef/store.hpp"

namespace doef {

/// Dynamic clustering policy hooked into the transaction loop.
///
/// observe() sees every transaction's trace; maybe_recluster() runs once per
/// transaction afterwards and may move objects between pages. All I/O it
/// causes goes through move_object(), so it lands on the clustering counters.
class ClusteringPolicy {
 public:
  virtual ~ClusteringPolicy() = default;
  virtual std::string name() const = 0;
  virtual void observe(const AccessTrace& trace) = 0;
  // Returns the number of distinct pages touched by reorganization.
  virtual std::size_t maybe_recluster(PageStore& store, BufferPool& buffer) = 0;
};

class NoClustering final : public ClusteringPolicy {
 public:
  std::string name() const override { return "none"; }
  void observe(const AccessTrace&) override {}
  std::size_t maybe_recluster(PageStore&, BufferPool&) override { return 0; }
};

std::unique_ptr<ClusteringPolicy> no_clustering();

struct CfcConfig {
  std::uint32_t stat_window = 1000;
  std::uint32_t trigger_period = 100;
  std::uint32_t min_heat = 8;
  double badness_threshold = 0.5;
  std::uint32_t max_pages_per_round = 64;  // 0 = uncapped

  void validate() const;
  // Reacts to the last few transactions and moves anything co-accessed once.
  static CfcConfig aggressive();
  friend bool operator==(const CfcConfig&, const CfcConfig&) = default;
};

/// Careful flexible clustering.
///
/// Heat is the access count of an object over the last stat_window
/// transactions; co-access counts consecutive distinct object pairs of each
/// trace over the same window. A pair is strong when its count reaches
/// min_heat and both ends are hot. A page's badness is the share of strong
/// pair weight of its hot objects that points off the page. Every
/// trigger_period transactions the worst pages above badness_threshold are
/// taken (at most max_pages_per_round), and each of their hot objects is
/// packed onto fresh pages together with its strong partners, strongest first.
class CfcPolicy final : public ClusteringPolicy {
 public:
  explicit CfcPolicy(CfcConfig config = {});

  std::string name() const override { return "cfc"; }
  const CfcConfig& config() const { return config_; }
  void observe(const AccessTrace& trace) override;
  std::size_t maybe_recluster(PageStore& store, BufferPool& buffer) override;

  std::uint32_t heat(ObjectId oid) const;
  std::uint32_t co_access(ObjectId a, ObjectId b) const;
  std::size_t tracked_pairs() const { return pairs_.size(); }
  std::uint64_t rounds() const { return rounds_; }
  std::uint64_t objects_moved() const { return objects_moved_; }

  // Badness of every page holding a hot object with strong partners.
  std::vector<std::pair<PageId, double>> page_badness(const PageStore& store) const;

 private:
  struct Window {
    std::vector<ObjectId> objects;
    std::vector<std::uint64_t> pairs;
  };
  using Adjacency = std::unordered_map<ObjectId, std::vector<std::pair<ObjectId, std::uint32_t>>>;

  Adjacency strong_pairs(const PageStore& store) const;

  CfcConfig config_;
  std::deque<Window> window_;
  std::unordered_map<ObjectId, std::uint32_t> heat_;
  std::unordered_map<std::uint64_t, std::uint32_t> pairs_;
  std::uint64_t transactions_ = 0;
  std::uint64_t rounds_ = 0;
  std::uint64_t objects_moved_ = 0;
};

}  // namespace doef
