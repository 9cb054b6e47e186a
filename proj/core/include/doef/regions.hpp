#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "doef/database.hpp"
#include "doef/rng.hpp"

namespace doef {

enum class AssignMethod { Random, ByClass };
enum class Direction { Up, Down };

struct HRegionParams {
  double hr_size = 1.0;  // fraction of the candidate set
  double init_prob_w = 1.0;
  double lowest_prob_w = 0.0;
  double highest_prob_w = 1.0;
  double prob_w_incr_size = 0.0;
  AssignMethod object_assign_method = AssignMethod::Random;
  Direction init_dir = Direction::Down;

  void validate() const;
};

struct HRegion {
  HRegionParams params;
  std::vector<ObjectId> members;
  double weight = 0.0;
  Direction dir = Direction::Down;
};

// weight <- clamp(weight +/- incr, [lowest, highest]) in the region's direction.
void step_weight(HRegion& region);

using ClassLookup = std::function<ClassId(ObjectId)>;

struct RegionDraw {
  std::size_t region = 0;
  ObjectId oid = kNoObject;
};

/// A partition of a candidate object set into H-regions.
///
/// Access probability of region i is w_i / sum(w). Sampling skips empty
/// regions and renormalizes over the nonempty ones. The cumulative weight
/// table used for sampling is rebuilt lazily after weights change.
class RegionSet {
 public:
  RegionSet() = default;

  /// Cuts `candidates` into one region per entry of `params`.
  ///
  /// Random shuffles the candidates with `rng` first; ByClass sorts them by
  /// (class id, oid) and needs `class_of`. Region i receives
  /// floor(hr_size_i * N) consecutive candidates and the last region takes the
  /// remainder. Weights and directions start at init_prob_w / init_dir.
  static RegionSet partition(std::span<const ObjectId> candidates,
                             std::span<const HRegionParams> params, AssignMethod method,
                             Rng& rng, const ClassLookup& class_of = {});

  std::size_t size() const { return regions_.size(); }
  std::size_t candidate_count() const { return candidate_count_; }
  const HRegion& region(std::size_t i) const { return regions_.at(i); }
  std::span<const HRegion> regions() const { return regions_; }

  std::vector<double> weights() const;
  // w_i / sum(w). Throws StateError when all weights are zero.
  std::vector<double> access_probabilities() const;

  // Region by access probability (empty regions skipped), then a member
  // uniformly within it.
  RegionDraw select(Rng& rng) const;
  // True when some nonempty region has positive weight.
  bool selectable() const;

  // Region index holding `oid`, or -1.
  std::ptrdiff_t region_of(ObjectId oid) const;

  void set_weight(std::size_t i, double w);
  void set_dir(std::size_t i, Direction dir);
  void step(std::size_t i);
  void step_all();

 private:
  void rebuild_cumulative() const;

  std::vector<HRegion> regions_;
  std::size_t candidate_count_ = 0;
  mutable std::vector<double> cumulative_;
  mutable bool cumulative_valid_ = false;
};

// Same as RegionSet::partition.
RegionSet partition(std::span<const ObjectId> candidates, std::span<const HRegionParams> params,
                    AssignMethod method, Rng& rng, const ClassLookup& class_of = {});

std::vector<double> access_probabilities(const RegionSet& rs);

RegionDraw select_root(const RegionSet& rs, Rng& rng);

// Block sizes produced by partition() for N candidates.
std::vector<std::size_t> block_sizes(std::size_t n, std::span<const HRegionParams> params);

}  // namespace doef
