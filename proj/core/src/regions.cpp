#include "doef/regions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "doef/error.hpp"

namespace doef {

namespace {
constexpr double kSizeEpsilon = 1e-9;
}

void HRegionParams::validate() const {
  if (!(hr_size > 0.0 && hr_size <= 1.0 + kSizeEpsilon)) {
    throw ConfigError("HRegionParams: hr_size must be in (0, 1], got " + std::to_string(hr_size));
  }
  if (!(lowest_prob_w <= init_prob_w && init_prob_w <= highest_prob_w)) {
    throw ConfigError("HRegionParams: need lowest_prob_w <= init_prob_w <= highest_prob_w");
  }
  if (lowest_prob_w < 0.0) throw ConfigError("HRegionParams: lowest_prob_w must be >= 0");
  if (prob_w_incr_size < 0.0) throw ConfigError("HRegionParams: prob_w_incr_size must be >= 0");
}

void step_weight(HRegion& region) {
  const auto& p = region.params;
  // Rounding residue of lo + (hi - lo) must still land exactly on a bound.
  const double snap = 1e-12 * std::max(1.0, p.highest_prob_w);
  if (region.dir == Direction::Up) {
    const double w = region.weight + p.prob_w_incr_size;
    region.weight = w >= p.highest_prob_w - snap ? p.highest_prob_w : w;
  } else {
    const double w = region.weight - p.prob_w_incr_size;
    region.weight = w <= p.lowest_prob_w + snap ? p.lowest_prob_w : w;
  }
}

std::vector<std::size_t> block_sizes(std::size_t n, std::span<const HRegionParams> params) {
  std::vector<std::size_t> sizes(params.size(), 0);
  std::size_t used = 0;
  for (std::size_t i = 0; i + 1 < params.size(); ++i) {
    const auto want = static_cast<std::size_t>(
        std::floor(params[i].hr_size * static_cast<double>(n) + kSizeEpsilon));
    sizes[i] = std::min(want, n - used);
    used += sizes[i];
  }
  if (!params.empty()) sizes.back() = n - used;
  return sizes;
}

RegionSet RegionSet::partition(std::span<const ObjectId> candidates,
                               std::span<const HRegionParams> params, AssignMethod method,
                               Rng& rng, const ClassLookup& class_of) {
  if (candidates.empty()) throw ConfigError("partition: empty candidate set");
  if (params.empty()) throw ConfigError("partition: no region parameters");
  double total = 0.0;
  for (const auto& p : params) {
    p.validate();
    total += p.hr_size;
  }
  if (total > 1.0 + kSizeEpsilon) {
    throw ConfigError("partition: sum of hr_size exceeds 1 (" + std::to_string(total) + ")");
  }

  std::vector<ObjectId> order(candidates.begin(), candidates.end());
  if (method == AssignMethod::Random) {
    rng.shuffle(std::span(order));
  } else {
    if (!class_of) throw ConfigError("partition: ByClass assignment needs a class lookup");
    std::vector<std::pair<ClassId, ObjectId>> keyed;
    keyed.reserve(order.size());
    for (ObjectId oid : order) keyed.emplace_back(class_of(oid), oid);
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t i = 0; i < keyed.size(); ++i) order[i] = keyed[i].second;
  }

  RegionSet rs;
  rs.candidate_count_ = order.size();
  const auto sizes = block_sizes(order.size(), params);
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    HRegion region;
    region.params = params[i];
    region.weight = params[i].init_prob_w;
    region.dir = params[i].init_dir;
    region.members.assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                          order.begin() + static_cast<std::ptrdiff_t>(cursor + sizes[i]));
    cursor += sizes[i];
    rs.regions_.push_back(std::move(region));
  }
  return rs;
}

std::vector<double> RegionSet::weights() const {
  std::vector<double> w;
  w.reserve(regions_.size());
  for (const auto& r : regions_) w.push_back(r.weight);
  return w;
}

std::vector<double> RegionSet::access_probabilities() const {
  auto p = weights();
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(total > 0.0)) throw StateError("access_probabilities: all region weights are zero");
  for (double& x : p) x /= total;
  return p;
}

void RegionSet::rebuild_cumulative() const {
  cumulative_.resize(regions_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    if (!regions_[i].members.empty()) acc += regions_[i].weight;
    cumulative_[i] = acc;
  }
  cumulative_valid_ = true;
}

RegionDraw RegionSet::select(Rng& rng) const {
  if (!cumulative_valid_) rebuild_cumulative();
  const double total = cumulative_.empty() ? 0.0 : cumulative_.back();
  if (!(total > 0.0)) throw StateError("select_root: no nonempty region with positive weight");
  const double target = rng.unit() * total;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) --it;
  auto index = static_cast<std::size_t>(it - cumulative_.begin());
  // Zero-width steps (empty or zero-weight regions) are never returned.
  while (regions_[index].members.empty() || regions_[index].weight <= 0.0) --index;
  const auto& members = regions_[index].members;
  return {index, members[rng.below(members.size())]};
}

bool RegionSet::selectable() const {
  if (!cumulative_valid_) rebuild_cumulative();
  return !cumulative_.empty() && cumulative_.back() > 0.0;
}

std::ptrdiff_t RegionSet::region_of(ObjectId oid) const {
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    const auto& m = regions_[i].members;
    if (std::find(m.begin(), m.end(), oid) != m.end()) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

void RegionSet::set_weight(std::size_t i, double w) {
  regions_.at(i).weight = w;
  cumulative_valid_ = false;
}

void RegionSet::set_dir(std::size_t i, Direction dir) { regions_.at(i).dir = dir; }

void RegionSet::step(std::size_t i) {
  step_weight(regions_.at(i));
  cumulative_valid_ = false;
}

void RegionSet::step_all() {
  for (auto& r : regions_) step_weight(r);
  cumulative_valid_ = false;
}

RegionSet partition(std::span<const ObjectId> candidates, std::span<const HRegionParams> params,
                    AssignMethod method, Rng& rng, const ClassLookup& class_of) {
  return RegionSet::partition(candidates, params, method, rng, class_of);
}

std::vector<double> access_probabilities(const RegionSet& rs) { return rs.access_probabilities(); }

RegionDraw select_root(const RegionSet& rs, Rng& rng) { return rs.select(rng); }

}  // namespace doef
