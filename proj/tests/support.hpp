#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "doef/database.hpp"

namespace doef::test {

struct Edge {
  ObjectId from;
  ObjectId to;
  RefType type = 0;
};

// Hand-built database: `n` objects, object i in class classes[i] (class 0 when
// empty), orefs from `edges` in order, backrefs filled symmetrically.
inline Database make_graph(std::size_t n, const std::vector<Edge>& edges,
                           std::vector<ClassId> classes = {}, std::uint32_t size = 100) {
  if (classes.empty()) classes.assign(n, 0);
  const ClassId nc = *std::max_element(classes.begin(), classes.end()) + 1;

  DatabaseGenConfig cfg;
  cfg.nc = nc;
  cfg.no = static_cast<std::uint32_t>(n);
  cfg.maxnref = 16;

  std::vector<ClassSpec> specs(nc);
  for (ClassId c = 0; c < nc; ++c) {
    specs[c].id = c;
    specs[c].instance_size = size;
  }
  std::vector<ObjectInstance> objects(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& o = objects[i];
    o.oid = static_cast<ObjectId>(i);
    o.class_id = classes[i];
    o.attributes = {0};
    o.filler_size = size;
    specs[classes[i]].iterator.push_back(o.oid);
  }
  for (const auto& e : edges) {
    objects[e.from].orefs.push_back({e.to, e.type});
    objects[e.to].backrefs.push_back({e.from, e.type});
  }
  return Database(cfg, std::move(specs), std::move(objects));
}

// Binary tree 0 -> {1, 2}, 1 -> {3, 4}, 2 -> {5, 6}.
inline Database fanout2_tree() {
  return make_graph(7, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}, {2, 6}});
}

// Multiset equality of (source, target, type) between orefs and backrefs.
inline bool backrefs_symmetric(const Database& db) {
  std::map<std::tuple<ObjectId, ObjectId, RefType>, long> balance;
  for (ObjectId oid : db.live_objects()) {
    const auto& o = db.object(oid);
    for (const auto& r : o.orefs) ++balance[{oid, r.target, r.type}];
    for (const auto& r : o.backrefs) --balance[{r.target, oid, r.type}];
  }
  return std::all_of(balance.begin(), balance.end(), [](const auto& kv) { return kv.second == 0; });
}

// Pearson chi-square statistic of observed counts against a uniform law.
inline double chi_square_uniform(const std::vector<std::uint64_t>& counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double chi = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    chi += d * d / expected;
  }
  return chi;
}

// Upper 0.1% point of chi-square with k degrees of freedom (Wilson-Hilferty).
inline double chi_square_critical_999(double k) {
  const double z = 3.0902;
  const double a = 2.0 / (9.0 * k);
  return k * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

}  // namespace doef::test
