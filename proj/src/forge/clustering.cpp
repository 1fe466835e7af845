#include "biaslens/forge/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

namespace biaslens::forge {

double euclidean_distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::dimension_mismatch,
                fmt::format("distance between dimensions {} and {}", a.size(), b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

namespace {

/// Upper-triangular distance matrix without the diagonal.
class CondensedMatrix {
 public:
  explicit CondensedMatrix(std::size_t n) : n_(n), data_(n * (n - 1) / 2) {}
  double& at(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return data_[i * n_ - i * (i + 1) / 2 + (j - i - 1)];
  }

 private:
  std::size_t n_;
  std::vector<double> data_;
};

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

/// Complete-linkage agglomeration of `points` (indices into `embeddings`).
/// `rank[p]` orders points by id and drives tie-breaking.
std::vector<std::vector<std::size_t>> agglomerate(const std::vector<std::size_t>& points,
                                                  std::span<const Embedding> embeddings,
                                                  std::span<const std::size_t> rank,
                                                  double alpha) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {points[i]};
  if (n < 2) return members;

  CondensedMatrix dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist.at(i, j) = euclidean_distance(embeddings[points[i]], embeddings[points[j]]);
    }
  }

  // key[c] = smallest id rank in cluster c
  std::vector<std::size_t> key(n);
  for (std::size_t i = 0; i < n; ++i) key[i] = rank[points[i]];
  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), 0);

  // (distance, lower key, higher key) ordering of a candidate merge
  auto less = [&](double da, std::size_t ia, std::size_t ja, double db, std::size_t ib,
                  std::size_t jb) {
    if (da != db) return da < db;
    auto pa = std::minmax(key[ia], key[ja]);
    auto pb = std::minmax(key[ib], key[jb]);
    return pa < pb;
  };

  std::vector<double> best_d(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> best_j(n, kNone);
  auto recompute = [&](std::size_t i) {
    best_d[i] = std::numeric_limits<double>::infinity();
    best_j[i] = kNone;
    for (auto j : active) {
      if (j == i) continue;
      double d = dist.at(i, j);
      if (best_j[i] == kNone || less(d, i, j, best_d[i], i, best_j[i])) {
        best_d[i] = d;
        best_j[i] = j;
      }
    }
  };
  for (auto i : active) recompute(i);

  while (active.size() > 1) {
    std::size_t a = kNone;
    for (auto i : active) {
      if (best_j[i] == kNone) continue;
      if (a == kNone || less(best_d[i], i, best_j[i], best_d[a], a, best_j[a])) a = i;
    }
    if (a == kNone || best_d[a] > alpha) break;
    std::size_t b = best_j[a];

    for (auto k : active) {
      if (k == a || k == b) continue;
      dist.at(a, k) = std::max(dist.at(a, k), dist.at(b, k));
    }
    key[a] = std::min(key[a], key[b]);
    members[a].insert(members[a].end(), members[b].begin(), members[b].end());
    members[b].clear();
    active.erase(std::find(active.begin(), active.end(), b));

    recompute(a);
    for (auto k : active) {
      if (k == a) continue;
      if (best_j[k] == a || best_j[k] == b) {
        recompute(k);
      } else if (less(dist.at(k, a), k, a, best_d[k], k, best_j[k])) {
        best_d[k] = dist.at(k, a);
        best_j[k] = a;
      }
    }
  }

  std::vector<std::vector<std::size_t>> out;
  for (auto i : active) out.push_back(std::move(members[i]));
  return out;
}

/// Sets centroid and representative for a cluster given member indices.
Cluster make_cluster(std::vector<std::size_t> idx, std::span<const IndicatorRecord> records,
                     std::span<const Embedding> embeddings) {
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t x, std::size_t y) { return records[x].id < records[y].id; });
  const auto dim = embeddings[idx.front()].size();
  Cluster c;
  c.centroid.assign(dim, 0.0);
  for (auto i : idx) {
    for (std::size_t d = 0; d < dim; ++d) c.centroid[d] += embeddings[i][d];
  }
  for (auto& x : c.centroid) x /= static_cast<double>(idx.size());

  double best = std::numeric_limits<double>::infinity();
  for (auto i : idx) {
    c.member_ids.push_back(records[i].id);
    double sum = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      double diff = static_cast<double>(embeddings[i][d]) - c.centroid[d];
      sum += diff * diff;
    }
    double dist = std::sqrt(sum);
    // members are visited in id order, so strict < keeps the lowest id on ties
    if (dist < best) {
      best = dist;
      c.representative_id = records[i].id;
    }
  }
  return c;
}

void check_inputs(std::span<const IndicatorRecord> records, std::span<const Embedding> embeddings) {
  if (records.empty()) throw Error(ErrorCode::invalid_argument, "no indicators to cluster");
  if (records.size() != embeddings.size()) {
    throw Error(ErrorCode::invalid_argument,
                fmt::format("{} records but {} embeddings", records.size(), embeddings.size()));
  }
  const auto dim = embeddings.front().size();
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (embeddings[i].size() != dim || dim == 0) {
      throw Error(ErrorCode::dimension_mismatch,
                  fmt::format("embedding of {} has dimension {}, expected {}", records[i].id,
                              embeddings[i].size(), dim));
    }
  }
}

}  // namespace

std::vector<Cluster> cluster_indicators(std::span<const IndicatorRecord> records,
                                        std::span<const Embedding> embeddings,
                                        const ClusterParams& params) {
  check_inputs(records, embeddings);
  if (!(params.alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "alpha must be > 0");

  std::vector<std::size_t> by_id(records.size());
  std::iota(by_id.begin(), by_id.end(), 0);
  std::sort(by_id.begin(), by_id.end(),
            [&](std::size_t a, std::size_t b) { return records[a].id < records[b].id; });
  std::vector<std::size_t> rank(records.size());
  for (std::size_t r = 0; r < by_id.size(); ++r) {
    if (r > 0 && records[by_id[r]].id == records[by_id[r - 1]].id) {
      throw Error(ErrorCode::invalid_argument,
                  fmt::format("duplicate indicator id {}", records[by_id[r]].id));
    }
    rank[by_id[r]] = r;
  }

  std::vector<std::vector<std::size_t>> groups;
  if (params.per_leaning) {
    for (auto leaning : kAllLeanings) {
      std::vector<std::size_t> subset;
      for (auto i : by_id) {
        if (records[i].leaning == leaning) subset.push_back(i);
      }
      if (!subset.empty()) groups.push_back(std::move(subset));
    }
  } else {
    groups.push_back(by_id);
  }

  std::vector<Cluster> clusters;
  for (const auto& group : groups) {
    for (auto& idx : agglomerate(group, embeddings, rank, params.alpha)) {
      clusters.push_back(make_cluster(std::move(idx), records, embeddings));
    }
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster& a, const Cluster& b) { return a.member_ids.front() < b.member_ids.front(); });
  return clusters;
}

std::vector<IndicatorRecord> select_representatives(std::vector<Cluster>& clusters,
                                                    std::span<const IndicatorRecord> records,
                                                    std::span<const Embedding> embeddings) {
  check_inputs(records, embeddings);
  std::unordered_map<std::string_view, std::size_t> lookup;
  for (std::size_t i = 0; i < records.size(); ++i) lookup.emplace(records[i].id, i);

  std::vector<IndicatorRecord> out;
  out.reserve(clusters.size());
  for (auto& cluster : clusters) {
    std::vector<std::size_t> idx;
    for (const auto& id : cluster.member_ids) {
      auto it = lookup.find(id);
      if (it == lookup.end()) {
        throw Error(ErrorCode::invalid_argument, fmt::format("cluster member {} unknown", id));
      }
      idx.push_back(it->second);
    }
    if (idx.empty()) throw Error(ErrorCode::invalid_argument, "empty cluster");
    cluster = make_cluster(std::move(idx), records, embeddings);
    out.push_back(advance(records[lookup.at(cluster.representative_id)], Stage::final));
  }
  return out;
}

}  // namespace biaslens::forge
