#pragma once

#include <span>
#include <string>
#include <vector>

#include "biaslens/indicator.hpp"

namespace biaslens::forge {

/// Strict clustering parameters. Linkage is always complete linkage, so
/// `alpha` bounds the Euclidean distance between any two members of a
/// cluster.
struct ClusterParams {
  double alpha = 0.0;
  /// Cluster each leaning separately instead of the whole set at once.
  bool per_leaning = false;
};

struct Cluster {
  std::vector<std::string> member_ids;  // sorted ascending
  std::vector<double> centroid;         // arithmetic mean of member embeddings
  std::string representative_id;        // member nearest to the centroid

  friend bool operator==(const Cluster&, const Cluster&) = default;
};

double euclidean_distance(std::span<const float> a, std::span<const float> b);

/// Agglomerative clustering with complete linkage. Starting from singletons,
/// repeatedly merges the pair of clusters with the smallest complete-linkage
/// distance while that distance is <= alpha. Equal distances are resolved
/// by the lexicographically smallest (min-id, min-id) pair. Clusters are
/// returned ordered by their smallest member id.
///
/// Throws Error(invalid_argument) for misaligned/empty input, alpha <= 0 or
/// duplicate ids, Error(dimension_mismatch) for ragged embeddings.
std::vector<Cluster> cluster_indicators(std::span<const IndicatorRecord> records,
                                        std::span<const Embedding> embeddings,
                                        const ClusterParams& params);

/// One stage-final record per cluster: the member with the smallest
/// Euclidean distance to the centroid (ties to the lowest id). Also
/// refreshes `representative_id` on each cluster.
std::vector<IndicatorRecord> select_representatives(std::vector<Cluster>& clusters,
                                                    std::span<const IndicatorRecord> records,
                                                    std::span<const Embedding> embeddings);

}  // namespace biaslens::forge
