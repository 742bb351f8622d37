#pragma once

#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "trajmap/types.hpp"

namespace trajmap {

struct PointwiseDistanceConfig {
  /// Graph distance assigned to disconnected pairs; 0 means "use d_max",
  /// so disconnected pairs normalize to 1.
  double graph_cap = 0.0;
  /// Penalty added when the location kinds differ (the λ of the measure).
  double type_penalty = 0.5;
  /// Normalizer for graph hops; 0 means "diameter of the largest connected
  /// component", computed once per map.
  double d_max = 0.0;
  /// When set, substitution cost is exactly 1 for different names and 0 for
  /// equal ones, independent of the graph. This reduces weighted edit
  /// distance to unit-cost edit distance.
  bool unit_substitution = false;
};

/// Point-wise distance between two map locations:
///   min(1, hops(a, b) / d_max) + (kinds differ ? λ : 0)
/// where hops is the undirected shortest path counting inclusion and
/// proximity edges alike, and disconnected pairs take graph_cap hops.
/// Identical names give 0. BFS results are memoized per source node;
/// concurrent readers are fine, one writer fills a missing entry.
class PointwiseDistance {
 public:
  PointwiseDistance(const LocationGraph& map, PointwiseDistanceConfig config);

  double operator()(const std::string& a, const std::string& b) const;  // UnknownLocation

  double effective_d_max() const { return d_max_; }
  double effective_graph_cap() const { return graph_cap_; }
  const PointwiseDistanceConfig& config() const { return config_; }
  const LocationGraph& map() const { return map_; }

  /// Undirected hop count, or nullopt when disconnected.
  std::optional<int> hops(const std::string& a, const std::string& b) const;

 private:
  const LocationGraph& map_;
  PointwiseDistanceConfig config_;
  double d_max_ = 1.0;
  double graph_cap_ = 1.0;
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<int>> adjacency_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<int, std::vector<int>> bfs_cache_;

  const std::vector<int>& distances_from(int source) const;
  int diameter_of_largest_component() const;
};

/// One aligned step: indices into A and B, or nullopt for a gap.
struct AlignedPair {
  std::optional<int> a;
  std::optional<int> b;

  friend bool operator==(const AlignedPair&, const AlignedPair&) = default;
};

struct TrajectoryAlignment {
  std::vector<AlignedPair> pairs;
  double cost = 0.0;
};

/// Edit distance over visit sequences with substitution cost
/// pointwise/(1+λ) (scaled into [0,1]) and unit insertions/deletions.
/// Backtrace ties prefer substitution, then deletion, then insertion.
TrajectoryAlignment weighted_edit_distance(const Trajectory& a, const Trajectory& b,
                                           const PointwiseDistance& distance);

/// Classic DTW over the point-wise distance with steps (i-1,j), (i,j-1),
/// (i-1,j-1). Both trajectories must be non-empty.
TrajectoryAlignment dtw_distance(const Trajectory& a, const Trajectory& b,
                                 const PointwiseDistance& distance);

enum class SimilarityMeasure { WeightedEdit, Dtw };

/// Symmetric cost matrix over all trajectory pairs; diagonal is zero.
/// Throws PreconditionError for fewer than two trajectories.
std::vector<std::vector<double>> pairwise_matrix(const std::vector<Trajectory>& trajectories,
                                                 const PointwiseDistance& distance,
                                                 SimilarityMeasure measure);

struct TransitionCount {
  std::string from;
  std::string to;
  int document_count = 0;

  friend bool operator==(const TransitionCount&, const TransitionCount&) = default;
};

/// Counts each directed adjacent pair at most once per document. When a
/// kind filter is given, a transition is kept only if at least one endpoint
/// has a kind in the filter (endpoints missing from the map count as
/// Unknown). Rows below min_docs are dropped; output is sorted by count
/// descending, ties by (from, to).
std::vector<TransitionCount> transition_counts(const std::vector<Trajectory>& trajectories,
                                               const LocationGraph& map,
                                               const std::optional<std::set<LocationKind>>& filter,
                                               int min_docs);

}  // namespace trajmap
