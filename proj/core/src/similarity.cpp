#include "trajmap/similarity.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <mutex>

#include "trajmap/errors.hpp"

namespace trajmap {

PointwiseDistance::PointwiseDistance(const LocationGraph& map, PointwiseDistanceConfig config)
    : map_(map), config_(config) {
  names_.reserve(map.nodes.size());
  for (const auto& [name, node] : map.nodes) {
    index_.emplace(name, static_cast<int>(names_.size()));
    names_.push_back(name);
  }
  adjacency_.assign(names_.size(), {});
  for (const GraphEdge& edge : map.edges) {
    auto s = index_.find(edge.source);
    auto t = index_.find(edge.target);
    if (s == index_.end() || t == index_.end() || s->second == t->second) {
      continue;
    }
    adjacency_[s->second].push_back(t->second);
    adjacency_[t->second].push_back(s->second);
  }

  d_max_ = config_.d_max > 0.0 ? config_.d_max
                               : static_cast<double>(std::max(1, diameter_of_largest_component()));
  graph_cap_ = config_.graph_cap > 0.0 ? config_.graph_cap : d_max_;
}

const std::vector<int>& PointwiseDistance::distances_from(int source) const {
  {
    std::shared_lock lock(mutex_);
    auto it = bfs_cache_.find(source);
    if (it != bfs_cache_.end()) {
      return it->second;
    }
  }
  std::vector<int> dist(names_.size(), -1);
  dist[source] = 0;
  std::deque<int> queue{source};
  while (!queue.empty()) {
    const int node = queue.front();
    queue.pop_front();
    for (int next : adjacency_[node]) {
      if (dist[next] < 0) {
        dist[next] = dist[node] + 1;
        queue.push_back(next);
      }
    }
  }
  std::unique_lock lock(mutex_);
  return bfs_cache_.try_emplace(source, std::move(dist)).first->second;
}

int PointwiseDistance::diameter_of_largest_component() const {
  if (names_.empty()) {
    return 1;
  }
  // Components by BFS; the largest one (ties: the one containing the
  // lexicographically smallest name, i.e. the first seen) sets the scale.
  std::vector<int> component(names_.size(), -1);
  int components = 0;
  std::vector<int> sizes;
  for (std::size_t start = 0; start < names_.size(); ++start) {
    if (component[start] >= 0) {
      continue;
    }
    int size = 0;
    std::deque<std::size_t> queue{start};
    component[start] = components;
    while (!queue.empty()) {
      const std::size_t node = queue.front();
      queue.pop_front();
      ++size;
      for (int next : adjacency_[node]) {
        if (component[next] < 0) {
          component[next] = components;
          queue.push_back(next);
        }
      }
    }
    sizes.push_back(size);
    ++components;
  }
  const int largest =
      static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

  int diameter = 0;
  for (std::size_t node = 0; node < names_.size(); ++node) {
    if (component[node] != largest) {
      continue;
    }
    const std::vector<int>& dist = distances_from(static_cast<int>(node));
    for (std::size_t other = 0; other < names_.size(); ++other) {
      diameter = std::max(diameter, dist[other]);
    }
  }
  return diameter;
}

std::optional<int> PointwiseDistance::hops(const std::string& a, const std::string& b) const {
  auto sa = index_.find(a);
  auto sb = index_.find(b);
  if (sa == index_.end()) {
    throw UnknownLocation("location '" + a + "' is not on the map");
  }
  if (sb == index_.end()) {
    throw UnknownLocation("location '" + b + "' is not on the map");
  }
  if (sa->second == sb->second) {
    return 0;
  }
  const int d = distances_from(sa->second)[sb->second];
  if (d < 0) {
    return std::nullopt;
  }
  return d;
}

double PointwiseDistance::operator()(const std::string& a, const std::string& b) const {
  if (config_.unit_substitution) {
    // Unknown names are still an error in this mode, for parity.
    if (index_.find(a) == index_.end()) {
      throw UnknownLocation("location '" + a + "' is not on the map");
    }
    if (index_.find(b) == index_.end()) {
      throw UnknownLocation("location '" + b + "' is not on the map");
    }
    return a == b ? 0.0 : 1.0;
  }
  const std::optional<int> graph_hops = hops(a, b);
  if (a == b) {
    return 0.0;
  }
  const double raw = graph_hops.has_value() ? static_cast<double>(*graph_hops) : graph_cap_;
  double d = std::min(1.0, raw / d_max_);
  const LocationKind kind_a = map_.nodes.at(a).type.kind;
  const LocationKind kind_b = map_.nodes.at(b).type.kind;
  if (kind_a != kind_b) {
    d += config_.type_penalty;
  }
  return d;
}

namespace {

double substitution_cost(const PointwiseDistance& distance, const std::string& a,
                         const std::string& b) {
  if (distance.config().unit_substitution) {
    return a == b ? 0.0 : 1.0;
  }
  // Scaled into [0, 1] so a worst-case substitution never beats
  // a deletion plus an insertion.
  return distance(a, b) / (1.0 + distance.config().type_penalty);
}

}  // namespace

TrajectoryAlignment weighted_edit_distance(const Trajectory& a, const Trajectory& b,
                                           const PointwiseDistance& distance) {
  const std::vector<std::string> sa = location_sequence(a);
  const std::vector<std::string> sb = location_sequence(b);
  const std::size_t n = sa.size();
  const std::size_t m = sb.size();

  std::vector<std::vector<double>> cost(n + 1, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 1; i <= n; ++i) {
    cost[i][0] = static_cast<double>(i);
  }
  for (std::size_t j = 1; j <= m; ++j) {
    cost[0][j] = static_cast<double>(j);
  }
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const double sub = cost[i - 1][j - 1] + substitution_cost(distance, sa[i - 1], sb[j - 1]);
      const double del = cost[i - 1][j] + 1.0;
      const double ins = cost[i][j - 1] + 1.0;
      cost[i][j] = std::min({sub, del, ins});
    }
  }

  // Backtrace, preferring substitution over deletion over insertion.
  TrajectoryAlignment out;
  out.cost = cost[n][m];
  std::size_t i = n;
  std::size_t j = m;
  std::vector<AlignedPair> reversed;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        cost[i][j] == cost[i - 1][j - 1] + substitution_cost(distance, sa[i - 1], sb[j - 1])) {
      reversed.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1)});
      --i;
      --j;
    } else if (i > 0 && cost[i][j] == cost[i - 1][j] + 1.0) {
      reversed.push_back({static_cast<int>(i - 1), std::nullopt});
      --i;
    } else {
      reversed.push_back({std::nullopt, static_cast<int>(j - 1)});
      --j;
    }
  }
  out.pairs.assign(reversed.rbegin(), reversed.rend());
  return out;
}

TrajectoryAlignment dtw_distance(const Trajectory& a, const Trajectory& b,
                                 const PointwiseDistance& distance) {
  const std::vector<std::string> sa = location_sequence(a);
  const std::vector<std::string> sb = location_sequence(b);
  if (sa.empty() || sb.empty()) {
    throw EmptyTrajectory("DTW needs two non-empty trajectories");
  }
  const std::size_t n = sa.size();
  const std::size_t m = sb.size();

  constexpr double kInf = 1e300;
  std::vector<std::vector<double>> cost(n, std::vector<double>(m, kInf));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = distance(sa[i], sb[j]);
      if (i == 0 && j == 0) {
        cost[i][j] = d;
      } else {
        double best = kInf;
        if (i > 0) {
          best = std::min(best, cost[i - 1][j]);
        }
        if (j > 0) {
          best = std::min(best, cost[i][j - 1]);
        }
        if (i > 0 && j > 0) {
          best = std::min(best, cost[i - 1][j - 1]);
        }
        cost[i][j] = d + best;
      }
    }
  }

  // Warping path backtrace; ties prefer the diagonal, then (i-1, j). The
  // predecessor is the stored cell with the smallest cost, so no arithmetic
  // is redone and float comparisons stay exact.
  TrajectoryAlignment out;
  out.cost = cost[n - 1][m - 1];
  std::size_t i = n - 1;
  std::size_t j = m - 1;
  std::vector<AlignedPair> reversed;
  reversed.push_back({static_cast<int>(i), static_cast<int>(j)});
  while (i > 0 || j > 0) {
    double best = kInf;
    if (i > 0 && j > 0) {
      best = std::min(best, cost[i - 1][j - 1]);
    }
    if (i > 0) {
      best = std::min(best, cost[i - 1][j]);
    }
    if (j > 0) {
      best = std::min(best, cost[i][j - 1]);
    }
    if (i > 0 && j > 0 && cost[i - 1][j - 1] == best) {
      --i;
      --j;
    } else if (i > 0 && cost[i - 1][j] == best) {
      --i;
    } else {
      --j;
    }
    reversed.push_back({static_cast<int>(i), static_cast<int>(j)});
  }
  out.pairs.assign(reversed.rbegin(), reversed.rend());
  return out;
}

std::vector<std::vector<double>> pairwise_matrix(const std::vector<Trajectory>& trajectories,
                                                 const PointwiseDistance& distance,
                                                 SimilarityMeasure measure) {
  if (trajectories.size() < 2) {
    throw PreconditionError("pairwise_matrix needs at least two trajectories");
  }
  const std::size_t n = trajectories.size();
  std::vector<std::vector<double>> matrix(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const TrajectoryAlignment result =
          measure == SimilarityMeasure::WeightedEdit
              ? weighted_edit_distance(trajectories[i], trajectories[j], distance)
              : dtw_distance(trajectories[i], trajectories[j], distance);
      matrix[i][j] = result.cost;
      matrix[j][i] = result.cost;
    }
  }
  return matrix;
}

std::vector<TransitionCount> transition_counts(const std::vector<Trajectory>& trajectories,
                                               const LocationGraph& map,
                                               const std::optional<std::set<LocationKind>>& filter,
                                               int min_docs) {
  auto kind_of = [&map](const std::string& name) {
    auto it = map.nodes.find(name);
    return it != map.nodes.end() ? it->second.type.kind : LocationKind::Unknown;
  };

  std::map<std::pair<std::string, std::string>, int> counts;
  for (const Trajectory& traj : trajectories) {
    std::set<std::pair<std::string, std::string>> seen;  // once per document
    for (std::size_t i = 0; i + 1 < traj.visits.size(); ++i) {
      const std::string& from = traj.visits[i].location;
      const std::string& to = traj.visits[i + 1].location;
      if (from == to) {
        continue;
      }
      seen.emplace(from, to);
    }
    for (const auto& pair : seen) {
      ++counts[pair];
    }
  }

  std::vector<TransitionCount> out;
  for (const auto& [pair, count] : counts) {
    if (count < min_docs) {
      continue;
    }
    if (filter.has_value() &&
        filter->count(kind_of(pair.first)) == 0 && filter->count(kind_of(pair.second)) == 0) {
      continue;
    }
    out.push_back({pair.first, pair.second, count});
  }
  std::sort(out.begin(), out.end(), [](const TransitionCount& a, const TransitionCount& b) {
    if (a.document_count != b.document_count) {
      return a.document_count > b.document_count;
    }
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  return out;
}

}  // namespace trajmap
