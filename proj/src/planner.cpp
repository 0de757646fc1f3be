#include "lsr/planner.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>

namespace lsr {

Eigen::VectorXd ModelMapping::encode(const Eigen::VectorXd& observation) const {
  return model_.encode(observation, true).z;
}

Eigen::VectorXd ModelMapping::decode(const Eigen::VectorXd& latent) const {
  return model_.decode(latent);
}

int nearest_node(const Roadmap& roadmap, const Eigen::VectorXd& z, int rank) {
  const int n = roadmap.region_count();
  if (rank < 0 || rank >= n)
    throw std::out_of_range("node rank " + std::to_string(rank) + " outside [0, " +
                            std::to_string(n) + ")");
  std::vector<double> d(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r)
    d[static_cast<std::size_t>(r)] = distance(roadmap.representative(r), z, roadmap.metric);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::nth_element(order.begin(), order.begin() + rank, order.end(), [&](int a, int b) {
    const double da = d[static_cast<std::size_t>(a)], db = d[static_cast<std::size_t>(b)];
    return da < db || (da == db && a < b);
  });
  return order[static_cast<std::size_t>(rank)];
}

PathFinder::PathFinder(const Roadmap& roadmap)
    : out_(roadmap.successors()), in_(static_cast<std::size_t>(roadmap.region_count())) {
  for (std::size_t u = 0; u < out_.size(); ++u)
    for (int v : out_[u]) in_[static_cast<std::size_t>(v)].push_back(static_cast<int>(u));
}

std::vector<int> PathFinder::distances(int source,
                                       const std::vector<std::vector<int>>& adj) const {
  std::vector<int> dist(adj.size(), -1);
  std::deque<int> queue{source};
  dist[static_cast<std::size_t>(source)] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (dist[static_cast<std::size_t>(v)] >= 0) continue;
      dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
      queue.push_back(v);
    }
  }
  return dist;
}

ShortestPaths PathFinder::find(int i, int j, int cap) const {
  const int n = static_cast<int>(out_.size());
  if (i < 0 || i >= n || j < 0 || j >= n) throw std::out_of_range("roadmap node out of range");
  ShortestPaths result;
  const auto from_i = distances(i, out_);
  const int length = from_i[static_cast<std::size_t>(j)];
  if (length < 0) return result;
  const auto to_j = distances(j, in_);

  // Depth-first over the shortest-path DAG; successors are sorted so paths
  // come out in lexicographic order.
  std::vector<int> path{i};
  auto extend = [&](auto&& self, int u) -> void {
    if (static_cast<int>(result.paths.size()) >= cap) {
      result.truncated = true;
      return;
    }
    if (u == j) {
      result.paths.push_back(path);
      return;
    }
    for (int v : out_[static_cast<std::size_t>(u)]) {
      const auto vs = static_cast<std::size_t>(v);
      if (from_i[vs] != from_i[static_cast<std::size_t>(u)] + 1) continue;
      if (to_j[vs] < 0 || from_i[vs] + to_j[vs] != length) continue;
      path.push_back(v);
      self(self, v);
      path.pop_back();
      if (result.truncated) return;
    }
  };
  extend(extend, i);
  return result;
}

ShortestPaths all_shortest_paths(const Roadmap& roadmap, int i, int j, int cap) {
  return PathFinder(roadmap).find(i, j, cap);
}

std::vector<PlanResult> plan(const Roadmap& roadmap, const PathFinder& finder,
                             const LatentMapping& mapping, const Eigen::VectorXd& obs_start,
                             const Eigen::VectorXd& obs_goal, int max_fallback) {
  const int n = roadmap.region_count();
  if (n == 0) throw UnreachableError();
  const Eigen::VectorXd zs = mapping.encode(obs_start);
  const Eigen::VectorXd zg = mapping.encode(obs_goal);

  for (int depth = 0; depth <= max_fallback; ++depth) {
    for (int rank_s = 0; rank_s <= depth; ++rank_s) {
      const int rank_g = depth - rank_s;
      if (rank_s >= n || rank_g >= n) continue;
      const int s = nearest_node(roadmap, zs, rank_s);
      const int g = nearest_node(roadmap, zg, rank_g);
      const auto found = finder.find(s, g);
      if (found.paths.empty()) continue;
      std::vector<PlanResult> out;
      out.reserve(found.paths.size());
      for (const auto& nodes : found.paths) {
        PlanResult r;
        r.nodes = nodes;
        r.fallback_depth = depth;
        r.truncated = found.truncated;
        for (int node : nodes) {
          r.latent_plan.push_back(roadmap.representative(node));
          r.decoded_plan.push_back(mapping.decode(r.latent_plan.back()));
        }
        out.push_back(std::move(r));
      }
      return out;
    }
  }
  throw UnreachableError();
}

std::vector<PlanResult> plan(const Roadmap& roadmap, const LatentMapping& mapping,
                             const Eigen::VectorXd& obs_start, const Eigen::VectorXd& obs_goal,
                             int max_fallback) {
  return plan(roadmap, PathFinder(roadmap), mapping, obs_start, obs_goal, max_fallback);
}

}  // namespace lsr
