#pragma once

// Independent reference implementations used to check the library.

#include "lsr/task_sim.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <vector>

namespace oracle {

enum class Link { Average, Single, Complete };

/// One merge of the naive agglomeration, described by its leaf sets.
struct LeafMerge {
  std::set<int> left;
  std::set<int> right;
  double height = 0.0;
};

inline double point_distance(const Eigen::MatrixXd& p, int i, int j, int norm) {
  const Eigen::VectorXd d = p.col(i) - p.col(j);
  if (norm == 1) return d.cwiseAbs().sum();
  if (norm == 2) return d.norm();
  return d.cwiseAbs().maxCoeff();
}

/// Naive agglomeration: every step rescans all cluster pairs and recomputes
/// the linkage from the original point distances.
inline std::vector<LeafMerge> naive_dendrogram(const Eigen::MatrixXd& points, int norm, Link link) {
  const int n = static_cast<int>(points.cols());
  std::vector<std::vector<int>> clusters;
  for (int i = 0; i < n; ++i) clusters.push_back({i});
  std::vector<LeafMerge> merges;
  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 1;
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        double agg = link == Link::Single ? std::numeric_limits<double>::infinity() : 0.0;
        for (int i : clusters[a]) {
          for (int j : clusters[b]) {
            const double d = point_distance(points, i, j, norm);
            if (link == Link::Average) agg += d;
            if (link == Link::Single) agg = std::min(agg, d);
            if (link == Link::Complete) agg = std::max(agg, d);
          }
        }
        if (link == Link::Average) agg /= static_cast<double>(clusters[a].size() * clusters[b].size());
        if (agg < best) {
          best = agg;
          ba = a;
          bb = b;
        }
      }
    }
    LeafMerge m;
    m.left.insert(clusters[ba].begin(), clusters[ba].end());
    m.right.insert(clusters[bb].begin(), clusters[bb].end());
    m.height = best;
    merges.push_back(m);
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
  }
  return merges;
}

/// Every simple path from i to j of minimal hop count, in lexicographic order.
inline std::vector<std::vector<int>> dfs_shortest_paths(const std::vector<std::vector<int>>& adj, int i,
                                                        int j) {
  std::vector<std::vector<int>> all;
  std::vector<int> path{i};
  std::vector<char> on_path(adj.size(), 0);
  on_path[static_cast<std::size_t>(i)] = 1;
  std::function<void(int)> walk = [&](int v) {
    if (v == j) {
      all.push_back(path);
      return;
    }
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (on_path[static_cast<std::size_t>(w)]) continue;
      on_path[static_cast<std::size_t>(w)] = 1;
      path.push_back(w);
      walk(w);
      path.pop_back();
      on_path[static_cast<std::size_t>(w)] = 0;
    }
  };
  walk(i);
  if (all.empty()) return all;
  std::size_t shortest = all.front().size();
  for (const auto& p : all) shortest = std::min(shortest, p.size());
  std::vector<std::vector<int>> out;
  for (auto& p : all)
    if (p.size() == shortest) out.push_back(std::move(p));
  std::sort(out.begin(), out.end());
  return out;
}

/// Brute-force enumeration of stacking grids with `boxes` boxes: every
/// assignment of distinct box ids to cells that satisfies gravity.
inline std::vector<lsr::TaskState> brute_force_stacking(int boxes) {
  std::vector<lsr::TaskState> out;
  lsr::TaskState s;
  std::function<void(int, int)> fill = [&](int cell, int used_mask) {
    if (cell == lsr::kCells) {
      if (used_mask != (1 << boxes) - 1) return;
      for (int r = 1; r < lsr::kGridSize; ++r)
        for (int c = 0; c < lsr::kGridSize; ++c)
          if (s.at({r, c}) != 0 && s.at({r - 1, c}) == 0) return;
      out.push_back(s);
      return;
    }
    s.grid[static_cast<std::size_t>(cell)] = 0;
    fill(cell + 1, used_mask);
    for (int id = 1; id <= boxes; ++id) {
      if (used_mask & (1 << (id - 1))) continue;
      s.grid[static_cast<std::size_t>(cell)] = static_cast<std::uint8_t>(id);
      fill(cell + 1, used_mask | (1 << (id - 1)));
    }
    s.grid[static_cast<std::size_t>(cell)] = 0;
  };
  fill(0, 0);
  std::sort(out.begin(), out.end());
  return out;
}

/// Hop distances from `source` over valid_actions.
inline std::map<lsr::TaskState, int> bfs_distances(lsr::TaskKind task, const lsr::TaskState& source) {
  std::map<lsr::TaskState, int> dist{{source, 0}};
  std::deque<lsr::TaskState> queue{source};
  while (!queue.empty()) {
    const auto s = queue.front();
    queue.pop_front();
    for (const auto& t : lsr::valid_actions(task, s))
      if (dist.emplace(t.next, dist[s] + 1).second) queue.push_back(t.next);
  }
  return dist;
}

/// Relative contrast recomputed with explicit loops over both halves.
inline double relative_contrast(const Eigen::MatrixXd& points, int norm) {
  const int n = static_cast<int>(points.cols());
  const int half = n / 2;
  double sum_min = 0.0, sum_max = 0.0;
  int count = 0;
  for (int part = 0; part < 2; ++part) {
    const int lo = part == 0 ? 0 : half;
    const int hi = part == 0 ? half : n;
    for (int i = lo; i < hi; ++i) {
      double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
      for (int j = lo; j < hi; ++j) {
        if (j == i) continue;
        const double d = point_distance(points, i, j, norm);
        mn = std::min(mn, d);
        mx = std::max(mx, d);
      }
      sum_min += mn;
      sum_max += mx;
      ++count;
    }
  }
  const double dmin = sum_min / count, dmax = sum_max / count;
  return (dmax - dmin) / dmin;
}

}  // namespace oracle
