#include "lsr/agglomerative.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lsr {

namespace {

struct DisjointSets {
  explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  std::vector<int> parent;
};

}  // namespace

std::string_view linkage_name(Linkage l) {
  switch (l) {
    case Linkage::Average: return "average";
    case Linkage::Single: return "single";
    case Linkage::Complete: return "complete";
  }
  return "?";
}

CondensedDistances::CondensedDistances(const Eigen::MatrixXd& points, Metric metric)
    : CondensedDistances(static_cast<int>(points.cols())) {
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) (*this)(i, j) = distance(points.col(i), points.col(j), metric);
}

Dendrogram agglomerate(CondensedDistances d, Linkage linkage) {
  const int n = d.size();
  if (n < 2) throw std::invalid_argument("agglomerative clustering needs at least two points");

  struct RawMerge {
    int x, y;  // representative leaves (slots)
    double height;
  };
  std::vector<RawMerge> raw;
  raw.reserve(static_cast<std::size_t>(n - 1));
  std::vector<int> size(static_cast<std::size_t>(n), 1);
  std::vector<char> active(static_cast<std::size_t>(n), 1);
  std::vector<int> chain;
  chain.reserve(static_cast<std::size_t>(n));

  for (int step = 0; step < n - 1; ++step) {
    if (chain.empty()) {
      int first = 0;
      while (!active[first]) ++first;
      chain.push_back(first);
    }
    int a = 0, b = 0;
    double dist_ab = 0.0;
    for (;;) {
      a = chain.back();
      const int prev = chain.size() >= 2 ? chain[chain.size() - 2] : -1;
      b = prev;
      double best = prev >= 0 ? d(a, prev) : std::numeric_limits<double>::infinity();
      for (int c = 0; c < n; ++c) {
        if (!active[c] || c == a) continue;
        const double dc = d(a, c);
        if (dc < best) {  // ascending scan: ties keep prev, else the lowest index
          best = dc;
          b = c;
        }
      }
      dist_ab = best;
      if (b == prev) break;
      chain.push_back(b);
    }
    chain.pop_back();
    chain.pop_back();
    if (a > b) std::swap(a, b);
    raw.push_back({a, b, dist_ab});

    // Merged cluster lives in slot b; slot a retires.
    const double na = size[a], nb = size[b];
    for (int c = 0; c < n; ++c) {
      if (!active[c] || c == a || c == b) continue;
      const double dac = d(a, c), dbc = d(b, c);
      double v = 0.0;
      switch (linkage) {
        case Linkage::Single: v = std::min(dac, dbc); break;
        case Linkage::Complete: v = std::max(dac, dbc); break;
        case Linkage::Average: v = (na * dac + nb * dbc) / (na + nb); break;
      }
      d(b, c) = v;
    }
    active[a] = 0;
    size[b] += size[a];
  }

  std::stable_sort(raw.begin(), raw.end(),
                   [](const RawMerge& p, const RawMerge& q) { return p.height < q.height; });

  Dendrogram out;
  out.n_points = n;
  out.merges.reserve(raw.size());
  DisjointSets sets(n);
  std::vector<int> cluster_id(static_cast<std::size_t>(n));
  std::iota(cluster_id.begin(), cluster_id.end(), 0);
  std::vector<int> cluster_size(static_cast<std::size_t>(n), 1);
  for (const auto& m : raw) {
    const int rx = sets.find(m.x), ry = sets.find(m.y);
    const int ia = cluster_id[rx], ib = cluster_id[ry];
    const int merged_size = cluster_size[rx] + cluster_size[ry];
    out.merges.push_back({std::min(ia, ib), std::max(ia, ib), m.height, merged_size});
    sets.parent[ry] = rx;
    cluster_id[rx] = n + static_cast<int>(out.merges.size()) - 1;
    cluster_size[rx] = merged_size;
  }
  return out;
}

Dendrogram agglomerate(const Eigen::MatrixXd& points, Metric metric, Linkage linkage) {
  return agglomerate(CondensedDistances(points, metric), linkage);
}

std::vector<int> cut(const Dendrogram& dendrogram, double tau, bool inclusive) {
  const int n = dendrogram.n_points;
  DisjointSets sets(n);
  // Leaf representative of each internal node.
  std::vector<int> leaf_of(static_cast<std::size_t>(2 * n), 0);
  std::iota(leaf_of.begin(), leaf_of.begin() + n, 0);
  for (std::size_t k = 0; k < dendrogram.merges.size(); ++k) {
    const auto& m = dendrogram.merges[k];
    leaf_of[static_cast<std::size_t>(n) + k] = leaf_of[static_cast<std::size_t>(m.a)];
    const bool keep = inclusive ? m.height <= tau : m.height < tau;
    if (!keep) continue;
    const int ra = sets.find(leaf_of[static_cast<std::size_t>(m.a)]);
    const int rb = sets.find(leaf_of[static_cast<std::size_t>(m.b)]);
    if (ra != rb) sets.parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  std::vector<int> label_of_root(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int r = sets.find(i);
    if (label_of_root[r] < 0) label_of_root[r] = next++;
    labels[i] = label_of_root[r];
  }
  return labels;
}

}  // namespace lsr
