#pragma once

#include "lsr/metric.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <string_view>
#include <vector>

namespace lsr {

enum class Linkage { Average, Single, Complete };

std::string_view linkage_name(Linkage l);

/// One agglomeration step. Leaves carry ids 0..n-1; the cluster created by
/// merge k gets id n + k. `a < b` always.
struct Merge {
  int a = 0;
  int b = 0;
  double height = 0.0;
  int size = 0;
};

struct Dendrogram {
  int n_points = 0;
  std::vector<Merge> merges;  // n_points - 1 entries, heights non-decreasing
};

/// Upper-triangular distance storage for n points.
class CondensedDistances {
 public:
  CondensedDistances(const Eigen::MatrixXd& points, Metric metric);  // points are columns
  explicit CondensedDistances(int n) : n_(n), d_(static_cast<std::size_t>(n) * (n - 1) / 2) {}

  int size() const { return n_; }
  double operator()(int i, int j) const { return d_[index(i, j)]; }
  double& operator()(int i, int j) { return d_[index(i, j)]; }

 private:
  std::size_t index(int i, int j) const {
    if (i > j) std::swap(i, j);
    const auto n = static_cast<std::size_t>(n_);
    const auto ii = static_cast<std::size_t>(i);
    return n * ii - ii * (ii + 1) / 2 + static_cast<std::size_t>(j - i - 1);
  }

  int n_ = 0;
  std::vector<double> d_;
};

/// Hierarchical agglomerative clustering with the nearest-neighbour-chain
/// algorithm and Lance-Williams updates. Ties prefer the lower index.
Dendrogram agglomerate(CondensedDistances distances, Linkage linkage);
Dendrogram agglomerate(const Eigen::MatrixXd& points, Metric metric, Linkage linkage);

/// Flat clusters left after undoing every merge at height >= tau (or > tau
/// when `inclusive`). Labels are numbered by each cluster's lowest point.
std::vector<int> cut(const Dendrogram& dendrogram, double tau, bool inclusive = false);

}  // namespace lsr
