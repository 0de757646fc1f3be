#pragma once

#include <Eigen/Core>

#include <string_view>

namespace lsr {

enum class Metric { L1, L2, Linf };

std::string_view metric_name(Metric m);  // "l1", "l2", "linf"
Metric parse_metric(std::string_view name);

template <typename A, typename B>
double distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b, Metric m) {
  switch (m) {
    case Metric::L1: return (a - b).template lpNorm<1>();
    case Metric::L2: return (a - b).norm();
    case Metric::Linf: return (a - b).template lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

/// Subgradient of ||a - b||_p with respect to `a` (the gradient w.r.t. `b`
/// is its negation). Zero at a == b.
Eigen::VectorXd distance_gradient(const Eigen::Ref<const Eigen::VectorXd>& a,
                                  const Eigen::Ref<const Eigen::VectorXd>& b, Metric m);

/// Pairwise distances between the columns of `points` (n x n, symmetric).
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points, Metric m);

}  // namespace lsr
