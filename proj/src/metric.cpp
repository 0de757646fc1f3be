#include "lsr/metric.hpp"

#include <stdexcept>
#include <string>

namespace lsr {

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::L1: return "l1";
    case Metric::L2: return "l2";
    case Metric::Linf: return "linf";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  if (name == "l1" || name == "L1") return Metric::L1;
  if (name == "l2" || name == "L2") return Metric::L2;
  if (name == "linf" || name == "Linf" || name == "inf") return Metric::Linf;
  throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

Eigen::VectorXd distance_gradient(const Eigen::Ref<const Eigen::VectorXd>& a,
                                  const Eigen::Ref<const Eigen::VectorXd>& b, Metric m) {
  const Eigen::VectorXd diff = a - b;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(diff.size());
  switch (m) {
    case Metric::L1:
      g = diff.unaryExpr([](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
      break;
    case Metric::L2:
      if (const double n = diff.norm(); n > 0) g = diff / n;
      break;
    case Metric::Linf: {
      Eigen::Index i = 0;
      if (diff.size() > 0 && diff.cwiseAbs().maxCoeff(&i) > 0) g[i] = diff[i] > 0 ? 1.0 : -1.0;
      break;
    }
  }
  return g;
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points, Metric m) {
  const Eigen::Index n = points.cols();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) d(i, j) = d(j, i) = distance(points.col(i), points.col(j), m);
  return d;
}

}  // namespace lsr
