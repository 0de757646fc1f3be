#pragma once

#include "lsr/agglomerative.hpp"
#include "lsr/metric.hpp"
#include "lsr/task_sim.hpp"

#include <Eigen/Core>

#include <climits>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace lsr {

/// An encoded training tuple. State ids are ground-truth provenance kept for
/// evaluation only; they never influence roadmap construction.
struct LatentTuple {
  Eigen::VectorXd z1;
  Eigen::VectorXd z2;
  bool action = false;
  std::optional<Action> u;
  int state1 = -1;
  int state2 = -1;
};

std::uint64_t content_hash(const std::vector<LatentTuple>& tuples);

struct ReferenceEdge {
  int from = 0;
  int to = 0;
  std::optional<Action> u;
};

/// Vertex 2i is z1 of tuple i and vertex 2i+1 its z2.
struct ReferenceGraph {
  Eigen::MatrixXd vertices;  // latent x (2 * tuples)
  std::vector<ReferenceEdge> edges;
};

ReferenceGraph build_reference_graph(const std::vector<LatentTuple>& tuples);

enum class ClusteringKind { Average, Single, Complete, Epsilon };

std::string_view clustering_name(ClusteringKind c);  // "avg", "single", "complete", "epsilon"
ClusteringKind parse_clustering(std::string_view name);

struct ClusterSpread {
  double mu = 0.0;
  double sigma = 0.0;
  double epsilon = 0.0;
  bool singleton = false;
};

/// Mean and population standard deviation of all within-cluster pairwise
/// distances; epsilon = mu + sigma. Singletons are flagged with zeros.
ClusterSpread epsilon_of_cluster(const Eigen::MatrixXd& points, std::span<const int> members,
                                 Metric metric);

struct CoveredRegion {
  std::vector<int> members;  // vertex indices
  double epsilon = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  int representative = 0;  // vertex index of the member closest to the centroid
  Eigen::VectorXd centroid;
};

using EdgeKey = std::pair<int, int>;

struct Roadmap {
  Metric metric = Metric::L1;
  double tau = 0.0;
  ClusteringKind clustering = ClusteringKind::Average;
  std::optional<TaskKind> task;
  std::uint64_t source_hash = 0;

  Eigen::MatrixXd points;  // reference-graph vertices
  std::vector<CoveredRegion> regions;
  std::map<EdgeKey, std::vector<Action>> edges;  // directed, with the crossing actions
  int components = 0;

  int region_count() const { return static_cast<int>(regions.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  Eigen::VectorXd representative(int region) const {
    return points.col(regions[static_cast<std::size_t>(region)].representative);
  }
  /// Sorted successor lists.
  std::vector<std::vector<int>> successors() const;
};

/// Weakly connected components of a directed graph on `n` nodes.
int count_components(int n, const std::map<EdgeKey, std::vector<Action>>& edges);

inline constexpr int kUnboundedComponents = INT_MAX;

/// Edge count when the roadmap has at most c_max components, else -inf.
double psi(const Roadmap& roadmap, int c_max);

/// Builds roadmaps for one latent dataset at varying thresholds; the
/// reference graph and dendrogram are computed once.
class RoadmapBuilder {
 public:
  RoadmapBuilder(const std::vector<LatentTuple>& tuples, Metric metric, ClusteringKind clustering);

  /// Flat clusters at `threshold` (tau, or the radius for Epsilon clustering).
  std::vector<int> partition(double threshold) const;
  Roadmap build(double threshold) const;

  /// psi without assembling the regions.
  double psi_at(double threshold, int c_max) const;

  const ReferenceGraph& reference() const { return reference_; }
  const Dendrogram& dendrogram() const { return dendrogram_; }

 private:
  ReferenceGraph reference_;
  Metric metric_;
  ClusteringKind clustering_;
  Dendrogram dendrogram_;
  std::uint64_t hash_;
};

Roadmap build_lsr(const std::vector<LatentTuple>& tuples, Metric metric, double tau,
                  ClusteringKind clustering);

struct TauSearch {
  double tau = 0.0;
  double psi = 0.0;
  Roadmap roadmap;
  std::vector<std::pair<double, double>> evaluations;  // (tau, psi) in evaluation order
};

/// Maximizes psi over [tau_min, tau_max]: a 25-point scan (endpoints
/// included) picks the bracket around its best point, bounded Brent (xatol
/// 1e-3) refines it and the best evaluated tau wins.
/// Throws std::runtime_error when every evaluation exceeds c_max.
TauSearch optimize_tau(const RoadmapBuilder& builder, double tau_min, double tau_max, int c_max);
TauSearch optimize_tau(const std::vector<LatentTuple>& tuples, Metric metric,
                       ClusteringKind clustering, double tau_min, double tau_max, int c_max);

/// Region whose epsilon-neighbourhood union contains `z`; ties go to the
/// smallest distance/epsilon ratio, then the lowest index.
std::optional<int> is_covered(const Roadmap& roadmap, const Eigen::VectorXd& z);

}  // namespace lsr
