#include "lsr/roadmap.hpp"

#include "lsr/brent.hpp"
#include "lsr/hash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lsr {

namespace {

// Stand-in for -inf inside Brent's parabolic arithmetic.
constexpr double kInfeasiblePenalty = 1e9;
constexpr int kScanIntervals = 24;

Linkage linkage_for(ClusteringKind c) {
  switch (c) {
    case ClusteringKind::Average: return Linkage::Average;
    case ClusteringKind::Complete: return Linkage::Complete;
    case ClusteringKind::Single:
    case ClusteringKind::Epsilon: return Linkage::Single;
  }
  return Linkage::Average;
}

struct UnionFind {
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
  std::vector<int> parent;
};

}  // namespace

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
  return s;
}

std::uint64_t content_hash(const std::vector<LatentTuple>& tuples) {
  Fnv1a h;
  for (const auto& t : tuples) {
    h.add(t.z1.size());
    h.add_bytes(t.z1.data(), sizeof(double) * static_cast<std::size_t>(t.z1.size()));
    h.add_bytes(t.z2.data(), sizeof(double) * static_cast<std::size_t>(t.z2.size()));
    h.add(t.action);
    if (t.u) {
      h.add(static_cast<int>(t.u->kind));
      h.add(t.u->pick);
      h.add(t.u->release);
    }
  }
  return h.value();
}

ReferenceGraph build_reference_graph(const std::vector<LatentTuple>& tuples) {
  if (tuples.empty()) throw std::invalid_argument("latent dataset is empty");
  const auto ld = tuples.front().z1.size();
  ReferenceGraph g;
  g.vertices.resize(ld, static_cast<Eigen::Index>(2 * tuples.size()));
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const auto& t = tuples[i];
    if (t.z1.size() != ld || t.z2.size() != ld)
      throw std::invalid_argument("latent tuples differ in dimension");
    const auto v = static_cast<Eigen::Index>(2 * i);
    g.vertices.col(v) = t.z1;
    g.vertices.col(v + 1) = t.z2;
    if (t.action) g.edges.push_back({static_cast<int>(v), static_cast<int>(v + 1), t.u});
  }
  return g;
}

std::string_view clustering_name(ClusteringKind c) {
  switch (c) {
    case ClusteringKind::Average: return "avg";
    case ClusteringKind::Single: return "single";
    case ClusteringKind::Complete: return "complete";
    case ClusteringKind::Epsilon: return "epsilon";
  }
  return "?";
}

ClusteringKind parse_clustering(std::string_view name) {
  if (name == "avg" || name == "average") return ClusteringKind::Average;
  if (name == "single") return ClusteringKind::Single;
  if (name == "complete") return ClusteringKind::Complete;
  if (name == "epsilon" || name == "eps") return ClusteringKind::Epsilon;
  throw std::invalid_argument("unknown clustering '" + std::string(name) + "'");
}

ClusterSpread epsilon_of_cluster(const Eigen::MatrixXd& points, std::span<const int> members,
                                 Metric metric) {
  if (members.empty()) throw std::invalid_argument("cluster has no members");
  ClusterSpread out;
  if (members.size() == 1) {
    out.singleton = true;
    return out;
  }
  // Welford over all unordered pairs.
  double mean = 0.0, m2 = 0.0;
  long count = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      const double d = distance(points.col(members[i]), points.col(members[j]), metric);
      ++count;
      const double delta = d - mean;
      mean += delta / static_cast<double>(count);
      m2 += delta * (d - mean);
    }
  }
  out.mu = mean;
  out.sigma = std::sqrt(std::max(0.0, m2 / static_cast<double>(count)));
  out.epsilon = out.mu + out.sigma;
  return out;
}

std::vector<std::vector<int>> Roadmap::successors() const {
  std::vector<std::vector<int>> adj(regions.size());
  for (const auto& [key, acts] : edges) adj[static_cast<std::size_t>(key.first)].push_back(key.second);
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

int count_components(int n, const std::map<EdgeKey, std::vector<Action>>& edges) {
  UnionFind uf(n);
  int components = n;
  for (const auto& [key, acts] : edges)
    if (uf.unite(key.first, key.second)) --components;
  return components;
}

double psi(const Roadmap& roadmap, int c_max) {
  if (roadmap.components > c_max) return -std::numeric_limits<double>::infinity();
  return static_cast<double>(roadmap.edge_count());
}

RoadmapBuilder::RoadmapBuilder(const std::vector<LatentTuple>& tuples, Metric metric,
                               ClusteringKind clustering)
    : reference_(build_reference_graph(tuples)),
      metric_(metric),
      clustering_(clustering),
      hash_(content_hash(tuples)) {
  if (reference_.vertices.cols() >= 2)
    dendrogram_ = agglomerate(reference_.vertices, metric_, linkage_for(clustering_));
  else
    dendrogram_.n_points = static_cast<int>(reference_.vertices.cols());
}

std::vector<int> RoadmapBuilder::partition(double threshold) const {
  if (threshold < 0) throw std::invalid_argument("clustering threshold must be >= 0");
  return cut(dendrogram_, threshold, clustering_ == ClusteringKind::Epsilon);
}

double RoadmapBuilder::psi_at(double threshold, int c_max) const {
  const auto labels = partition(threshold);
  const int n_regions = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::map<EdgeKey, std::vector<Action>> edges;
  for (const auto& e : reference_.edges) {
    const int i = labels[static_cast<std::size_t>(e.from)];
    const int j = labels[static_cast<std::size_t>(e.to)];
    if (i != j) edges[{i, j}];
  }
  if (count_components(n_regions, edges) > c_max) return -std::numeric_limits<double>::infinity();
  return static_cast<double>(edges.size());
}

Roadmap RoadmapBuilder::build(double threshold) const {
  const auto labels = partition(threshold);
  Roadmap rm;
  rm.metric = metric_;
  rm.tau = threshold;
  rm.clustering = clustering_;
  rm.source_hash = hash_;
  rm.points = reference_.vertices;
  const int n_regions = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  rm.regions.resize(static_cast<std::size_t>(n_regions));
  for (std::size_t v = 0; v < labels.size(); ++v)
    rm.regions[static_cast<std::size_t>(labels[v])].members.push_back(static_cast<int>(v));

  double eps_sum = 0.0;
  int eps_count = 0;
  std::vector<char> singleton(rm.regions.size(), 0);
  for (std::size_t r = 0; r < rm.regions.size(); ++r) {
    auto& region = rm.regions[r];
    const auto spread = epsilon_of_cluster(rm.points, region.members, metric_);
    region.mu = spread.mu;
    region.sigma = spread.sigma;
    region.epsilon = spread.epsilon;
    singleton[r] = spread.singleton;
    if (!spread.singleton) {
      eps_sum += spread.epsilon;
      ++eps_count;
    }
    region.centroid = Eigen::VectorXd::Zero(rm.points.rows());
    for (int m : region.members) region.centroid += rm.points.col(m);
    region.centroid /= static_cast<double>(region.members.size());
    double best = std::numeric_limits<double>::infinity();
    for (int m : region.members) {
      const double d = distance(rm.points.col(m), region.centroid, metric_);
      if (d < best) {
        best = d;
        region.representative = m;
      }
    }
  }
  const double singleton_eps = eps_count > 0 ? eps_sum / eps_count : 0.0;
  for (std::size_t r = 0; r < rm.regions.size(); ++r)
    if (singleton[r]) rm.regions[r].epsilon = singleton_eps;

  for (const auto& e : reference_.edges) {
    const int i = labels[static_cast<std::size_t>(e.from)];
    const int j = labels[static_cast<std::size_t>(e.to)];
    if (i == j) continue;
    auto& acts = rm.edges[{i, j}];
    if (e.u) acts.push_back(*e.u);
  }
  rm.components = count_components(n_regions, rm.edges);
  return rm;
}

Roadmap build_lsr(const std::vector<LatentTuple>& tuples, Metric metric, double tau,
                  ClusteringKind clustering) {
  return RoadmapBuilder(tuples, metric, clustering).build(tau);
}

TauSearch optimize_tau(const RoadmapBuilder& builder, double tau_min, double tau_max, int c_max) {
  if (!(tau_min < tau_max)) throw std::invalid_argument("tau_min must be below tau_max");
  TauSearch out;
  double best_tau = tau_min;
  double best_psi = -std::numeric_limits<double>::infinity();
  auto evaluate = [&](double tau) {
    const double value = builder.psi_at(tau, c_max);
    out.evaluations.emplace_back(tau, value);
    if (value > best_psi) {
      best_psi = value;
      best_tau = tau;
    }
    return value;
  };
  // psi is piecewise constant, so a coarse scan picks the bracket Brent refines.
  const double h = (tau_max - tau_min) / kScanIntervals;
  int best_k = 0;
  double best_scan = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kScanIntervals; ++k) {
    const double value = evaluate(k == kScanIntervals ? tau_max : tau_min + h * k);
    if (value > best_scan) {
      best_scan = value;
      best_k = k;
    }
  }
  const double lo = tau_min + h * std::max(best_k - 1, 0);
  const double hi = best_k + 1 >= kScanIntervals ? tau_max : tau_min + h * (best_k + 1);
  brent_minimize_bounded(
      [&](double tau) {
        const double value = evaluate(tau);
        return std::isfinite(value) ? -value : kInfeasiblePenalty;
      },
      lo, hi, 1e-3);
  if (!std::isfinite(best_psi))
    throw std::runtime_error("no roadmap within component bound c_max=" + std::to_string(c_max) +
                             " for tau in [" + std::to_string(tau_min) + ", " +
                             std::to_string(tau_max) + "]");
  out.tau = best_tau;
  out.psi = best_psi;
  out.roadmap = builder.build(best_tau);
  return out;
}

TauSearch optimize_tau(const std::vector<LatentTuple>& tuples, Metric metric,
                       ClusteringKind clustering, double tau_min, double tau_max, int c_max) {
  return optimize_tau(RoadmapBuilder(tuples, metric, clustering), tau_min, tau_max, c_max);
}

std::optional<int> is_covered(const Roadmap& roadmap, const Eigen::VectorXd& z) {
  if (z.size() != roadmap.points.rows()) throw std::invalid_argument("latent point has wrong dimension");
  std::optional<int> best;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (int r = 0; r < roadmap.region_count(); ++r) {
    const auto& region = roadmap.regions[static_cast<std::size_t>(r)];
    double nearest = std::numeric_limits<double>::infinity();
    for (int m : region.members)
      nearest = std::min(nearest, distance(roadmap.points.col(m), z, roadmap.metric));
    if (nearest > region.epsilon) continue;
    const double ratio = region.epsilon > 0 ? nearest / region.epsilon : 0.0;
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best = r;
    }
  }
  return best;
}

}  // namespace lsr
