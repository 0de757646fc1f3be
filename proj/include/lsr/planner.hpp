#pragma once

#include "lsr/mapping.hpp"
#include "lsr/roadmap.hpp"

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

namespace lsr {

/// Observation <-> latent maps used by the planner. The trained mapping
/// module is one implementation; tests plug in ground-truth maps.
class LatentMapping {
 public:
  virtual ~LatentMapping() = default;
  virtual Eigen::VectorXd encode(const Eigen::VectorXd& observation) const = 0;
  virtual Eigen::VectorXd decode(const Eigen::VectorXd& latent) const = 0;
};

/// Deterministic (posterior mean) encoding through a trained model.
class ModelMapping final : public LatentMapping {
 public:
  explicit ModelMapping(const EncoderModel& model) : model_(model) {}
  Eigen::VectorXd encode(const Eigen::VectorXd& observation) const override;
  Eigen::VectorXd decode(const Eigen::VectorXd& latent) const override;

 private:
  const EncoderModel& model_;
};

class UnreachableError : public std::runtime_error {
 public:
  UnreachableError() : std::runtime_error("unreachable under roadmap") {}
};

struct PlanResult {
  std::vector<int> nodes;                    // region indices
  std::vector<Eigen::VectorXd> latent_plan;  // region representatives
  std::vector<Eigen::VectorXd> decoded_plan;
  std::vector<Action> action_plan;  // filled by the action proposal module
  int fallback_depth = 0;
  bool truncated = false;  // the shortest-path cap was hit for this query
};

inline constexpr int kMaxShortestPaths = 64;
inline constexpr int kDefaultMaxFallback = 5;

/// Region whose representative is the (rank+1)-th closest to `z`; ties go to
/// the lower index.
int nearest_node(const Roadmap& roadmap, const Eigen::VectorXd& z, int rank);

struct ShortestPaths {
  std::vector<std::vector<int>> paths;  // lexicographic order
  bool truncated = false;
};

/// Every minimum-hop directed path from i to j, capped at `cap` paths.
ShortestPaths all_shortest_paths(const Roadmap& roadmap, int i, int j,
                                 int cap = kMaxShortestPaths);

/// Adjacency of a roadmap prepared once for repeated queries.
class PathFinder {
 public:
  explicit PathFinder(const Roadmap& roadmap);
  ShortestPaths find(int i, int j, int cap = kMaxShortestPaths) const;

 private:
  std::vector<int> distances(int source, const std::vector<std::vector<int>>& adj) const;

  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
};

/// Latent and visual plans between two observations. Throws UnreachableError
/// when no (start rank, goal rank) pair with rank sum <= max_fallback
/// connects.
std::vector<PlanResult> plan(const Roadmap& roadmap, const LatentMapping& mapping,
                             const Eigen::VectorXd& obs_start, const Eigen::VectorXd& obs_goal,
                             int max_fallback = kDefaultMaxFallback);
std::vector<PlanResult> plan(const Roadmap& roadmap, const PathFinder& finder,
                             const LatentMapping& mapping, const Eigen::VectorXd& obs_start,
                             const Eigen::VectorXd& obs_goal,
                             int max_fallback = kDefaultMaxFallback);

}  // namespace lsr
