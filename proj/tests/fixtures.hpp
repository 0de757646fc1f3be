#pragma once

// Shared fixtures: hand-built roadmaps, a ground-truth mapping and one cached
// trained normal-stacking pipeline.

#include "lsr/pipeline.hpp"
#include "lsr/planner.hpp"
#include "lsr/roadmap.hpp"
#include "lsr/task_sim.hpp"

#include <Eigen/Core>

#include <vector>

namespace fixture {

/// Roadmap with one single-point region per node; node k sits at (k, 0).
inline lsr::Roadmap graph_roadmap(int n, const std::vector<std::pair<int, int>>& edges,
                                  const std::vector<lsr::Action>& actions = {}) {
  lsr::Roadmap rm;
  rm.points = Eigen::MatrixXd::Zero(2, n);
  for (int k = 0; k < n; ++k) {
    rm.points(0, k) = k;
    lsr::CoveredRegion region;
    region.members = {k};
    region.representative = k;
    region.centroid = rm.points.col(k);
    region.epsilon = 0.25;
    rm.regions.push_back(region);
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto& acts = rm.edges[edges[e]];
    if (e < actions.size()) acts.push_back(actions[e]);
  }
  rm.components = lsr::count_components(n, rm.edges);
  return rm;
}

/// Identity mapping over raw latent points.
class IdentityMapping final : public lsr::LatentMapping {
 public:
  Eigen::VectorXd encode(const Eigen::VectorXd& x) const override { return x; }
  Eigen::VectorXd decode(const Eigen::VectorXd& z) const override { return z; }
};

/// Encodes an observation as the noise-free template of its true state and
/// decodes as the identity.
class GroundTruthMapping final : public lsr::LatentMapping {
 public:
  explicit GroundTruthMapping(lsr::TaskKind task) : task_(task) {}
  Eigen::VectorXd encode(const Eigen::VectorXd& x) const override {
    return lsr::state_template(task_, lsr::decode_state(task_, x));
  }
  Eigen::VectorXd decode(const Eigen::VectorXd& z) const override { return z; }

 private:
  lsr::TaskKind task_;
};

/// One latent tuple per task transition, at the state templates.
inline std::vector<lsr::LatentTuple> transition_tuples(lsr::TaskKind task) {
  std::vector<lsr::LatentTuple> out;
  const auto& states = lsr::enumerate_states(task);
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (const auto& t : lsr::valid_actions(task, states[i])) {
      lsr::LatentTuple lt;
      lt.z1 = lsr::state_template(task, states[i]);
      lt.z2 = lsr::state_template(task, t.next);
      lt.action = true;
      lt.u = t.action;
      lt.state1 = static_cast<int>(i);
      lt.state2 = lsr::state_index(task, t.next);
      out.push_back(std::move(lt));
    }
  }
  return out;
}

/// The exact task transition graph, one region per state with the state's
/// template as its only member.
inline lsr::Roadmap oracle_roadmap(lsr::TaskKind task) {
  const auto& states = lsr::enumerate_states(task);
  const int n = static_cast<int>(states.size());
  lsr::Roadmap rm;
  rm.task = task;
  rm.points.resize(lsr::observation_dim(task), n);
  for (int k = 0; k < n; ++k) {
    rm.points.col(k) = lsr::state_template(task, states[static_cast<std::size_t>(k)]);
    lsr::CoveredRegion region;
    region.members = {k};
    region.representative = k;
    region.centroid = rm.points.col(k);
    region.epsilon = 0.1;
    rm.regions.push_back(region);
  }
  for (int k = 0; k < n; ++k)
    for (const auto& t : lsr::valid_actions(task, states[static_cast<std::size_t>(k)]))
      rm.edges[{k, lsr::state_index(task, t.next)}].push_back(t.action);
  rm.components = lsr::count_components(n, rm.edges);
  return rm;
}

/// Normal-stacking mapping trained with the default configuration and seed 1,
/// plus its roadmap at the optimized threshold. Built once per process.
struct TrainedNs {
  lsr::RunConfig config;
  lsr::TrainedMapping mapping;
  lsr::RunOutcome outcome;
};

inline const TrainedNs& trained_ns() {
  static const TrainedNs cached = [] {
    TrainedNs t;
    t.config.seeds = {1};
    t.mapping = lsr::train_mapping(t.config, 1);
    t.outcome = lsr::build_and_score(t.config, t.mapping, 1);
    return t;
  }();
  return cached;
}

}  // namespace fixture
