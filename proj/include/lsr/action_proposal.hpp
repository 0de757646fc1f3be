#pragma once

#include "lsr/mapping.hpp"
#include "lsr/perceptron.hpp"
#include "lsr/planner.hpp"
#include "lsr/roadmap.hpp"
#include "lsr/task_sim.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <vector>

namespace lsr {

struct ApnConfig {
  int epochs = 500;
  int hidden = 64;
  double dropout = 0.3;
  double learning_rate = 1e-3;
  int batch_size = 32;
  double validation_fraction = 0.15;
};

/// Action proposal network: classifies a latent pair (z_i, z_{i+1}) into the
/// task's unique action set.
class ApnModel {
 public:
  ApnModel() = default;
  ApnModel(TaskKind task, int pair_dim, int hidden, double dropout);

  TaskKind task() const { return task_; }
  int pair_dim() const { return net_.input_dim(); }  // 2 * latent dimension
  double dropout() const { return dropout_; }
  Perceptron& net() { return net_; }
  const Perceptron& net() const { return net_; }

  Eigen::VectorXd logits(const Eigen::VectorXd& z1, const Eigen::VectorXd& z2) const;
  Eigen::VectorXd probabilities(const Eigen::VectorXd& z1, const Eigen::VectorXd& z2) const;

 private:
  TaskKind task_ = TaskKind::NormalStacking;
  double dropout_ = 0.0;
  Perceptron net_;
};

struct ApnTrainResult {
  ApnModel model;
  double train_accuracy = 0.0;       // fraction
  double validation_accuracy = 0.0;  // fraction; 1 when the split is empty
  int best_epoch = 0;
};

/// Cross-entropy training with dropout on the hidden layer and Adam. The
/// weights with the best validation accuracy are returned, the latest epoch
/// winning ties.
ApnTrainResult train_apn(const std::vector<LatentActionTuple>& tuples, TaskKind task,
                         const ApnConfig& cfg, std::uint64_t seed);

/// Argmax action; deterministic.
Action propose(const ApnModel& apn, const Eigen::VectorXd& z1, const Eigen::VectorXd& z2);

/// Fraction of tuples whose proposed action equals the recorded one.
double apn_accuracy(const ApnModel& apn, const std::vector<LatentActionTuple>& tuples);

using AabAnnotations = std::map<EdgeKey, Action>;

/// One action per roadmap edge: the most frequent action of the edge's
/// multiset, ties to the smallest action.
AabAnnotations aab_annotate(const Roadmap& roadmap);

/// Fills plan.action_plan for each consecutive node pair.
void fill_action_plan(PlanResult& plan, const ApnModel& apn);
void fill_action_plan(PlanResult& plan, const AabAnnotations& annotations);

/// Fraction of roadmap edges whose annotated action, applied to the decoded
/// state of the source region, yields the decoded state of the target region.
double aab_transition_accuracy(TaskKind task, const Roadmap& roadmap,
                               const AabAnnotations& annotations, const LatentMapping& mapping);

/// Action pairs mapped into observation space by decoding their latent
/// points, for the observation-input APN variant.
std::vector<LatentActionTuple> decoded_action_pairs(const EncoderModel& model,
                                                    const std::vector<LatentActionTuple>& tuples);

}  // namespace lsr
