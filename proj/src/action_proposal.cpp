#include "lsr/action_proposal.hpp"

#include "lsr/random.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace lsr {

namespace {

Eigen::VectorXd concat(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd x(a.size() + b.size());
  x << a, b;
  return x;
}

int argmax(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  v.maxCoeff(&best);
  return static_cast<int>(best);
}

double accuracy(const Perceptron& net, const Eigen::MatrixXd& x, const std::vector<int>& labels,
                const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 1.0;
  long correct = 0;
  for (std::size_t i : idx) {
    const Eigen::VectorXd out = net.forward(x.col(static_cast<Eigen::Index>(i)));
    correct += argmax(out) == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(idx.size());
}

}  // namespace

ApnModel::ApnModel(TaskKind task, int pair_dim, int hidden, double dropout)
    : task_(task),
      dropout_(dropout),
      net_(pair_dim, hidden, static_cast<int>(unique_actions(task).size())) {
  if (dropout < 0 || dropout >= 1) throw std::invalid_argument("dropout must be in [0, 1)");
}

Eigen::VectorXd ApnModel::logits(const Eigen::VectorXd& z1, const Eigen::VectorXd& z2) const {
  if (z1.size() + z2.size() != pair_dim())
    throw std::invalid_argument("latent pair does not match the APN input size");
  return net_.forward(concat(z1, z2));
}

Eigen::VectorXd ApnModel::probabilities(const Eigen::VectorXd& z1,
                                        const Eigen::VectorXd& z2) const {
  const Eigen::VectorXd l = logits(z1, z2);
  const Eigen::ArrayXd e = (l.array() - l.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

ApnTrainResult train_apn(const std::vector<LatentActionTuple>& tuples, TaskKind task,
                         const ApnConfig& cfg, std::uint64_t seed) {
  if (tuples.empty()) throw std::invalid_argument("APN training set is empty");
  if (cfg.epochs < 0 || cfg.batch_size < 1 || cfg.validation_fraction < 0 ||
      cfg.validation_fraction >= 1)
    throw std::invalid_argument("invalid APN training configuration");
  const auto ld = tuples.front().z1.size();
  const auto n = tuples.size();
  Eigen::MatrixXd x(2 * ld, static_cast<Eigen::Index>(n));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = tuples[i];
    if (t.z1.size() != ld || t.z2.size() != ld)
      throw std::invalid_argument("APN tuples differ in dimension");
    x.col(static_cast<Eigen::Index>(i)) = concat(t.z1, t.z2);
    labels[i] = action_index(task, t.u);
    if (labels[i] < 0) throw std::invalid_argument("action " + to_string(t.u) + " is not a task action");
  }

  Rng rng(derive_seed(seed, 51));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = static_cast<std::size_t>(cfg.validation_fraction * static_cast<double>(n));
  const std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  ApnTrainResult result;
  result.model = ApnModel(task, static_cast<int>(2 * ld), cfg.hidden, cfg.dropout);
  Perceptron& net = result.model.net();
  net.init_uniform(rng);
  Optimizer opt(OptimizerKind::Adam, net.param_count(), cfg.learning_rate);
  Eigen::VectorXd grad(net.param_count());
  Eigen::VectorXd best = net.params();
  double best_val = -1.0;
  const double keep = 1.0 - cfg.dropout;
  std::bernoulli_distribution keep_unit(keep);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng);
    for (std::size_t start = 0; start < train.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(train.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const auto bn = static_cast<Eigen::Index>(stop - start);
      Eigen::MatrixXd xb(x.rows(), bn);
      for (Eigen::Index k = 0; k < bn; ++k) xb.col(k) = x.col(static_cast<Eigen::Index>(train[start + static_cast<std::size_t>(k)]));
      Eigen::MatrixXd mask;
      if (cfg.dropout > 0)
        mask = Eigen::MatrixXd::NullaryExpr(net.hidden_dim(), bn,
                                            [&] { return keep_unit(rng) ? 1.0 / keep : 0.0; });
      Perceptron::Cache cache;
      const Eigen::MatrixXd out = net.forward(xb, cache, cfg.dropout > 0 ? &mask : nullptr);
      // Softmax cross-entropy gradient.
      Eigen::MatrixXd d_out(out.rows(), bn);
      for (Eigen::Index k = 0; k < bn; ++k) {
        const Eigen::ArrayXd e = (out.col(k).array() - out.col(k).maxCoeff()).exp();
        d_out.col(k) = (e / e.sum()).matrix();
        d_out(labels[train[start + static_cast<std::size_t>(k)]], k) -= 1.0;
      }
      d_out /= static_cast<double>(bn);
      grad.setZero();
      net.backward(cache, d_out, grad);
      opt.step(net.params(), grad);
    }
    const double val_acc = accuracy(net, x, labels, val.empty() ? train : val);
    if (val_acc >= best_val) {
      best_val = val_acc;
      best = net.params();
      result.best_epoch = epoch;
    }
  }
  if (cfg.epochs > 0) net.params() = best;
  result.validation_accuracy = accuracy(net, x, labels, val);
  result.train_accuracy = accuracy(net, x, labels, train);
  return result;
}

Action propose(const ApnModel& apn, const Eigen::VectorXd& z1, const Eigen::VectorXd& z2) {
  return unique_actions(apn.task())[static_cast<std::size_t>(argmax(apn.logits(z1, z2)))];
}

double apn_accuracy(const ApnModel& apn, const std::vector<LatentActionTuple>& tuples) {
  if (tuples.empty()) return 0.0;
  long correct = 0;
  for (const auto& t : tuples) correct += propose(apn, t.z1, t.z2) == t.u;
  return static_cast<double>(correct) / static_cast<double>(tuples.size());
}

AabAnnotations aab_annotate(const Roadmap& roadmap) {
  AabAnnotations out;
  for (const auto& [key, acts] : roadmap.edges) {
    if (acts.empty())
      throw std::invalid_argument("roadmap edge " + std::to_string(key.first) + "->" +
                                  std::to_string(key.second) + " carries no actions");
    std::map<Action, int> votes;
    for (const auto& a : acts) ++votes[a];
    // std::map iterates in ascending action order, so the first maximum wins ties.
    auto best = votes.begin();
    for (auto it = votes.begin(); it != votes.end(); ++it)
      if (it->second > best->second) best = it;
    out.emplace(key, best->first);
  }
  return out;
}

void fill_action_plan(PlanResult& plan, const ApnModel& apn) {
  if (plan.latent_plan.empty()) throw std::invalid_argument("plan has no nodes");
  plan.action_plan.clear();
  for (std::size_t k = 0; k + 1 < plan.latent_plan.size(); ++k)
    plan.action_plan.push_back(propose(apn, plan.latent_plan[k], plan.latent_plan[k + 1]));
}

void fill_action_plan(PlanResult& plan, const AabAnnotations& annotations) {
  if (plan.nodes.empty()) throw std::invalid_argument("plan has no nodes");
  plan.action_plan.clear();
  for (std::size_t k = 0; k + 1 < plan.nodes.size(); ++k) {
    const auto it = annotations.find({plan.nodes[k], plan.nodes[k + 1]});
    if (it == annotations.end())
      throw std::invalid_argument("no action annotation for edge " + std::to_string(plan.nodes[k]) +
                                  "->" + std::to_string(plan.nodes[k + 1]));
    plan.action_plan.push_back(it->second);
  }
}

double aab_transition_accuracy(TaskKind task, const Roadmap& roadmap,
                               const AabAnnotations& annotations, const LatentMapping& mapping) {
  if (annotations.empty()) return 0.0;
  std::vector<TaskState> decoded;
  decoded.reserve(roadmap.regions.size());
  for (int r = 0; r < roadmap.region_count(); ++r)
    decoded.push_back(decode_state(task, mapping.decode(roadmap.representative(r))));
  long correct = 0;
  for (const auto& [key, action] : annotations) {
    const auto& from = decoded[static_cast<std::size_t>(key.first)];
    const auto& to = decoded[static_cast<std::size_t>(key.second)];
    for (const auto& t : valid_actions(task, from))
      if (t.action == action && t.next == to) {
        ++correct;
        break;
      }
  }
  return static_cast<double>(correct) / static_cast<double>(annotations.size());
}

std::vector<LatentActionTuple> decoded_action_pairs(const EncoderModel& model,
                                                    const std::vector<LatentActionTuple>& tuples) {
  std::vector<LatentActionTuple> out;
  out.reserve(tuples.size());
  for (const auto& t : tuples) out.push_back({model.decode(t.z1), model.decode(t.z2), t.u});
  return out;
}

}  // namespace lsr
