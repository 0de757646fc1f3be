#pragma once

#include "lsr/random.hpp"

#include <Eigen/Core>

namespace lsr {

/// One-hidden-layer perceptron: in -> tanh(hidden) -> identity(out).
///
/// Parameters live in one flat vector (W1, b1, W2, b2, column-major) so that
/// optimizers and finite-difference checks can treat the network as a point
/// in R^n. Inputs and outputs are column batches.
class Perceptron {
 public:
  struct Cache {
    Eigen::MatrixXd input;
    Eigen::MatrixXd activation;  // tanh(W1 x + b1), before dropout
    Eigen::MatrixXd hidden;      // activation after dropout mask
    Eigen::MatrixXd mask;        // empty when dropout is off
  };

  Perceptron() = default;
  Perceptron(int in, int hidden, int out);

  int input_dim() const { return in_; }
  int hidden_dim() const { return hidden_; }
  int output_dim() const { return out_; }
  Eigen::Index param_count() const { return params_.size(); }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
  void init_uniform(Rng& rng);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  /// Forward pass retaining what backward() needs. `mask` (hidden x batch)
  /// multiplies the hidden activations when non-null.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache& cache,
                          const Eigen::MatrixXd* mask = nullptr) const;

  /// Accumulates dL/dparams into `grad` (same layout as params()) and
  /// returns dL/dinput.
  Eigen::MatrixXd backward(const Cache& cache, const Eigen::MatrixXd& d_out,
                           Eigen::Ref<Eigen::VectorXd> grad) const;

 private:
  using ConstMap = Eigen::Map<const Eigen::MatrixXd>;
  using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

  ConstMap w1() const { return {params_.data(), hidden_, in_}; }
  ConstVecMap b1() const { return {params_.data() + w1_size(), hidden_}; }
  ConstMap w2() const { return {params_.data() + w1_size() + hidden_, out_, hidden_}; }
  ConstVecMap b2() const { return {params_.data() + w1_size() + hidden_ + w2_size(), out_}; }

  Eigen::Index w1_size() const { return Eigen::Index{hidden_} * in_; }
  Eigen::Index w2_size() const { return Eigen::Index{out_} * hidden_; }

  int in_ = 0;
  int hidden_ = 0;
  int out_ = 0;
  Eigen::VectorXd params_;
};

enum class OptimizerKind { Sgd, Adam };

/// First-order update rule over a flat parameter vector.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, Eigen::Index n, double lr);
  void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad);

 private:
  OptimizerKind kind_;
  double lr_;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

}  // namespace lsr
