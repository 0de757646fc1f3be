#include "lsr/perceptron.hpp"

#include <cmath>
#include <stdexcept>

namespace lsr {

Perceptron::Perceptron(int in, int hidden, int out) : in_(in), hidden_(hidden), out_(out) {
  if (in < 1 || hidden < 1 || out < 1) throw std::invalid_argument("perceptron dimensions must be positive");
  params_ = Eigen::VectorXd::Zero(w1_size() + hidden_ + w2_size() + out_);
}

void Perceptron::init_uniform(Rng& rng) {
  const double r1 = 1.0 / std::sqrt(static_cast<double>(in_));
  const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
  const Eigen::Index first = w1_size() + hidden_;
  for (Eigen::Index i = 0; i < params_.size(); ++i) {
    const double r = i < first ? r1 : r2;
    params_[i] = uniform(rng, -r, r);
  }
}

Eigen::MatrixXd Perceptron::forward(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd h = ((w1() * x).colwise() + b1()).array().tanh().matrix();
  return (w2() * h).colwise() + b2();
}

Eigen::MatrixXd Perceptron::forward(const Eigen::MatrixXd& x, Cache& cache,
                                    const Eigen::MatrixXd* mask) const {
  if (x.rows() != in_) throw std::invalid_argument("perceptron input has wrong dimension");
  cache.input = x;
  cache.activation = ((w1() * x).colwise() + b1()).array().tanh().matrix();
  if (mask) {
    cache.mask = *mask;
    cache.hidden = cache.activation.cwiseProduct(*mask);
  } else {
    cache.mask.resize(0, 0);
    cache.hidden = cache.activation;
  }
  return (w2() * cache.hidden).colwise() + b2();
}

Eigen::MatrixXd Perceptron::backward(const Cache& cache, const Eigen::MatrixXd& d_out,
                                     Eigen::Ref<Eigen::VectorXd> grad) const {
  double* g = grad.data();
  Eigen::Map<Eigen::MatrixXd> gw1(g, hidden_, in_);
  Eigen::Map<Eigen::VectorXd> gb1(g + w1_size(), hidden_);
  Eigen::Map<Eigen::MatrixXd> gw2(g + w1_size() + hidden_, out_, hidden_);
  Eigen::Map<Eigen::VectorXd> gb2(g + w1_size() + hidden_ + w2_size(), out_);

  gw2.noalias() += d_out * cache.hidden.transpose();
  gb2 += d_out.rowwise().sum();
  Eigen::MatrixXd d_hidden = w2().transpose() * d_out;
  if (cache.mask.size() > 0) d_hidden = d_hidden.cwiseProduct(cache.mask);
  const Eigen::MatrixXd d_pre =
      d_hidden.cwiseProduct((1.0 - cache.activation.array().square()).matrix());
  gw1.noalias() += d_pre * cache.input.transpose();
  gb1 += d_pre.rowwise().sum();
  return w1().transpose() * d_pre;
}

Optimizer::Optimizer(OptimizerKind kind, Eigen::Index n, double lr) : kind_(kind), lr_(lr) {
  if (kind_ == OptimizerKind::Adam) {
    m_ = Eigen::VectorXd::Zero(n);
    v_ = Eigen::VectorXd::Zero(n);
  }
}

void Optimizer::step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad) {
  if (kind_ == OptimizerKind::Sgd) {
    params -= lr_ * grad;
    return;
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++t_;
  m_ = kBeta1 * m_ + (1 - kBeta1) * grad;
  v_ = kBeta2 * v_ + (1 - kBeta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + kEps);
}

}  // namespace lsr
