#include "lsr/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lsr {

std::string_view mode_name(EncoderMode m) {
  return m == EncoderMode::Stochastic ? "vae" : "ae";
}

EncoderMode parse_mode(std::string_view name) {
  if (name == "vae") return EncoderMode::Stochastic;
  if (name == "ae") return EncoderMode::Deterministic;
  throw std::invalid_argument("unknown encoder mode '" + std::string(name) + "' (expected vae or ae)");
}

double LossConfig::beta(int epoch) const {
  if (beta_ramp_epochs <= 0) return beta_end;
  const double t = std::clamp(static_cast<double>(epoch) / beta_ramp_epochs, 0.0, 1.0);
  return t * beta_end;
}

void LossConfig::validate() const {
  if (gamma < 0) throw std::invalid_argument("gamma must be >= 0");
  if (dm < 0) throw std::invalid_argument("dm must be >= 0");
  if (dynamic_dm && !(delta_dm > 0)) throw std::invalid_argument("delta_dm must be > 0");
  if (k_epochs < 1) throw std::invalid_argument("k_epochs must be >= 1");
  if (beta_end < 0 || recon_weight < 0) throw std::invalid_argument("loss weights must be >= 0");
}

TrainConfig TrainConfig::defaults_for(EncoderMode mode) {
  TrainConfig tc;
  if (mode == EncoderMode::Deterministic) tc.weight_decay = 1e-4;
  return tc;
}

EncoderModel::EncoderModel(EncoderMode mode, int input_dim, int latent_dim, int hidden)
    : mode_(mode),
      latent_dim_(latent_dim),
      encoder_(input_dim, hidden, mode == EncoderMode::Stochastic ? 2 * latent_dim : latent_dim),
      decoder_(latent_dim, hidden, input_dim) {
  if (latent_dim < 1) throw std::invalid_argument("latent dimension must be >= 1");
}

EncoderModel EncoderModel::create(EncoderMode mode, int input_dim, int latent_dim,
                                  std::uint64_t seed, int hidden) {
  EncoderModel m(mode, input_dim, latent_dim, hidden);
  Rng rng(derive_seed(seed, 11));
  m.encoder_.init_uniform(rng);
  m.decoder_.init_uniform(rng);
  m.seed = seed;
  return m;
}

Eigen::VectorXd EncoderModel::flat_params() const {
  Eigen::VectorXd p(param_count());
  p << encoder_.params(), decoder_.params();
  return p;
}

void EncoderModel::set_flat_params(const Eigen::VectorXd& p) {
  if (p.size() != param_count()) throw std::invalid_argument("parameter vector has wrong size");
  encoder_.params() = p.head(encoder_.param_count());
  decoder_.params() = p.tail(decoder_.param_count());
}

LatentPoint EncoderModel::encode(const Eigen::VectorXd& x, bool deterministic,
                                 std::uint64_t seed) const {
  if (x.size() != input_dim())
    throw std::invalid_argument("observation has dimension " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(input_dim()));
  const Eigen::VectorXd out = encoder_.forward(x);
  if (!stochastic()) return {out, std::nullopt, std::nullopt};
  Eigen::VectorXd mu = out.head(latent_dim_);
  Eigen::VectorXd logvar = out.tail(latent_dim_);
  Eigen::VectorXd z = mu;
  if (!deterministic) {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] += std::exp(0.5 * logvar[i]) * normal(rng);
  }
  return {std::move(z), std::move(mu), std::move(logvar)};
}

Eigen::MatrixXd EncoderModel::encode_means(const Eigen::MatrixXd& x) const {
  if (x.rows() != input_dim()) throw std::invalid_argument("observation batch has wrong dimension");
  Eigen::MatrixXd out = encoder_.forward(x);
  if (stochastic()) return out.topRows(latent_dim_);
  return out;
}

Eigen::VectorXd EncoderModel::decode(const Eigen::VectorXd& z) const {
  if (z.size() != latent_dim_) throw std::invalid_argument("latent point has wrong dimension");
  return decoder_.forward(z);
}

Eigen::MatrixXd EncoderModel::decode_batch(const Eigen::MatrixXd& z) const {
  if (z.rows() != latent_dim_) throw std::invalid_argument("latent batch has wrong dimension");
  return decoder_.forward(z);
}

double action_loss(const Eigen::VectorXd& z1, const Eigen::VectorXd& z2, bool action, double dm,
                   Metric metric) {
  if (z1.size() != z2.size()) throw std::invalid_argument("latent points differ in dimension");
  const double d = distance(z1, z2, metric);
  return action ? std::max(0.0, dm - d) : d;
}

PairBatch PairBatch::from(const std::vector<DatasetTuple>& data) {
  PairBatch b;
  if (data.empty()) return b;
  const auto d = data.front().obs1.features.size();
  const auto n = static_cast<Eigen::Index>(data.size());
  b.x1.resize(d, n);
  b.x2.resize(d, n);
  b.a.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = data[static_cast<std::size_t>(i)];
    if (t.obs1.features.size() != d || t.obs2.features.size() != d)
      throw std::invalid_argument("dataset mixes observation dimensions");
    b.x1.col(i) = t.obs1.features;
    b.x2.col(i) = t.obs2.features;
    b.a[i] = t.action ? 1.0 : 0.0;
  }
  return b;
}

PairBatch PairBatch::select(const std::vector<Eigen::Index>& idx) const {
  PairBatch b;
  const auto n = static_cast<Eigen::Index>(idx.size());
  b.x1.resize(x1.rows(), n);
  b.x2.resize(x2.rows(), n);
  b.a.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    b.x1.col(i) = x1.col(idx[static_cast<std::size_t>(i)]);
    b.x2.col(i) = x2.col(idx[static_cast<std::size_t>(i)]);
    b.a[i] = a[idx[static_cast<std::size_t>(i)]];
  }
  return b;
}

LossTerms evaluate_loss(const EncoderModel& model, const PairBatch& batch, const LossConfig& cfg,
                        int epoch, const Eigen::MatrixXd* eps1, const Eigen::MatrixXd* eps2,
                        Eigen::VectorXd* grad) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw std::invalid_argument("empty batch");
  const int ld = model.latent_dim();
  const bool stoch = model.stochastic();
  const double beta = stoch ? cfg.beta(epoch) : 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);

  Eigen::MatrixXd x(batch.x1.rows(), 2 * n);
  x << batch.x1, batch.x2;

  Perceptron::Cache enc_cache, dec_cache;
  const Eigen::MatrixXd out = model.encoder().forward(x, enc_cache);
  Eigen::MatrixXd mu = out.topRows(ld);
  Eigen::MatrixXd z = mu;
  Eigen::MatrixXd std_dev;
  Eigen::MatrixXd eps;
  if (stoch) {
    std_dev = (0.5 * out.bottomRows(ld).array()).exp().matrix();
    eps = Eigen::MatrixXd::Zero(ld, 2 * n);
    if (eps1) eps.leftCols(n) = *eps1;
    if (eps2) eps.rightCols(n) = *eps2;
    z += std_dev.cwiseProduct(eps);
  }
  const Eigen::MatrixXd recon = model.decoder().forward(z, dec_cache);
  const Eigen::MatrixXd residual = recon - x;

  LossTerms terms;
  terms.recon = cfg.recon_weight * residual.squaredNorm() * 0.5 * inv_n;
  if (stoch) {
    const auto lv = out.bottomRows(ld).array();
    terms.kl = 0.5 * (mu.array().square() + lv.exp() - lv - 1.0).sum() * 0.5 * inv_n;
  }

  Eigen::MatrixXd d_mu_action = Eigen::MatrixXd::Zero(ld, 2 * n);
  double action_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto m1 = mu.col(i);
    const auto m2 = mu.col(n + i);
    const double d = distance(m1, m2, cfg.metric);
    const bool is_action = batch.a[i] > 0.5;
    double coeff = 0.0;  // dL/dd
    if (is_action) {
      if (cfg.dm - d > 0) {
        action_sum += cfg.dm - d;
        coeff = -1.0;
      }
    } else {
      action_sum += d;
      coeff = 1.0;
    }
    if (grad && coeff != 0.0 && cfg.gamma > 0) {
      const Eigen::VectorXd g = distance_gradient(m1, m2, cfg.metric) * (coeff * cfg.gamma * inv_n);
      d_mu_action.col(i) += g;
      d_mu_action.col(n + i) -= g;
    }
  }
  terms.action = action_sum * inv_n;
  terms.total = terms.recon + beta * terms.kl + cfg.gamma * terms.action;

  if (grad) {
    grad->setZero(model.param_count());
    const Eigen::Index enc_n = model.encoder().param_count();
    const Eigen::MatrixXd d_recon = residual * (cfg.recon_weight * inv_n);
    const Eigen::MatrixXd d_z =
        model.decoder().backward(dec_cache, d_recon, grad->segment(enc_n, model.decoder().param_count()));
    Eigen::MatrixXd d_out(out.rows(), out.cols());
    if (stoch) {
      const auto lv = out.bottomRows(ld).array();
      const double kl_w = 0.5 * beta * inv_n;
      d_out.topRows(ld) = d_z + d_mu_action + kl_w * mu;
      d_out.bottomRows(ld) = (d_z.array() * eps.array() * 0.5 * std_dev.array() +
                              kl_w * 0.5 * (lv.exp() - 1.0))
                                 .matrix();
    } else {
      d_out = d_z + d_mu_action;
    }
    model.encoder().backward(enc_cache, d_out, grad->head(enc_n));
  }
  return terms;
}

LossTerms total_loss(const EncoderModel& model, const DatasetTuple& tuple, const LossConfig& cfg,
                     int epoch) {
  return evaluate_loss(model, PairBatch::from({tuple}), cfg, epoch, nullptr, nullptr);
}

std::pair<double, double> pair_separation(const EncoderModel& model, const PairBatch& data,
                                          Metric metric) {
  const Eigen::MatrixXd m1 = model.encode_means(data.x1);
  const Eigen::MatrixXd m2 = model.encode_means(data.x2);
  double max_no = 0.0;
  double min_act = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const double d = distance(m1.col(i), m2.col(i), metric);
    if (data.a[i] > 0.5)
      min_act = std::min(min_act, d);
    else
      max_no = std::max(max_no, d);
  }
  return {max_no, min_act};
}

TrainResult train(EncoderModel model, const std::vector<DatasetTuple>& data, LossConfig cfg,
                  const TrainConfig& tc, std::uint64_t seed) {
  if (data.empty()) throw std::invalid_argument("training dataset is empty");
  cfg.validate();
  if (tc.epochs < 0 || tc.batch_size < 1 || tc.clip_norm < 0) throw std::invalid_argument("invalid training schedule");
  const PairBatch all = PairBatch::from(data);
  if (all.x1.rows() != model.input_dim())
    throw std::invalid_argument("dataset dimension does not match the model");
  const bool has_action = (all.a.array() > 0.5).any();
  const bool has_no_action = (all.a.array() < 0.5).any();

  Rng rng(derive_seed(seed, 21));
  std::normal_distribution<double> normal;
  Eigen::VectorXd params = model.flat_params();
  Optimizer opt(tc.optimizer, params.size(), tc.learning_rate);
  Eigen::VectorXd grad(params.size());

  std::vector<Eigen::Index> order(static_cast<std::size_t>(all.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  TrainingTrace trace;
  const int ld = model.latent_dim();
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    if (cfg.dynamic_dm && epoch % cfg.k_epochs == 0 && has_action && has_no_action) {
      const auto [max_no, min_act] = pair_separation(model, all, cfg.metric);
      rec.checked = true;
      rec.max_no_action = max_no;
      rec.min_action = min_act;
      if (max_no > min_act) cfg.dm += cfg.delta_dm;
    }
    rec.dm = cfg.dm;
    rec.beta = model.stochastic() ? cfg.beta(epoch) : 0.0;

    std::shuffle(order.begin(), order.end(), rng);
    LossTerms sum;
    double weight = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(tc.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(tc.batch_size));
      const PairBatch batch = all.select({order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(stop)});
      const auto bn = batch.size();
      Eigen::MatrixXd e1, e2;
      if (model.stochastic()) {
        e1 = Eigen::MatrixXd::NullaryExpr(ld, bn, [&] { return normal(rng); });
        e2 = Eigen::MatrixXd::NullaryExpr(ld, bn, [&] { return normal(rng); });
      }
      const LossTerms t = evaluate_loss(model, batch, cfg, epoch, model.stochastic() ? &e1 : nullptr,
                                        model.stochastic() ? &e2 : nullptr, &grad);
      if (!std::isfinite(t.total) || !grad.allFinite()) {
        std::ostringstream os;
        os << "training diverged at epoch " << epoch << ": recon=" << t.recon << " kl=" << t.kl
           << " action=" << t.action << " dm=" << cfg.dm;
        throw std::runtime_error(os.str());
      }
      if (tc.weight_decay > 0) grad += 2.0 * tc.weight_decay * params;
      if (tc.clip_norm > 0) {
        const double norm = grad.norm();
        if (norm > tc.clip_norm) {
          grad *= tc.clip_norm / norm;
          ++trace.clipped_steps;
        }
      }
      opt.step(params, grad);
      model.set_flat_params(params);
      const double w = static_cast<double>(bn);
      sum.recon += w * t.recon;
      sum.kl += w * t.kl;
      sum.action += w * t.action;
      sum.total += w * t.total;
      weight += w;
    }
    rec.loss = {sum.recon / weight, sum.kl / weight, sum.action / weight, sum.total / weight};
    trace.epochs.push_back(rec);
  }
  const auto [max_no, min_act] = pair_separation(model, all, cfg.metric);
  trace.final_dm = cfg.dm;
  trace.final_max_no_action = max_no;
  trace.final_min_action = min_act;
  model.loss = cfg;
  model.seed = seed;
  return {std::move(model), std::move(trace)};
}

std::vector<LatentActionTuple> augment_apn_dataset(const EncoderModel& model,
                                                   const std::vector<DatasetTuple>& data,
                                                   int samples, std::uint64_t seed) {
  if (samples < 0) throw std::invalid_argument("sample count must be >= 0");
  if (samples > 0 && !model.stochastic())
    throw std::invalid_argument("sampling unavailable: deterministic encoder has no posterior");
  std::vector<LatentActionTuple> out;
  Rng rng(derive_seed(seed, 31));
  for (const auto& t : data) {
    if (!t.action || !t.u) continue;
    const LatentPoint p1 = model.encode(t.obs1.features);
    const LatentPoint p2 = model.encode(t.obs2.features);
    out.push_back({p1.z, p2.z, *t.u});
    for (int s = 0; s < samples; ++s) {
      const auto z1 = model.encode(t.obs1.features, false, rng()).z;
      const auto z2 = model.encode(t.obs2.features, false, rng()).z;
      out.push_back({z1, z2, *t.u});
    }
  }
  return out;
}

}  // namespace lsr
