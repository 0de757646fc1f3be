#pragma once

#include "lsr/metric.hpp"
#include "lsr/perceptron.hpp"
#include "lsr/random.hpp"
#include "lsr/task_sim.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

namespace lsr {

enum class EncoderMode { Stochastic, Deterministic };

std::string_view mode_name(EncoderMode m);  // "vae", "ae"
EncoderMode parse_mode(std::string_view name);

struct LatentPoint {
  Eigen::VectorXd z;
  std::optional<Eigen::VectorXd> mu;
  std::optional<Eigen::VectorXd> logvar;
};

/// Weights of the augmented objective and the minimum-distance schedule.
struct LossConfig {
  double beta_end = 2.0;
  int beta_ramp_epochs = 160;
  double gamma = 100.0;
  Metric metric = Metric::L1;
  double dm = 0.0;  // current minimum distance between action pairs
  double delta_dm = 0.1;
  int k_epochs = 5;
  bool dynamic_dm = true;
  /// Inverse variance of the Gaussian decoder likelihood; 30 is a noise
  /// scale of about 0.18, close to the positional jitter.
  double recon_weight = 30.0;

  /// Linear ramp from 0 at epoch 0 to beta_end at beta_ramp_epochs.
  double beta(int epoch) const;
  void validate() const;
};

struct TrainConfig {
  int epochs = 200;
  int batch_size = 32;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::Sgd;
  double weight_decay = 0.0;  // L2 penalty on all weights
  double clip_norm = 1000.0;  // rescale batch gradients above this norm; 0 disables

  static TrainConfig defaults_for(EncoderMode mode);
};

/// Encoder (xi) and decoder (omega) of the mapping module.
class EncoderModel {
 public:
  static constexpr int kDefaultHidden = 64;

  EncoderModel() = default;
  EncoderModel(EncoderMode mode, int input_dim, int latent_dim, int hidden = kDefaultHidden);

  /// Freshly initialized model; weights uniform in +-1/sqrt(fan_in).
  static EncoderModel create(EncoderMode mode, int input_dim, int latent_dim, std::uint64_t seed,
                             int hidden = kDefaultHidden);

  EncoderMode mode() const { return mode_; }
  bool stochastic() const { return mode_ == EncoderMode::Stochastic; }
  int input_dim() const { return encoder_.input_dim(); }
  int latent_dim() const { return latent_dim_; }
  int hidden_dim() const { return encoder_.hidden_dim(); }

  Perceptron& encoder() { return encoder_; }
  const Perceptron& encoder() const { return encoder_; }
  Perceptron& decoder() { return decoder_; }
  const Perceptron& decoder() const { return decoder_; }

  Eigen::Index param_count() const { return encoder_.param_count() + decoder_.param_count(); }
  /// Encoder parameters followed by decoder parameters.
  Eigen::VectorXd flat_params() const;
  void set_flat_params(const Eigen::VectorXd& p);

  /// Stochastic models return the posterior mean when `deterministic` is set
  /// and a reparameterized sample otherwise; Deterministic models ignore it.
  LatentPoint encode(const Eigen::VectorXd& x, bool deterministic = true,
                     std::uint64_t seed = 0) const;
  /// Column-wise mean encodings.
  Eigen::MatrixXd encode_means(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd decode(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd decode_batch(const Eigen::MatrixXd& z) const;

  // Provenance carried into the model file.
  std::optional<TaskKind> task;
  LossConfig loss;
  std::uint64_t seed = 0;

 private:
  EncoderMode mode_ = EncoderMode::Stochastic;
  int latent_dim_ = 0;
  Perceptron encoder_;
  Perceptron decoder_;
};

/// a = 1: max(0, dm - ||z1 - z2||_p); a = 0: ||z1 - z2||_p.
double action_loss(const Eigen::VectorXd& z1, const Eigen::VectorXd& z2, bool action, double dm,
                   Metric metric);

struct LossTerms {
  double recon = 0.0;   // mean over observations
  double kl = 0.0;      // mean over observations, before beta
  double action = 0.0;  // mean over pairs, before gamma
  double total = 0.0;
};

/// A batch of observation pairs, one pair per column.
struct PairBatch {
  Eigen::MatrixXd x1;
  Eigen::MatrixXd x2;
  Eigen::VectorXd a;  // 0 or 1

  Eigen::Index size() const { return x1.cols(); }
  static PairBatch from(const std::vector<DatasetTuple>& data);
  PairBatch select(const std::vector<Eigen::Index>& idx) const;
};

/// Mean augmented loss over `batch`. Reparameterization noise (latent x
/// batch) is taken from `eps1`/`eps2`; null means zero noise. When `grad` is
/// non-null it receives dL/dparams in flat_params() layout.
LossTerms evaluate_loss(const EncoderModel& model, const PairBatch& batch, const LossConfig& cfg,
                        int epoch, const Eigen::MatrixXd* eps1, const Eigen::MatrixXd* eps2,
                        Eigen::VectorXd* grad = nullptr);

/// Loss of a single tuple at its posterior means.
LossTerms total_loss(const EncoderModel& model, const DatasetTuple& tuple, const LossConfig& cfg,
                     int epoch);

struct EpochRecord {
  int epoch = 0;
  LossTerms loss;
  double beta = 0.0;
  double dm = 0.0;  // value used during this epoch
  bool checked = false;
  double max_no_action = 0.0;  // valid when checked
  double min_action = 0.0;
};

struct TrainingTrace {
  std::vector<EpochRecord> epochs;
  double final_dm = 0.0;
  double final_max_no_action = 0.0;
  double final_min_action = 0.0;
  long clipped_steps = 0;  // batches whose gradient norm exceeded clip_norm
};

struct TrainResult {
  EncoderModel model;
  TrainingTrace trace;
};

/// Separation statistics over a dataset at the posterior means:
/// (max distance among no-action pairs, min distance among action pairs).
/// Missing pair kinds give 0 / +inf respectively.
std::pair<double, double> pair_separation(const EncoderModel& model, const PairBatch& data,
                                          Metric metric);

/// Mini-batch training of the augmented objective with the dynamic
/// minimum-distance schedule. Throws std::runtime_error on non-finite loss.
TrainResult train(EncoderModel model, const std::vector<DatasetTuple>& data, LossConfig cfg,
                  const TrainConfig& tc, std::uint64_t seed);

struct LatentActionTuple {
  Eigen::VectorXd z1;
  Eigen::VectorXd z2;
  Action u;
};

/// Means plus `samples` posterior draws per action pair. Drawing samples
/// needs a stochastic model.
std::vector<LatentActionTuple> augment_apn_dataset(const EncoderModel& model,
                                                   const std::vector<DatasetTuple>& data,
                                                   int samples, std::uint64_t seed);

}  // namespace lsr
