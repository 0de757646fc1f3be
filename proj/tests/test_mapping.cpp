#include "fixtures.hpp"

#include "lsr/mapping.hpp"
#include "lsr/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace lsr;

namespace {

PairBatch small_batch(TaskKind task, int n, double frac, std::uint64_t seed) {
  return PairBatch::from(generate_dataset(task, n, frac, seed));
}

double max_relative_gradient_error(EncoderMode mode, Metric metric, std::uint64_t seed) {
  auto model = EncoderModel::create(mode, observation_dim(TaskKind::NormalStacking), 4, seed, 16);
  const auto batch = small_batch(TaskKind::NormalStacking, 6, 0.5, seed);
  LossConfig cfg;
  cfg.metric = metric;
  cfg.dm = 50.0;  // keeps the hinge active for every action pair
  const int epoch = 40;
  Rng rng(seed);
  std::normal_distribution<double> normal;
  const Eigen::MatrixXd e1 = Eigen::MatrixXd::NullaryExpr(4, batch.size(), [&] { return normal(rng); });
  const Eigen::MatrixXd e2 = Eigen::MatrixXd::NullaryExpr(4, batch.size(), [&] { return normal(rng); });
  const bool stoch = mode == EncoderMode::Stochastic;
  Eigen::VectorXd grad;
  evaluate_loss(model, batch, cfg, epoch, stoch ? &e1 : nullptr, stoch ? &e2 : nullptr, &grad);
  const Eigen::VectorXd base = model.flat_params();
  std::uniform_int_distribution<Eigen::Index> pick(0, base.size() - 1);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Eigen::Index i = pick(rng);
    auto at = [&](double delta) {
      Eigen::VectorXd p = base;
      p[i] += delta;
      EncoderModel m = model;
      m.set_flat_params(p);
      return evaluate_loss(m, batch, cfg, epoch, stoch ? &e1 : nullptr, stoch ? &e2 : nullptr).total;
    };
    const double numeric = (at(1e-5) - at(-1e-5)) / 2e-5;
    const double scale = std::max({std::abs(numeric), std::abs(grad[i]), 1e-6});
    worst = std::max(worst, std::abs(numeric - grad[i]) / scale);
  }
  return worst;
}

}  // namespace

TEST_SUITE("mapping") {
  TEST_CASE("action loss cases") {
    Eigen::VectorXd z(2), w(2);
    z << 0.0, 0.0;
    w << 0.5, 0.5;
    CHECK(action_loss(z, z, false, 1.0, Metric::L1) == 0.0);
    CHECK(action_loss(z, w, false, 1.0, Metric::L1) == doctest::Approx(1.0));
    CHECK(action_loss(z, w, true, 2.3, Metric::L1) == doctest::Approx(1.3));
    CHECK(action_loss(z, w, true, 1.0, Metric::L1) == 0.0);
    CHECK(action_loss(z, w, true, 0.5, Metric::L1) == 0.0);
  }

  TEST_CASE("beta ramps linearly") {
    LossConfig cfg;
    cfg.beta_end = 2.0;
    cfg.beta_ramp_epochs = 400;
    CHECK(cfg.beta(0) == 0.0);
    CHECK(cfg.beta(200) == doctest::Approx(1.0));
    CHECK(cfg.beta(400) == doctest::Approx(2.0));
    CHECK(cfg.beta(1000) == doctest::Approx(2.0));
  }

  TEST_CASE("perfect reconstruction with gamma 0 has zero loss") {
    const int d = observation_dim(TaskKind::NormalStacking);
    EncoderModel model(EncoderMode::Deterministic, d, 3, 8);
    model.encoder().params().setZero();
    model.decoder().params().setZero();
    const auto obs = render(TaskKind::NormalStacking, enumerate_states(TaskKind::NormalStacking)[4], 1);
    model.decoder().params().tail(d) = obs.features;
    LossConfig cfg;
    cfg.gamma = 0.0;
    const DatasetTuple t{obs, obs, false, std::nullopt};
    CHECK(total_loss(model, t, cfg, 0).total == doctest::Approx(0.0));
  }

  TEST_CASE("posterior equal to the prior has zero KL") {
    EncoderModel model(EncoderMode::Stochastic, observation_dim(TaskKind::NormalStacking), 3, 8);
    model.encoder().params().setZero();
    const auto data = generate_dataset(TaskKind::NormalStacking, 4, 0.5, 2);
    const auto terms = evaluate_loss(model, PairBatch::from(data), LossConfig{}, 100, nullptr, nullptr);
    CHECK(terms.kl == doctest::Approx(0.0));
  }

  TEST_CASE("loss terms combine with their weights") {
    auto model = EncoderModel::create(EncoderMode::Stochastic, observation_dim(TaskKind::NormalStacking), 5, 3);
    const auto batch = small_batch(TaskKind::NormalStacking, 10, 0.5, 3);
    LossConfig cfg;
    cfg.dm = 1.0;
    const auto t = evaluate_loss(model, batch, cfg, 80, nullptr, nullptr);
    CHECK(t.total == doctest::Approx(t.recon + cfg.beta(80) * t.kl + cfg.gamma * t.action));
    // Action term recomputed pair by pair at the posterior means.
    const Eigen::MatrixXd m1 = model.encode_means(batch.x1), m2 = model.encode_means(batch.x2);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < batch.size(); ++i) {
      const double dist = (m1.col(i) - m2.col(i)).cwiseAbs().sum();
      sum += batch.a[i] > 0.5 ? std::max(0.0, cfg.dm - dist) : dist;
    }
    CHECK(t.action == doctest::Approx(sum / batch.size()));
  }

  TEST_CASE("analytic gradient matches finite differences") {
    for (auto mode : {EncoderMode::Stochastic, EncoderMode::Deterministic}) {
      for (auto metric : {Metric::L1, Metric::L2}) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
          CAPTURE(mode_name(mode));
          CAPTURE(metric_name(metric));
          CHECK(max_relative_gradient_error(mode, metric, seed) < 1e-4);
        }
      }
    }
  }

  TEST_CASE("deterministic encoding is repeatable and has the latent dimension") {
    for (auto mode : {EncoderMode::Stochastic, EncoderMode::Deterministic}) {
      auto model = EncoderModel::create(mode, observation_dim(TaskKind::RopeBox), 7, 1);
      const auto obs = render(TaskKind::RopeBox, enumerate_states(TaskKind::RopeBox)[0], 1);
      const auto a = model.encode(obs.features), b = model.encode(obs.features);
      CHECK(a.z == b.z);
      CHECK(a.z.size() == 7);
      CHECK(model.stochastic() == a.mu.has_value());
    }
  }

  TEST_CASE("sampled encodings average to the posterior mean") {
    auto model = EncoderModel::create(EncoderMode::Stochastic, observation_dim(TaskKind::NormalStacking), 4, 8);
    const auto obs = render(TaskKind::NormalStacking, enumerate_states(TaskKind::NormalStacking)[9], 1);
    const auto mean = model.encode(obs.features);
    const int n = 10000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(4);
    for (int i = 0; i < n; ++i) sum += model.encode(obs.features, false, derive_seed(77, i)).z;
    const Eigen::VectorXd sigma = (0.5 * mean.logvar->array()).exp();
    for (int k = 0; k < 4; ++k) CHECK(std::abs(sum[k] / n - (*mean.mu)[k]) <= 3.0 * sigma[k] / std::sqrt(n));
  }

  TEST_CASE("untrained model produces finite output of the observation dimension") {
    auto model = EncoderModel::create(EncoderMode::Stochastic, 37, 6, 1);
    const Eigen::VectorXd x = model.decode(model.encode(Eigen::VectorXd::Ones(37)).z);
    CHECK(x.size() == 37);
    CHECK(x.allFinite());
    CHECK_THROWS(model.encode(Eigen::VectorXd::Ones(5)));
    CHECK_THROWS(model.decode(Eigen::VectorXd::Ones(5)));
  }

  TEST_CASE("no-action pairs collapse under a large action weight") {
    const auto data = generate_dataset(TaskKind::NormalStacking, 200, 0.0, 4);
    const auto batch = PairBatch::from(data);
    auto run = [&](double gamma) {
      auto model = EncoderModel::create(EncoderMode::Deterministic, observation_dim(TaskKind::NormalStacking), 4, 4);
      LossConfig cfg;
      cfg.gamma = gamma;
      TrainConfig tc;
      tc.epochs = 60;
      return train(std::move(model), data, cfg, tc, 4).model;
    };
    const auto plain = run(0.0);
    const auto pulled = run(1e3);
    const auto [plain_no, plain_act] = pair_separation(plain, batch, Metric::L1);
    const auto [max_no, min_act] = pair_separation(pulled, batch, Metric::L1);
    double spread = 0.0;
    for (std::size_t i = 0; i + 1 < data.size(); ++i)
      spread += distance(pulled.encode(data[i].obs1.features).z, pulled.encode(data[i + 1].obs1.features).z, Metric::L1);
    spread /= static_cast<double>(data.size() - 1);
    CHECK(max_no <= 0.05 * plain_no);
    CHECK(max_no <= 0.02 * spread);
    CHECK(std::isinf(min_act));
    CHECK(std::isinf(plain_act));
  }

  TEST_CASE("training rejects empty or mismatched data") {
    auto model = EncoderModel::create(EncoderMode::Stochastic, 53, 4, 1);
    CHECK_THROWS(train(model, {}, LossConfig{}, TrainConfig{}, 1));
    CHECK_THROWS(train(model, generate_dataset(TaskKind::RopeBox, 5, 0.5, 1), LossConfig{}, TrainConfig{}, 1));
    LossConfig bad;
    bad.gamma = -1.0;
    CHECK_THROWS(bad.validate());
  }

  TEST_CASE("the minimum distance grows only while pairs overlap") {
    const auto& t = fixture::trained_ns();
    const auto& trace = t.mapping.result.trace;
    REQUIRE(trace.epochs.size() == 200);
    for (std::size_t e = 1; e < trace.epochs.size(); ++e) {
      const auto& prev = trace.epochs[e - 1];
      const auto& cur = trace.epochs[e];
      if (!cur.checked) {
        CHECK(cur.dm == prev.dm);
        continue;
      }
      const double expected = prev.dm + (cur.max_no_action > cur.min_action ? 0.1 : 0.0);
      CHECK(cur.dm == doctest::Approx(expected));
    }
  }

  TEST_CASE("trained normal stacking mapping separates pairs and plateaus") {
    const auto& trace = fixture::trained_ns().mapping.result.trace;
    CHECK(trace.final_min_action > trace.final_max_no_action);
    const auto& last = trace.epochs.back();
    CHECK(last.dm == trace.final_dm);
    CHECK(trace.epochs[trace.epochs.size() * 3 / 4].dm == trace.final_dm);
  }

  TEST_CASE("decoded encodings recover the rendered state") {
    const auto& model = fixture::trained_ns().mapping.result.model;
    const auto holdout = render_holdout(TaskKind::NormalStacking, 1000, 17);
    int correct = 0;
    for (const auto& h : holdout)
      correct += decode_state(TaskKind::NormalStacking, model.decode(model.encode(h.features).z)) == *h.provenance;
    CHECK(correct >= 980);
  }

  TEST_CASE("augmentation keeps actions and scales with samples") {
    const auto& t = fixture::trained_ns();
    const auto& data = t.mapping.data.tuples;
    const auto plain = augment_apn_dataset(t.mapping.result.model, data, 0, 1);
    const auto doubled = augment_apn_dataset(t.mapping.result.model, data, 1, 1);
    CHECK(plain.size() == 1625);
    CHECK(doubled.size() == 3250);
    std::size_t k = 0;
    for (const auto& tuple : data) {
      if (!tuple.action) continue;
      CHECK(doubled[2 * k].u == *tuple.u);
      CHECK(doubled[2 * k + 1].u == *tuple.u);
      CHECK(doubled[2 * k].z1 == plain[k].z1);
      ++k;
    }
    auto ae = EncoderModel::create(EncoderMode::Deterministic, 53, 4, 1);
    CHECK_THROWS(augment_apn_dataset(ae, data, 1, 1));
    CHECK(augment_apn_dataset(ae, data, 0, 1).size() == 1625);
  }
}
