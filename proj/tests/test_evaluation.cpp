#include "fixtures.hpp"
#include "oracles.hpp"

#include "lsr/evaluation.hpp"
#include "lsr/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace lsr;

namespace {

void check_report_invariants(const ScoreReport& r) {
  CHECK(r.pct_all <= r.pct_any);
  CHECK(r.pct_all >= 0.0);
  CHECK(r.pct_any <= 100.0);
  CHECK(r.pct_trans >= 0.0);
  CHECK(r.pct_trans <= 100.0);
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("transition correctness requires an actual move") {
    const auto& states = enumerate_states(TaskKind::NormalStacking);
    const auto& s = states[10];
    CHECK_FALSE(transition_correct(TaskKind::NormalStacking, s, s));
    for (const auto& t : valid_actions(TaskKind::NormalStacking, s)) CHECK(transition_correct(TaskKind::NormalStacking, s, t.next));
    const auto far = oracle::bfs_distances(TaskKind::NormalStacking, s);
    for (const auto& [other, d] : far)
      if (d >= 2) CHECK_FALSE(transition_correct(TaskKind::NormalStacking, s, other));
  }

  TEST_CASE("oracle roadmap scores 100/100/100") {
    for (auto task : {TaskKind::NormalStacking, TaskKind::HardStacking, TaskKind::RopeBox}) {
      const auto rm = fixture::oracle_roadmap(task);
      const fixture::GroundTruthMapping gt(task);
      const auto holdout = render_holdout(task, 500, 3);
      const auto r = score_planning(task, rm, gt, holdout, 300, 4);
      CAPTURE(task_code(task));
      CHECK(r.pct_all == 100.0);
      CHECK(r.pct_any == 100.0);
      CHECK(r.pct_trans == 100.0);
      CHECK(r.unreachable == 0);
      CHECK(r.n_queries == 300);
    }
  }

  TEST_CASE("roadmap built from the exact transition tuples is the oracle graph") {
    const auto tuples = fixture::transition_tuples(TaskKind::RopeBox);
    const auto rm = build_lsr(tuples, Metric::L1, 1e-6, ClusteringKind::Average);
    CHECK(rm.region_count() == 104);
    CHECK(rm.edge_count() == fixture::oracle_roadmap(TaskKind::RopeBox).edge_count());
    CHECK(rm.components == 1);
    const fixture::GroundTruthMapping gt(TaskKind::RopeBox);
    const auto r = score_planning(TaskKind::RopeBox, rm, gt, render_holdout(TaskKind::RopeBox, 300, 5), 200, 6);
    CHECK(r.pct_all == 100.0);
    CHECK(r.pct_trans == 100.0);
  }

  TEST_CASE("damaged roadmaps keep %All at most %Any") {
    const fixture::GroundTruthMapping gt(TaskKind::NormalStacking);
    const auto holdout = render_holdout(TaskKind::NormalStacking, 300, 7);
    Rng rng(8);
    for (int k = 0; k < 6; ++k) {
      auto rm = fixture::oracle_roadmap(TaskKind::NormalStacking);
      // Swap representatives of random regions so some decoded transitions go wrong.
      for (int s = 0; s < 40 * k; ++s) {
        const auto a = std::uniform_int_distribution<int>(0, 287)(rng);
        const auto b = std::uniform_int_distribution<int>(0, 287)(rng);
        const Eigen::VectorXd tmp = rm.points.col(a);
        rm.points.col(a) = rm.points.col(b);
        rm.points.col(b) = tmp;
      }
      const auto r = score_planning(TaskKind::NormalStacking, rm, gt, holdout, 200, k);
      check_report_invariants(r);
      if (k > 0) CHECK(r.pct_any < 100.0);
    }
  }

  TEST_CASE("unreachable queries fail and count one transition") {
    // Every state isolated.
    auto rm = fixture::oracle_roadmap(TaskKind::NormalStacking);
    rm.edges.clear();
    rm.components = 288;
    const fixture::GroundTruthMapping gt(TaskKind::NormalStacking);
    const auto holdout = render_holdout(TaskKind::NormalStacking, 100, 1);
    const auto r = score_planning(TaskKind::NormalStacking, rm, gt, holdout, 50, 2, 0);
    CHECK(r.pct_any <= 100.0 * (50 - r.unreachable) / 50.0);
    CHECK(r.unreachable > 0);
    check_report_invariants(r);
    CHECK(r.transitions >= r.unreachable);
  }

  TEST_CASE("scoring needs provenance") {
    auto holdout = render_holdout(TaskKind::NormalStacking, 10, 1);
    holdout[3].provenance.reset();
    const auto rm = fixture::oracle_roadmap(TaskKind::NormalStacking);
    const fixture::GroundTruthMapping gt(TaskKind::NormalStacking);
    CHECK_THROWS(score_planning(TaskKind::NormalStacking, rm, gt, holdout, 10, 1));
  }

  TEST_CASE("trained normal stacking pipeline scores") {
    const auto& r = fixture::trained_ns().outcome.score;
    check_report_invariants(r);
    CHECK(r.n_queries == 1000);
    CHECK(r.pct_trans >= 99.0);
    CHECK(r.pct_any >= 97.0);
  }

  TEST_CASE("coverage of members, noise and held-out renders") {
    const auto rm = fixture::oracle_roadmap(TaskKind::RopeBox);
    const fixture::IdentityMapping id;
    std::vector<Eigen::VectorXd> members;
    for (Eigen::Index c = 0; c < rm.points.cols(); ++c) members.push_back(rm.points.col(c));
    CHECK(coverage_rate(rm, id, members) == 100.0);

    const auto& t = fixture::trained_ns();
    const ModelMapping mm(t.mapping.result.model);
    std::vector<Eigen::VectorXd> in;
    for (const auto& h : render_holdout(TaskKind::NormalStacking, 500, 21)) in.push_back(h.features);
    std::vector<OodSource> ood{{"noise", uniform_noise(500, 53, 3)}};
    const auto report = score_coverage(t.outcome.search.roadmap, mm, in, ood);
    CHECK(report.in_distribution >= 99.0);
    REQUIRE(report.ood.size() == 1);
    CHECK(report.ood[0].second <= 1.0);
  }

  TEST_CASE("fit_dimension and uniform noise") {
    Eigen::VectorXd x(3);
    x << 1, 2, 3;
    const auto padded = fit_dimension(x, 5);
    CHECK(padded.size() == 5);
    CHECK(padded.head(3) == x);
    CHECK(padded.tail(2).isZero());
    CHECK(fit_dimension(x, 2) == x.head(2));
    const auto noise = uniform_noise(50, 4, 1);
    REQUIRE(noise.size() == 50);
    for (const auto& v : noise) {
      CHECK(v.size() == 4);
      CHECK(v.minCoeff() >= 0.0);
      CHECK(v.maxCoeff() < 1.0);
    }
  }

  TEST_CASE("relative contrast of a simplex is zero") {
    const Eigen::MatrixXd simplex = Eigen::MatrixXd::Identity(8, 8);
    const auto e = relative_contrast(simplex, Metric::L2);
    CHECK(e.rc == doctest::Approx(0.0));
    CHECK_FALSE(e.degenerate);
    CHECK_THROWS(relative_contrast(Eigen::MatrixXd::Zero(2, 3), Metric::L1));
    const auto same = relative_contrast(Eigen::MatrixXd::Zero(2, 6), Metric::L1);
    CHECK(same.degenerate);
    CHECK(same.rc == 0.0);
  }

  TEST_CASE("relative contrast matches direct recomputation") {
    Rng rng(99);
    for (int k = 0; k < 40; ++k) {
      const int n = std::uniform_int_distribution<int>(4, 200)(rng);
      const int dim = std::uniform_int_distribution<int>(1, 16)(rng);
      const int norm = std::uniform_int_distribution<int>(0, 2)(rng);
      const Metric metric = norm == 0 ? Metric::Linf : norm == 1 ? Metric::L1 : Metric::L2;
      const Eigen::MatrixXd p = Eigen::MatrixXd::NullaryExpr(dim, n, [&] { return uniform(rng, -3, 3); });
      const double want = oracle::relative_contrast(p, norm);
      CHECK(std::abs(relative_contrast(p, metric).rc - want) <= 1e-9 * std::max(1.0, std::abs(want)));
    }
  }

  TEST_CASE("separation margins") {
    Eigen::MatrixXd p(2, 2);
    p << 0, 3, 0, 4;
    const auto two = separation_stats(p, {0, 1}, Metric::L2);
    REQUIRE(two.states.size() == 2);
    CHECK(two.states[0].margin == doctest::Approx(5.0));
    CHECK(two.states[0].single_sample);
    CHECK(two.non_negative == 2);

    Rng rng(4);
    const Eigen::MatrixXd q = Eigen::MatrixXd::NullaryExpr(3, 12, [&] { return uniform(rng, 0, 1); });
    std::vector<int> labels{0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3};
    const auto base = separation_stats(q, labels, Metric::L1);
    Eigen::MatrixXd doubled(3, 15);
    doubled << q, q.middleCols(3, 3);
    auto labels2 = labels;
    labels2.insert(labels2.end(), {1, 1, 1});
    const auto dup = separation_stats(doubled, labels2, Metric::L1);
    for (std::size_t s = 0; s < 4; ++s) CHECK(dup.states[s].margin == doctest::Approx(base.states[s].margin));
    CHECK(dup.states[1].samples == 6);
  }

  TEST_CASE("trained action model separates more states than chance") {
    const auto& t = fixture::trained_ns();
    const auto holdout = render_holdout(TaskKind::NormalStacking, 1500, 5);
    Eigen::MatrixXd z(12, static_cast<Eigen::Index>(holdout.size()));
    std::vector<int> labels;
    for (std::size_t i = 0; i < holdout.size(); ++i) {
      z.col(static_cast<Eigen::Index>(i)) = t.mapping.result.model.encode(holdout[i].features).z;
      labels.push_back(state_index(TaskKind::NormalStacking, *holdout[i].provenance));
    }
    const auto report = separation_stats(z, labels, Metric::L1);
    CHECK(report.non_negative >= static_cast<int>(0.9 * static_cast<double>(report.states.size())));
  }

  TEST_CASE("population mean and standard deviation") {
    const auto [m, s] = mean_std({1.0, 2.0, 3.0, 4.0});
    CHECK(m == doctest::Approx(2.5));
    CHECK(s == doctest::Approx(std::sqrt(1.25)));
    CHECK(mean_std({}).first == 0.0);
  }
}
