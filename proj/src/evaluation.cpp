#include "lsr/evaluation.hpp"

#include "lsr/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace lsr {

bool transition_correct(TaskKind task, const TaskState& s1, const TaskState& s2) {
  return !(s1 == s2) && is_valid_transition(task, s1, s2);
}

ScoreReport score_planning(TaskKind task, const Roadmap& roadmap, const LatentMapping& mapping,
                           const std::vector<Observation>& holdout, int n_queries,
                           std::uint64_t seed, int max_fallback) {
  if (holdout.empty()) throw std::invalid_argument("holdout set is empty");
  if (n_queries < 1) throw std::invalid_argument("need at least one query");
  for (const auto& o : holdout)
    if (!o.provenance) throw std::invalid_argument("holdout observations need state provenance");

  const PathFinder finder(roadmap);
  Rng rng(derive_seed(seed, 41));
  std::uniform_int_distribution<std::size_t> pick(0, holdout.size() - 1);
  ScoreReport report;
  report.n_queries = n_queries;
  long all_ok = 0, any_ok = 0, trans_ok = 0;
  // Decoded states of representatives are reused across queries.
  std::map<int, TaskState> decoded;
  auto state_of = [&](int node, const Eigen::VectorXd& observation) {
    auto it = decoded.find(node);
    if (it == decoded.end()) it = decoded.emplace(node, decode_state(task, observation)).first;
    return it->second;
  };

  for (int q = 0; q < n_queries; ++q) {
    const auto& start = holdout[pick(rng)];
    const auto& goal = holdout[pick(rng)];
    std::vector<PlanResult> plans;
    try {
      plans = plan(roadmap, finder, mapping, start.features, goal.features, max_fallback);
    } catch (const UnreachableError&) {
      ++report.unreachable;
      ++report.transitions;
      continue;
    }
    if (plans.front().truncated) ++report.truncated;
    bool all = true, any = false;
    for (const auto& p : plans) {
      bool correct = true;
      std::vector<TaskState> states;
      for (std::size_t k = 0; k < p.nodes.size(); ++k)
        states.push_back(state_of(p.nodes[k], p.decoded_plan[k]));
      for (std::size_t k = 0; k + 1 < states.size(); ++k) {
        const bool ok = transition_correct(task, states[k], states[k + 1]);
        ++report.transitions;
        trans_ok += ok;
        correct = correct && ok;
      }
      correct = correct && states.back() == *goal.provenance;
      all = all && correct;
      any = any || correct;
    }
    all_ok += all;
    any_ok += any;
  }
  report.pct_all = 100.0 * static_cast<double>(all_ok) / n_queries;
  report.pct_any = 100.0 * static_cast<double>(any_ok) / n_queries;
  report.pct_trans = report.transitions > 0
                         ? 100.0 * static_cast<double>(trans_ok) / static_cast<double>(report.transitions)
                         : 100.0;
  return report;
}

Eigen::VectorXd fit_dimension(const Eigen::VectorXd& x, int dim) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
  const auto n = std::min<Eigen::Index>(dim, x.size());
  out.head(n) = x.head(n);
  return out;
}

double coverage_rate(const Roadmap& roadmap, const LatentMapping& mapping,
                     const std::vector<Eigen::VectorXd>& observations) {
  if (observations.empty()) return 0.0;
  long covered = 0;
  for (const auto& x : observations) covered += is_covered(roadmap, mapping.encode(x)).has_value();
  return 100.0 * static_cast<double>(covered) / static_cast<double>(observations.size());
}

CoverageReport score_coverage(const Roadmap& roadmap, const LatentMapping& mapping,
                              const std::vector<Eigen::VectorXd>& in_distribution,
                              const std::vector<OodSource>& ood_sources) {
  CoverageReport report;
  report.in_distribution = coverage_rate(roadmap, mapping, in_distribution);
  for (const auto& src : ood_sources)
    report.ood.emplace_back(src.name, coverage_rate(roadmap, mapping, src.observations));
  return report;
}

std::vector<Eigen::VectorXd> uniform_noise(int n, int dim, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 43));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(n), Eigen::VectorXd(dim));
  for (auto& v : out)
    for (int i = 0; i < dim; ++i) v[i] = u(rng);
  return out;
}

ContrastEntry relative_contrast(const Eigen::MatrixXd& points, Metric metric) {
  const Eigen::Index n = points.cols();
  if (n < 4) throw std::invalid_argument("relative contrast needs at least four points");
  const Eigen::Index half = n / 2;
  double sum_min = 0.0, sum_max = 0.0;
  long count = 0;
  for (const auto& [begin, end] : {std::pair{Eigen::Index{0}, half}, std::pair{half, n}}) {
    for (Eigen::Index i = begin; i < end; ++i) {
      double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
      for (Eigen::Index j = begin; j < end; ++j) {
        if (j == i) continue;
        const double d = distance(points.col(i), points.col(j), metric);
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
      }
      sum_min += dmin;
      sum_max += dmax;
      ++count;
    }
  }
  ContrastEntry e;
  e.avg_dmin = sum_min / static_cast<double>(count);
  e.avg_dmax = sum_max / static_cast<double>(count);
  if (e.avg_dmin == 0.0) {
    e.degenerate = true;
    e.rc = e.avg_dmax == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    e.rc = (e.avg_dmax - e.avg_dmin) / e.avg_dmin;
  }
  return e;
}

SeparationReport separation_stats(const Eigen::MatrixXd& points, const std::vector<int>& labels,
                                  Metric metric) {
  if (static_cast<Eigen::Index>(labels.size()) != points.cols())
    throw std::invalid_argument("one label per point required");
  std::map<int, std::vector<Eigen::Index>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i)
    groups[labels[i]].push_back(static_cast<Eigen::Index>(i));

  std::vector<int> ids;
  std::vector<Eigen::VectorXd> centroids;
  for (const auto& [id, members] : groups) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(points.rows());
    for (auto m : members) c += points.col(m);
    ids.push_back(id);
    centroids.push_back(c / static_cast<double>(members.size()));
  }

  SeparationReport report;
  double margin_sum = 0.0;
  std::size_t k = 0;
  for (const auto& [id, members] : groups) {
    StateSeparation s;
    s.state = id;
    s.samples = static_cast<int>(members.size());
    s.single_sample = members.size() == 1;
    for (auto m : members) s.max_intra = std::max(s.max_intra, distance(points.col(m), centroids[k], metric));
    s.min_inter = std::numeric_limits<double>::infinity();
    for (std::size_t o = 0; o < centroids.size(); ++o)
      if (o != k) s.min_inter = std::min(s.min_inter, distance(centroids[o], centroids[k], metric));
    s.margin = s.min_inter - s.max_intra;
    if (s.margin >= 0) ++report.non_negative;
    margin_sum += std::isfinite(s.margin) ? s.margin : 0.0;
    report.states.push_back(s);
    ++k;
  }
  report.mean_margin = report.states.empty() ? 0.0 : margin_sum / static_cast<double>(report.states.size());
  return report;
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

}  // namespace lsr
